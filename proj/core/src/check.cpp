#include "tock/check.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tock {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Product-node bookkeeping for trace reconstruction.
struct product_node {
    uint32_t impl, spec;
    uint32_t parent;  // index into the node vector, k_invalid at the root
    label_id via;     // label taken from the parent (tau included)
};

std::vector<label_id> rebuild_trace(const std::vector<product_node>& nodes, uint32_t leaf) {
    std::vector<label_id> rev;
    for (uint32_t i = leaf; i != k_invalid; i = nodes[i].parent)
        if (nodes[i].via != k_invalid && nodes[i].via != k_label_tau)
            rev.push_back(nodes[i].via);
    return {rev.rbegin(), rev.rend()};
}

} // namespace

check_outcome check_traces_refinement(const lts& impl, const dlts& spec,
                                      uint64_t max_product_states) {
    auto t0 = std::chrono::steady_clock::now();
    check_outcome out;

    std::vector<product_node> nodes;
    std::unordered_map<uint64_t, uint32_t> seen;
    // 0-1 breadth-first search: internal steps cost nothing, observable steps
    // cost one, so the first violation found has minimal observable length.
    std::deque<uint32_t> queue;

    auto push = [&](uint32_t is, uint32_t ss, uint32_t parent, label_id via,
                    bool front) -> bool {
        uint64_t key = (uint64_t(is) << 32) | ss;
        if (!seen.emplace(key, uint32_t(nodes.size())).second) return true;
        if (nodes.size() >= max_product_states)
            throw bound_exceeded("refinement product state limit exceeded",
                                 {nodes.size(), 0, seconds_since(t0)});
        nodes.push_back({is, ss, parent, via});
        if (front)
            queue.push_front(uint32_t(nodes.size() - 1));
        else
            queue.push_back(uint32_t(nodes.size() - 1));
        return true;
    };

    push(0, 0, k_invalid, k_invalid, false);
    while (!queue.empty()) {
        uint32_t cur = queue.front();
        queue.pop_front();
        const product_node n = nodes[cur];
        for (const lts_edge& e : impl.out(n.impl)) {
            if (e.label == k_label_tau) {
                push(e.dst, n.spec, cur, e.label, true);
                continue;
            }
            uint32_t ns = spec.next(n.spec, e.label);
            if (ns == k_invalid) {
                counterexample cex;
                cex.kind = "trace";
                cex.trace = rebuild_trace(nodes, cur);
                cex.violating = e.label;
                out.result = check_result::fail;
                out.cex = std::move(cex);
                out.stats = {nodes.size(), seconds_since(t0)};
                return out;
            }
            push(e.dst, ns, cur, e.label, false);
        }
    }
    out.stats = {nodes.size(), seconds_since(t0)};
    return out;
}

std::vector<std::string> alphabet_gap(const lts& impl, const dlts& spec, const context& ctx) {
    std::set<chan_id> spec_chans, impl_chans;
    for (uint32_t s = 0; s < spec.num_states(); ++s)
        for (const lts_edge& e : spec.out(s))
            if (label_is_visible(e.label)) spec_chans.insert(ctx.label_channel(e.label));
    for (uint32_t s = 0; s < impl.num_states(); ++s)
        for (const lts_edge& e : impl.out(s))
            if (label_is_visible(e.label)) impl_chans.insert(ctx.label_channel(e.label));
    std::vector<std::string> gap;
    for (chan_id c : impl_chans)
        if (!spec_chans.count(c)) gap.push_back(ctx.channel_info(c).name);
    return gap;
}

namespace {

// Path (observable labels only) from the initial state to `target`.
std::vector<label_id> path_to_state(const lts& m, uint32_t target) {
    std::vector<uint32_t> parent(m.num_states(), k_invalid);
    std::vector<label_id> via(m.num_states(), k_invalid);
    std::deque<uint32_t> queue{0};
    std::vector<uint8_t> seen(m.num_states(), 0);
    seen[0] = 1;
    while (!queue.empty()) {
        uint32_t s = queue.front();
        queue.pop_front();
        if (s == target) break;
        for (const lts_edge& e : m.out(s)) {
            if (seen[e.dst]) continue;
            seen[e.dst] = 1;
            parent[e.dst] = s;
            via[e.dst] = e.label;
            if (e.label == k_label_tau)
                queue.push_front(e.dst);
            else
                queue.push_back(e.dst);
        }
    }
    std::vector<label_id> rev;
    for (uint32_t s = target; parent[s] != k_invalid; s = parent[s])
        if (via[s] != k_label_tau) rev.push_back(via[s]);
    return {rev.rbegin(), rev.rend()};
}

} // namespace

check_outcome check_timed_deadlock_free(const lts& m, const context& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    check_outcome out;
    out.stats.product_states = m.num_states();

    // Successfully terminated states idle forever by design.
    const term_id omega = const_cast<context&>(ctx).t_omega();
    const term_id tp_omega = const_cast<context&>(ctx).t_timed_priority(omega);

    // Pass 1: a state refusing everything (even tock) is a timelock.
    for (uint32_t s = 0; s < m.num_states(); ++s) {
        if (!m.out(s).empty()) continue;
        if (m.state_term[s] == omega || m.state_term[s] == tp_omega) continue;
        counterexample cex;
        cex.kind = "timelock";
        cex.trace = path_to_state(m, s);
        out.result = check_result::fail;
        out.cex = std::move(cex);
        out.stats.seconds = seconds_since(t0);
        return out;
    }

    // Pass 2: candidate states offer tock and nothing else. A cycle through
    // candidates is a quiescent loop: time passes forever, nothing is offered.
    std::vector<uint8_t> cand(m.num_states(), 0);
    for (uint32_t s = 0; s < m.num_states(); ++s) {
        if (m.state_term[s] == omega || m.state_term[s] == tp_omega) continue;
        auto es = m.out(s);
        if (es.empty()) continue;
        bool all_tock = true;
        for (const lts_edge& e : es)
            if (e.label != k_label_tock) all_tock = false;
        cand[s] = all_tock;
    }

    // Iterative depth-first cycle search restricted to candidate states.
    // color: 0 unvisited, 1 on the current path, 2 finished. When an edge hits
    // a state already on the path, the path segment from it to the top is the
    // quiescent cycle.
    std::vector<uint8_t> color(m.num_states(), 0);
    uint32_t cycle_entry = k_invalid;
    size_t cycle_len = 0;
    for (uint32_t root = 0; root < m.num_states() && cycle_entry == k_invalid; ++root) {
        if (!cand[root] || color[root]) continue;
        std::vector<std::pair<uint32_t, size_t>> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty() && cycle_entry == k_invalid) {
            uint32_t s = stack.back().first;
            size_t i = stack.back().second;
            auto es = m.out(s);
            if (i >= es.size()) {
                color[s] = 2;
                stack.pop_back();
                continue;
            }
            stack.back().second = i + 1;
            uint32_t d = es[i].dst;
            if (!cand[d]) continue;
            if (color[d] == 1) {
                cycle_entry = d;
                cycle_len = 1; // the closing edge back to d
                for (size_t k = stack.size(); k-- > 0 && stack[k].first != d;) ++cycle_len;
                break;
            }
            if (color[d] == 0) {
                color[d] = 1;
                stack.push_back({d, 0});
            }
        }
    }

    if (cycle_entry != k_invalid) {
        counterexample cex;
        cex.kind = "timed-deadlock";
        cex.trace = path_to_state(m, cycle_entry);
        cex.loop.assign(cycle_len, k_label_tock);
        out.result = check_result::fail;
        out.cex = std::move(cex);
    }
    out.stats.seconds = seconds_since(t0);
    return out;
}

check_outcome check_reachable(const lts& m, label_id marker) {
    auto t0 = std::chrono::steady_clock::now();
    check_outcome out;
    out.stats.product_states = m.num_states();
    for (uint32_t s = 0; s < m.num_states(); ++s) {
        for (const lts_edge& e : m.out(s)) {
            if (e.label != marker) continue;
            counterexample wit; // witness, reusing the counterexample carrier
            wit.kind = "witness";
            wit.trace = path_to_state(m, s);
            wit.trace.push_back(marker);
            out.cex = std::move(wit);
            out.stats.seconds = seconds_since(t0);
            return out;
        }
    }
    out.result = check_result::fail;
    out.stats.seconds = seconds_since(t0);
    return out;
}

namespace {

void closure_internal(stepper& st, std::set<term_id>& states) {
    std::vector<term_id> work(states.begin(), states.end());
    while (!work.empty()) {
        term_id t = work.back();
        work.pop_back();
        auto succ = st.successors(t);
        for (const transition& tr : *succ)
            if (tr.label == k_label_tau && states.insert(tr.target).second)
                work.push_back(tr.target);
    }
}

} // namespace

bool replay_trace(stepper& st, term_id root, std::span<const label_id> trace) {
    std::set<term_id> cur{root};
    closure_internal(st, cur);
    for (label_id l : trace) {
        std::set<term_id> next;
        for (term_id t : cur) {
            auto succ = st.successors(t);
            for (const transition& tr : *succ)
                if (tr.label == l) next.insert(tr.target);
        }
        if (next.empty()) return false;
        closure_internal(st, next);
        cur = std::move(next);
    }
    return true;
}

bool verify_refinement_counterexample(stepper& impl_stepper, term_id impl_root,
                                      const dlts& spec, const counterexample& cex) {
    if (cex.kind != "trace" || cex.violating == k_invalid) return false;
    std::vector<label_id> full = cex.trace;
    full.push_back(cex.violating);
    if (!replay_trace(impl_stepper, impl_root, full)) return false;
    uint32_t s = 0;
    for (label_id l : cex.trace) {
        s = spec.next(s, l);
        if (s == k_invalid) return false; // prefix must be accepted
    }
    return spec.next(s, cex.violating) == k_invalid; // final label must be refused
}

std::string format_trace(const context& ctx, std::span<const label_id> trace) {
    std::ostringstream os;
    os << "<";
    for (size_t i = 0; i < trace.size(); ++i) os << (i ? ", " : "") << ctx.label_name(trace[i]);
    os << ">";
    return os.str();
}

} // namespace tock
