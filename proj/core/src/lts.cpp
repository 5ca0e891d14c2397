#include "tock/lts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace tock {

namespace {

// Follow single-tau chains to their end. A state whose only behaviour is one
// internal step is observationally equivalent to its successor for trace and
// deadlock analysis, so it never needs a state id of its own. Cycles of such
// states (internal divergence) are left in place.
term_id chase_tau(stepper& st, term_id t) {
    std::vector<term_id> visited;
    for (;;) {
        auto succ = st.successors(t);
        if (succ->size() != 1 || (*succ)[0].label != k_label_tau) return t;
        term_id next = (*succ)[0].target;
        if (std::find(visited.begin(), visited.end(), next) != visited.end()) return t;
        visited.push_back(t);
        t = next;
    }
}

} // namespace

// Unfold call chains before a term becomes a state; otherwise every recursive
// knot re-entered through a call site gets a duplicate wrapper state. State
// terms are closed, so the arguments always evaluate.
term_id resolve_calls(stepper& st, term_id t) {
    context& c = st.ctx();
    std::vector<term_id> visited;
    for (;;) {
        if (c.term(t).op != term_op::call) return t;
        if (std::find(visited.begin(), visited.end(), t) != visited.end())
            throw unguarded_recursion_error("unguarded recursion expanding " +
                                            c.def_info(c.term(t).a).name);
        visited.push_back(t);
        // Copy out of the node before subst_term can grow the arenas.
        auto argspan = c.call_args(c.term(t));
        std::vector<expr_id> args(argspan.begin(), argspan.end());
        term_id body = c.def_info(c.term(t).a).body;
        if (body == k_invalid) return t; // undefined body: let stepping report it
        std::vector<value> frame;
        frame.reserve(args.size());
        for (size_t i = args.size(); i-- > 0;) frame.push_back(c.eval(args[i], {}));
        t = c.subst_term(body, 0, frame);
    }
}

namespace {

// Resolution can expose a tau chain and a tau chain can end on a call, so run
// the two to a fixpoint. A silent cycle (internal divergence) is left as is.
term_id normalize_state(stepper& st, term_id t) {
    std::vector<term_id> seen;
    for (;;) {
        if (std::find(seen.begin(), seen.end(), t) != seen.end()) return t;
        seen.push_back(t);
        term_id r = chase_tau(st, resolve_calls(st, t));
        if (r == t) return r;
        t = r;
    }
}

} // namespace

lts compile_lts(stepper& st, term_id root, const exploration_limits& lim) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return uint64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count());
    };

    lts m;
    flat_u32_map index;
    std::vector<term_id> frontier;

    term_id start = lim.tau_chase ? normalize_state(st, root) : root;
    index.emplace(start, 0);
    m.state_term.push_back(start);
    m.row.push_back(0);
    frontier.push_back(start);

    unsigned threads = lim.threads ? lim.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;

    std::vector<std::vector<transition>> layer_succ;
    while (!frontier.empty()) {
        if (lim.max_millis && elapsed_ms() > lim.max_millis)
            throw bound_exceeded("exploration wall-clock limit exceeded",
                                 {m.num_states(), m.edges.size(), double(elapsed_ms()) / 1e3});

        // Expand the whole layer first (parallelizable), then merge in order so
        // state numbering is independent of the thread count.
        layer_succ.assign(frontier.size(), {});
        auto expand = [&](size_t lo, size_t hi) {
            for (size_t i = lo; i < hi; ++i) {
                auto succ = st.successors(frontier[i]);
                std::vector<transition> copy(*succ);
                if (lim.tau_chase)
                    for (transition& tr : copy) tr.target = normalize_state(st, tr.target);
                layer_succ[i] = std::move(copy);
            }
        };
        if (threads <= 1 || frontier.size() < 128) {
            expand(0, frontier.size());
        } else {
            std::vector<std::thread> pool;
            size_t chunk = (frontier.size() + threads - 1) / threads;
            std::exception_ptr first_error;
            std::mutex err_mu;
            for (unsigned w = 0; w < threads; ++w) {
                size_t lo = w * chunk, hi = std::min(frontier.size(), lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi] {
                    try {
                        expand(lo, hi);
                    } catch (...) {
                        std::lock_guard<std::mutex> g(err_mu);
                        if (!first_error) first_error = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            if (first_error) std::rethrow_exception(first_error);
        }

        std::vector<term_id> next;
        bool stop_hit = false;
        for (size_t i = 0; i < frontier.size(); ++i) {
            for (const transition& tr : layer_succ[i]) {
                auto [state, fresh] = index.emplace(tr.target, uint32_t(m.state_term.size()));
                if (fresh) {
                    if (m.state_term.size() >= lim.max_states)
                        throw bound_exceeded(
                            "state limit exceeded",
                            {m.num_states(), m.edges.size(), double(elapsed_ms()) / 1e3});
                    m.state_term.push_back(tr.target);
                    next.push_back(tr.target);
                }
                m.edges.push_back({tr.label, state});
                if (tr.label == lim.stop_at_label) stop_hit = true;
            }
            m.row.push_back(m.edges.size());
        }
        if (stop_hit) {
            // Give states discovered but not expanded an empty adjacency so the
            // compressed-row invariant (row.size == states+1) still holds.
            while (m.row.size() < m.state_term.size() + 1) m.row.push_back(m.edges.size());
            break;
        }
        frontier = std::move(next);
    }

    m.stats.states = m.num_states();
    m.stats.transitions = m.edges.size();
    m.stats.compile_seconds = double(elapsed_ms()) / 1e3;
    return m;
}

uint32_t dlts::next(uint32_t s, label_id l) const {
    auto es = out(s);
    auto it = std::lower_bound(es.begin(), es.end(), l,
                               [](const lts_edge& e, label_id v) { return e.label < v; });
    if (it != es.end() && it->label == l) return it->dst;
    return k_invalid;
}

namespace {

void tau_closure(const lts& m, std::vector<uint32_t>& set) {
    std::vector<uint32_t> stack(set.begin(), set.end());
    std::unordered_set<uint32_t> seen(set.begin(), set.end());
    while (!stack.empty()) {
        uint32_t s = stack.back();
        stack.pop_back();
        for (const lts_edge& e : m.out(s))
            if (e.label == k_label_tau && seen.insert(e.dst).second) stack.push_back(e.dst);
    }
    set.assign(seen.begin(), seen.end());
    std::sort(set.begin(), set.end());
}

uint64_t hash_u32_vec(const std::vector<uint32_t>& v) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (uint32_t x : v) {
        h ^= x;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

dlts determinize(const lts& m, uint64_t max_states) {
    dlts d;
    if (m.num_states() == 0) return d;

    std::vector<std::vector<uint32_t>> subsets;
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets; // hash -> subset ids

    auto intern = [&](std::vector<uint32_t> s) -> uint32_t {
        uint64_t h = hash_u32_vec(s);
        auto& b = buckets[h];
        for (uint32_t id : b)
            if (subsets[id] == s) return id;
        if (subsets.size() >= max_states)
            throw bound_exceeded("determinization state limit exceeded",
                                 {subsets.size(), d.edges.size(), 0.0});
        uint32_t id = uint32_t(subsets.size());
        subsets.push_back(std::move(s));
        b.push_back(id);
        return id;
    };

    std::vector<uint32_t> init{0};
    tau_closure(m, init);
    intern(std::move(init));

    d.row.push_back(0);
    for (uint32_t cur = 0; cur < subsets.size(); ++cur) {
        // Group member-state edges by observable label (termination included).
        std::vector<std::pair<label_id, uint32_t>> moves;
        for (uint32_t s : subsets[cur])
            for (const lts_edge& e : m.out(s))
                if (e.label != k_label_tau) moves.push_back({e.label, e.dst});
        std::sort(moves.begin(), moves.end());
        moves.erase(std::unique(moves.begin(), moves.end()), moves.end());
        for (size_t i = 0; i < moves.size();) {
            label_id l = moves[i].first;
            std::vector<uint32_t> tgt;
            while (i < moves.size() && moves[i].first == l) tgt.push_back(moves[i++].second);
            tau_closure(m, tgt);
            d.edges.push_back({l, intern(std::move(tgt))});
        }
        d.row.push_back(d.edges.size());
    }
    return d;
}

std::string lts_to_text(const lts& m, const context& ctx) {
    std::ostringstream os;
    os << "states " << m.num_states() << "\n";
    os << "transitions " << m.stats.transitions << "\n";
    for (uint32_t s = 0; s < m.num_states(); ++s) {
        os << s << ":";
        if (m.out(s).empty()) os << " -";
        for (const lts_edge& e : m.out(s)) os << " " << ctx.label_name(e.label) << ">" << e.dst;
        os << "\n";
    }
    return os.str();
}

std::string lts_to_json(const lts& m, const context& ctx) {
    nlohmann::json j;
    j["states"] = m.num_states();
    j["transitions"] = m.stats.transitions;
    j["initial"] = 0;
    nlohmann::json edges = nlohmann::json::array();
    for (uint32_t s = 0; s < m.num_states(); ++s)
        for (const lts_edge& e : m.out(s))
            edges.push_back({{"from", s}, {"label", ctx.label_name(e.label)}, {"to", e.dst}});
    j["edges"] = std::move(edges);
    return j.dump(2);
}

} // namespace tock
