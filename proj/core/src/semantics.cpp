#include "tock/semantics.hpp"

#include <algorithm>

namespace tock {

namespace {
void sort_unique(std::vector<transition>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}
// Call nodes currently being expanded on this thread; hitting one again while
// its own expansion is still in progress means the recursion reached itself
// without passing any transition, i.e. it is unguarded.
thread_local std::vector<term_id> g_expanding;
} // namespace

stepper::succ_list stepper::successors(term_id t) {
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = memo_.find(t);
        if (it != memo_.end()) return it->second;
    }
    auto list = std::make_shared<const std::vector<transition>>(compute(t));
    std::lock_guard<std::mutex> g(mu_);
    if (cache_limit_ && memo_.size() >= cache_limit_) memo_.clear();
    auto [it, inserted] = memo_.emplace(t, list);
    return it->second; // first writer wins; results are identical anyway
}

size_t stepper::cache_size() const {
    std::lock_guard<std::mutex> g(mu_);
    return memo_.size();
}

std::vector<label_id> stepper::initials(term_id t) {
    auto succ = successors(t);
    std::vector<label_id> out;
    for (const transition& tr : *succ)
        if (out.empty() || out.back() != tr.label) out.push_back(tr.label);
    return out;
}

std::vector<term_id> stepper::step(term_id t, label_id l) {
    auto succ = successors(t);
    std::vector<term_id> out;
    for (const transition& tr : *succ)
        if (tr.label == l) out.push_back(tr.target);
    return out;
}

bool stepper::may_terminate(term_id t) {
    auto succ = successors(t);
    for (const transition& tr : *succ)
        if (tr.label == k_label_term) return true;
    return false;
}

void stepper::tock_targets(const std::vector<transition>& succ, std::vector<term_id>& out) const {
    for (const transition& tr : succ)
        if (tr.label == k_label_tock) out.push_back(tr.target);
}

std::vector<transition> stepper::compute(term_id t) {
    context& c = ctx_;
    const term_node n = c.term(t);
    if (n.nfree != 0) throw kernel_error("cannot step an open process term");
    std::vector<transition> out;

    switch (n.op) {
    case term_op::skip:
        out.push_back({k_label_term, c.t_omega()});
        out.push_back({k_label_tock, t});
        break;
    case term_op::omega:
    case term_op::stop: out.push_back({k_label_tock, t}); break;
    case term_op::ustop: break; // refuses everything, including tock
    case term_op::wait:
        out.push_back({k_label_tock, c.t_wait(n.a - 1)});
        break;

    case term_op::prefix_out: {
        value v = c.eval(n.b, {});
        const auto& dom = c.channel_info(n.a).domain;
        if (std::find(dom.begin(), dom.end(), v) == dom.end())
            throw domain_error("emitted value outside domain of channel " +
                               c.channel_info(n.a).name);
        out.push_back({c.label(n.a, v), n.c});
        out.push_back({k_label_tock, t});
        break;
    }

    case term_op::prefix_in: {
        for (const value& v : c.channel_info(n.a).domain) {
            if (n.b != k_invalid && !c.eval(n.b, {&v, 1}).as_bool()) continue;
            out.push_back({c.label(n.a, v), c.subst1(n.c, v)});
        }
        out.push_back({k_label_tock, t});
        break;
    }

    case term_op::cond: throw kernel_error("cannot step an unresolved conditional");

    case term_op::ext_choice: {
        auto kids_span = c.choice_children(n);
        std::vector<term_id> kids(kids_span.begin(), kids_span.end());
        std::vector<std::vector<term_id>> tocks(kids.size());
        bool all_tock = true;
        for (size_t i = 0; i < kids.size(); ++i) {
            auto succ = successors(kids[i]);
            for (const transition& tr : *succ) {
                if (label_is_visible(tr.label)) {
                    out.push_back({tr.label, tr.target}); // visible event resolves
                } else if (tr.label == k_label_term) {
                    out.push_back({k_label_term, c.t_omega()}); // termination resolves
                } else if (tr.label == k_label_tau) {
                    std::vector<term_id> nk = kids;
                    nk[i] = tr.target; // internal step does not resolve the choice
                    out.push_back({k_label_tau, c.t_choice(std::move(nk))});
                }
            }
            tock_targets(*succ, tocks[i]);
            if (tocks[i].empty()) all_tock = false;
        }
        if (all_tock) {
            // Time advances in every branch at once; the choice stays open.
            size_t combos = 1;
            for (const auto& v : tocks) {
                combos *= v.size();
                if (combos > 4096) throw kernel_error("tock fan-out too large in choice");
            }
            std::vector<size_t> idx(kids.size(), 0);
            for (size_t k = 0; k < combos; ++k) {
                std::vector<term_id> nk(kids.size());
                for (size_t i = 0; i < kids.size(); ++i) nk[i] = tocks[i][idx[i]];
                out.push_back({k_label_tock, c.t_choice(std::move(nk))});
                for (size_t i = 0; i < kids.size(); ++i) {
                    if (++idx[i] < tocks[i].size()) break;
                    idx[i] = 0;
                }
            }
        }
        break;
    }

    case term_op::seq: {
        auto succ = successors(n.a);
        for (const transition& tr : *succ) {
            if (tr.label == k_label_term)
                out.push_back({k_label_tau, n.b}); // hand over to the continuation
            else
                out.push_back({tr.label, c.t_seq(tr.target, n.b)});
        }
        break;
    }

    case term_op::hide: {
        auto succ = successors(n.a);
        for (const transition& tr : *succ) {
            if (tr.label == k_label_term) {
                out.push_back({k_label_term, c.t_omega()});
            } else if (label_is_visible(tr.label) && c.label_in_set(tr.label, n.b)) {
                out.push_back({k_label_tau, c.t_hide(tr.target, n.b)});
            } else {
                out.push_back({tr.label, c.t_hide(tr.target, n.b)});
            }
        }
        break;
    }

    case term_op::project: {
        const bool keep_tock = c.set_info(n.b).has_tock;
        auto succ = successors(n.a);
        for (const transition& tr : *succ) {
            if (tr.label == k_label_term) {
                out.push_back({k_label_term, c.t_omega()});
            } else if (tr.label == k_label_tau) {
                out.push_back({k_label_tau, c.t_project(tr.target, n.b)});
            } else if (tr.label == k_label_tock) {
                out.push_back({keep_tock ? k_label_tock : k_label_tau,
                               c.t_project(tr.target, n.b)});
            } else if (c.label_in_set(tr.label, n.b)) {
                out.push_back({tr.label, c.t_project(tr.target, n.b)});
            } else {
                out.push_back({k_label_tau, c.t_project(tr.target, n.b)});
            }
        }
        break;
    }

    case term_op::parallel: {
        auto ls = successors(n.a);
        auto rs = successors(n.c);
        bool lterm = false, rterm = false;
        for (const transition& tr : *ls) {
            if (tr.label == k_label_term) {
                lterm = true;
            } else if (tr.label == k_label_tau ||
                       (label_is_visible(tr.label) && !c.label_in_set(tr.label, n.b))) {
                out.push_back({tr.label, c.t_parallel(tr.target, n.b, n.c)});
            }
        }
        for (const transition& tr : *rs) {
            if (tr.label == k_label_term) {
                rterm = true;
            } else if (tr.label == k_label_tau ||
                       (label_is_visible(tr.label) && !c.label_in_set(tr.label, n.b))) {
                out.push_back({tr.label, c.t_parallel(n.a, n.b, tr.target)});
            }
        }
        // Synchronized labels: events in the interface set, tock always, and
        // termination (both sides must be able to terminate together).
        for (const transition& lt : *ls) {
            bool sync = lt.label == k_label_tock ||
                        (label_is_visible(lt.label) && c.label_in_set(lt.label, n.b));
            if (!sync) continue;
            for (const transition& rt : *rs)
                if (rt.label == lt.label)
                    out.push_back({lt.label, c.t_parallel(lt.target, n.b, rt.target)});
        }
        if (lterm && rterm) out.push_back({k_label_term, c.t_omega()});
        break;
    }

    case term_op::rename_t: {
        auto succ = successors(n.a);
        for (const transition& tr : *succ) {
            term_id tgt = c.t_rename(tr.target, n.b);
            if (tr.label == k_label_term) {
                out.push_back({k_label_term, c.t_omega()});
            } else if (!label_is_visible(tr.label)) {
                out.push_back({tr.label, tgt});
            } else {
                auto targets = c.rename_targets(n.b, c.label_channel(tr.label));
                if (targets.empty()) {
                    out.push_back({tr.label, tgt});
                } else {
                    const value& v = c.label_value(tr.label);
                    for (chan_id to : targets) out.push_back({c.label(to, v), tgt});
                }
            }
        }
        break;
    }

    case term_op::interrupt: {
        auto bs = successors(n.a);
        auto hs = successors(n.b);
        std::vector<term_id> btocks, htocks;
        for (const transition& tr : *bs) {
            if (tr.label == k_label_term)
                out.push_back({k_label_term, c.t_omega()}); // body termination wins
            else if (tr.label != k_label_tock)
                out.push_back({tr.label, c.t_interrupt(tr.target, n.b)});
        }
        for (const transition& tr : *hs) {
            if (tr.label == k_label_term)
                out.push_back({k_label_term, c.t_omega()});
            else if (tr.label == k_label_tau)
                out.push_back({k_label_tau, c.t_interrupt(n.a, tr.target)});
            else if (label_is_visible(tr.label))
                out.push_back({tr.label, tr.target}); // handover: body is discarded
        }
        tock_targets(*bs, btocks);
        tock_targets(*hs, htocks);
        for (term_id bt : btocks)
            for (term_id ht : htocks)
                out.push_back({k_label_tock, c.t_interrupt(bt, ht)});
        break;
    }

    case term_op::exception: {
        auto succ = successors(n.a);
        for (const transition& tr : *succ) {
            if (tr.label == k_label_term) {
                out.push_back({k_label_term, c.t_omega()});
            } else if (label_is_visible(tr.label) && c.label_in_set(tr.label, n.b)) {
                out.push_back({tr.label, n.c}); // the event occurs, then the handler runs
            } else {
                out.push_back({tr.label, c.t_exception(tr.target, n.b, n.c)});
            }
        }
        break;
    }

    case term_op::call: {
        for (term_id e : g_expanding)
            if (e == t)
                throw unguarded_recursion_error("unguarded recursion expanding " +
                                                c.def_info(n.a).name);
        const process_def& d = c.def_info(n.a);
        if (d.body == k_invalid)
            throw kernel_error("process " + d.name + " has no body");
        auto args = c.call_args(n);
        // Parameter i is de Bruijn var (arity - 1 - i): reverse into frame order.
        std::vector<value> frame;
        frame.reserve(args.size());
        for (size_t i = args.size(); i-- > 0;) frame.push_back(c.eval(args[i], {}));
        term_id body = c.subst_term(d.body, 0, frame);
        g_expanding.push_back(t);
        try {
            auto succ = successors(body);
            g_expanding.pop_back();
            return *succ;
        } catch (...) {
            g_expanding.pop_back();
            throw;
        }
    }

    case term_op::timed_priority: {
        auto succ = successors(n.a);
        bool urgent = false;
        for (const transition& tr : *succ)
            if (tr.label == k_label_tau || tr.label == k_label_term) urgent = true;
        for (const transition& tr : *succ) {
            if (tr.label == k_label_tock && urgent) continue; // maximal progress
            if (tr.label == k_label_term)
                out.push_back({k_label_term, c.t_omega()});
            else
                out.push_back({tr.label, c.t_timed_priority(tr.target)});
        }
        break;
    }

    case term_op::trun: {
        const auto& data = c.set_info(n.a);
        for (const set_item& it : data.items) {
            if (it.val == k_invalid) {
                for (const value& v : c.channel_info(it.chan).domain)
                    out.push_back({c.label(it.chan, v), t});
            } else {
                out.push_back({c.label(it.chan, it.val), t});
            }
        }
        out.push_back({k_label_tock, t});
        break;
    }

    case term_op::cell: {
        const cell_state st = c.cell_info(n);
        if (st.flags & k_cell_open)
            for (const value& v : c.channel_info(n.a).domain)
                out.push_back({c.label(n.a, v), c.with_cell_state(n, c.intern_value(v), 0)});
        out.push_back({c.label(n.b, st.val), t}); // reads do not consume
        out.push_back({k_label_tock, c.with_cell_state(n, st.val, k_cell_open)});
        break;
    }

    case term_op::presence_cell: {
        const uint32_t fl = n.c;
        if (fl & k_cell_open)
            for (const value& v : c.channel_info(n.a).domain)
                out.push_back({c.label(n.a, v),
                               c.with_cell_state(n, 0, k_cell_full)}); // gate closes
        if (fl & k_cell_full)
            out.push_back(
                {c.unit_label(n.b), c.with_cell_state(n, 0, fl & ~k_cell_full)}); // consumed
        out.push_back({k_label_tock, c.with_cell_state(n, 0, fl | k_cell_open)});
        break;
    }
    }

    sort_unique(out);
    return out;
}

} // namespace tock
