#include "tock/context.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tock {

uint64_t hash_term_node(const term_node& n); // context.cpp
uint64_t hash_mix(uint64_t h, uint64_t v);   // context.cpp

// Plain nodes are deduplicated by raw field equality. ext_choice and call
// nodes carry arena offsets and go through the content-aware paths in
// t_choice / t_call instead, so two structurally equal nodes never differ
// just because their child lists were appended at different offsets.
term_id context::intern_term(term_node n) {
    uint64_t h = hash_term_node(n);
    std::lock_guard<std::mutex> g(term_mu_);
    uint32_t fresh = uint32_t(terms_.size());
    term_id id = term_index_.find_or_insert(
        h, fresh, [&](uint32_t cand) { return terms_[cand] == n; },
        [&](uint32_t cand) { return term_content_hash(terms_[cand]); });
    if (id == fresh) terms_.push_back(n);
    return id;
}

// Child lists live in a chunked arena; pad so a list never straddles a chunk
// boundary, keeping std::span views valid while other threads append.
uint32_t context::push_children(std::span<const term_id> kids) {
    constexpr size_t chunk = size_t(1) << 16;
    if ((child_arena_.size() & (chunk - 1)) + kids.size() > chunk)
        while (child_arena_.size() & (chunk - 1)) child_arena_.push_back(k_invalid);
    size_t off = child_arena_.size();
    for (term_id k : kids) child_arena_.push_back(k);
    return uint32_t(off);
}

uint16_t context::term_nfree(const term_node& n) const {
    auto tf = [&](term_id t) { return terms_[t].nfree; };
    auto ef = [&](expr_id e) { return exprs_[e].nfree; };
    auto drop1 = [](uint16_t nf) { return uint16_t(nf > 0 ? nf - 1 : 0); };
    switch (n.op) {
    case term_op::skip:
    case term_op::stop:
    case term_op::ustop:
    case term_op::omega:
    case term_op::wait:
    case term_op::trun:
    case term_op::cell:
    case term_op::presence_cell: return 0;
    case term_op::prefix_out: return std::max(ef(n.b), tf(n.c));
    case term_op::prefix_in: {
        uint16_t p = n.b == k_invalid ? 0 : drop1(ef(n.b));
        return std::max(p, drop1(tf(n.c)));
    }
    case term_op::cond: return std::max({ef(n.a), tf(n.b), tf(n.c)});
    case term_op::ext_choice: {
        uint16_t m = 0;
        for (uint32_t i = 0; i < n.b; ++i) m = std::max(m, tf(child_arena_[n.a + i]));
        return m;
    }
    case term_op::seq: return std::max(tf(n.a), tf(n.b));
    case term_op::hide:
    case term_op::project:
    case term_op::rename_t:
    case term_op::timed_priority: return tf(n.a);
    case term_op::parallel: return std::max(tf(n.a), tf(n.c));
    case term_op::interrupt: return std::max(tf(n.a), tf(n.b));
    case term_op::exception: return std::max(tf(n.a), tf(n.c));
    case term_op::call: {
        uint16_t m = 0;
        for (uint32_t i = 0; i < n.c; ++i) m = std::max(m, ef(expr_arg_arena_[n.b + i]));
        return m;
    }
    }
    return 0;
}

term_id context::t_skip() { return cached_skip_; }
term_id context::t_omega() { return cached_omega_; }
term_id context::t_stop() { return cached_stop_; }
term_id context::t_ustop() { return cached_ustop_; }

term_id context::t_wait(uint32_t ticks) {
    if (ticks == 0) return cached_skip_;
    return intern_term({term_op::wait, 0, ticks, 0, 0});
}

term_id context::t_prefix_out(chan_id c, expr_id val, term_id cont) {
    if (c >= channels_.size()) throw unbound_name_error("prefix on unknown channel");
    // No domain validation here even for closed expressions: substitution can
    // rebuild dead conditional branches whose (never-emitted) value falls
    // outside the channel domain. Emission is checked by the stepper instead.
    uint16_t nf = std::max(exprs_[val].nfree, terms_[cont].nfree);
    return intern_term({term_op::prefix_out, nf, c, val, cont});
}

term_id context::t_prefix_out(chan_id c, const value& v, term_id cont) {
    if (c >= channels_.size()) throw unbound_name_error("prefix on unknown channel");
    const auto& dom = channels_[c].domain;
    if (std::find(dom.begin(), dom.end(), v) == dom.end())
        throw domain_error("value outside domain of channel " + channels_[c].name);
    return t_prefix_out(c, e_const(v), cont);
}

term_id context::t_event(chan_id c, term_id cont) {
    return t_prefix_out(c, value::unit_v(), cont);
}

term_id context::t_prefix_in(chan_id c, expr_id pred, term_id cont) {
    if (c >= channels_.size()) throw unbound_name_error("prefix on unknown channel");
    auto drop1 = [](uint16_t nf) { return uint16_t(nf > 0 ? nf - 1 : 0); };
    uint16_t p = pred == k_invalid ? 0 : drop1(exprs_[pred].nfree);
    uint16_t nf = std::max(p, drop1(terms_[cont].nfree));
    return intern_term({term_op::prefix_in, nf, c, pred, cont});
}

term_id context::t_cond(expr_id guard, term_id then_t, term_id else_t) {
    const expr_node& g = exprs_[guard];
    if (g.nfree == 0) return eval(guard, {}).as_bool() ? then_t : else_t;
    uint16_t nf = std::max({g.nfree, terms_[then_t].nfree, terms_[else_t].nfree});
    return intern_term({term_op::cond, nf, guard, then_t, else_t});
}

term_id context::t_choice(std::vector<term_id> children) {
    // Flatten nested choices, deduplicate and sort: external choice is
    // associative, commutative and idempotent, so this canonical form is
    // semantics-preserving and maximizes sharing.
    std::vector<term_id> flat;
    flat.reserve(children.size());
    for (size_t i = 0; i < children.size(); ++i) {
        term_id c = children[i];
        const term_node& n = terms_[c];
        if (n.op == term_op::ext_choice) {
            for (uint32_t j = 0; j < n.b; ++j) children.push_back(child_arena_[n.a + j]);
        } else {
            flat.push_back(c);
        }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return cached_stop_;
    if (flat.size() == 1) return flat[0];
    uint16_t nf = 0;
    for (term_id c : flat) nf = std::max(nf, terms_[c].nfree);
    uint64_t h = hash_mix(0xc2b2ae3d27d4eb4full, uint64_t(term_op::ext_choice));
    for (term_id c : flat) h = hash_mix(h, c);
    std::lock_guard<std::mutex> g(term_mu_);
    auto same_choice = [&](uint32_t cand) {
        const term_node& n = terms_[cand];
        if (n.op != term_op::ext_choice || n.b != flat.size()) return false;
        for (uint32_t i = 0; i < n.b; ++i)
            if (child_arena_[n.a + i] != flat[i]) return false;
        return true;
    };
    uint32_t fresh = uint32_t(terms_.size());
    term_id id = term_index_.find_or_insert(
        h, fresh, same_choice,
        [&](uint32_t cand) { return term_content_hash(terms_[cand]); });
    if (id == fresh) {
        uint32_t off = push_children(flat);
        terms_.push_back({term_op::ext_choice, nf, off, uint32_t(flat.size()), 0});
    }
    return id;
}

term_id context::t_seq(term_id l, term_id r) {
    uint16_t nf = std::max(terms_[l].nfree, terms_[r].nfree);
    return intern_term({term_op::seq, nf, l, r, 0});
}

term_id context::t_seq(std::initializer_list<term_id> steps) {
    if (steps.size() == 0) throw kernel_error("empty sequential composition");
    auto it = steps.end();
    term_id acc = *--it;
    while (it != steps.begin()) acc = t_seq(*--it, acc);
    return acc;
}

term_id context::t_hide(term_id t, set_id s) {
    if (sets_[s].has_tock) throw kernel_error("the tock event cannot be hidden");
    const term_node& n = terms_[t];
    if (sets_[s].items.empty()) return t;
    if (n.op == term_op::skip || n.op == term_op::stop || n.op == term_op::ustop ||
        n.op == term_op::omega)
        return t;
    // Same-set hiding is idempotent: the inner layer emits none of the hidden
    // labels, so another layer is a no-op wrapper. Collapsing it keeps a
    // recursion written through its own hiding from growing a wrapper per
    // unfolding.
    if (n.op == term_op::hide && n.b == s) return t;
    return intern_term({term_op::hide, n.nfree, t, s, 0});
}

term_id context::t_project(term_id t, set_id s) {
    const term_node& n = terms_[t];
    if (sets_[s].has_tock && (n.op == term_op::skip || n.op == term_op::stop ||
                              n.op == term_op::ustop || n.op == term_op::omega))
        return t;
    if (n.op == term_op::project && n.b == s) return t; // idempotent, as for hiding
    return intern_term({term_op::project, n.nfree, t, s, 0});
}

term_id context::t_parallel(term_id l, set_id sync, term_id r) {
    if (r < l) std::swap(l, r); // symmetric operator: canonical child order
    uint16_t nf = std::max(terms_[l].nfree, terms_[r].nfree);
    return intern_term({term_op::parallel, nf, l, sync, r});
}

term_id context::t_interleave(term_id l, term_id r) {
    return t_parallel(l, make_event_set(false, {}), r);
}

term_id context::t_rename(term_id t, rel_id r) {
    const term_node& n = terms_[t];
    if (rels_[r].empty()) return t;
    if (n.op == term_op::skip || n.op == term_op::stop || n.op == term_op::ustop ||
        n.op == term_op::omega)
        return t;
    return intern_term({term_op::rename_t, n.nfree, t, r, 0});
}

term_id context::t_interrupt(term_id body, term_id handler) {
    uint16_t nf = std::max(terms_[body].nfree, terms_[handler].nfree);
    return intern_term({term_op::interrupt, nf, body, handler, 0});
}

term_id context::t_exception(term_id body, set_id throws, term_id handler) {
    if (sets_[throws].has_tock) throw kernel_error("the tock event cannot be thrown");
    uint16_t nf = std::max(terms_[body].nfree, terms_[handler].nfree);
    return intern_term({term_op::exception, nf, body, throws, handler});
}

term_id context::t_call(def_id d, std::span<const expr_id> args) {
    if (d >= defs_.size()) throw unbound_name_error("unknown process definition id");
    if (defs_[d].arity != args.size())
        throw kernel_error("arity mismatch calling " + defs_[d].name);
    uint16_t nf = 0;
    for (expr_id a : args) nf = std::max(nf, exprs_[a].nfree);
    uint64_t h = hash_mix(0x27d4eb2f165667c5ull, uint64_t(d));
    for (expr_id a : args) h = hash_mix(h, a);
    // Lock order when both are needed is term_mu_ then expr_mu_ (push_arg_exprs
    // has its callers hold expr_mu_; here the nested acquisition is explicit).
    std::lock_guard<std::mutex> g(term_mu_);
    auto same_call = [&](uint32_t cand) {
        const term_node& n = terms_[cand];
        if (n.op != term_op::call || n.a != d || n.c != args.size()) return false;
        for (uint32_t i = 0; i < n.c; ++i)
            if (expr_arg_arena_[n.b + i] != args[i]) return false;
        return true;
    };
    uint32_t fresh = uint32_t(terms_.size());
    term_id id = term_index_.find_or_insert(
        h, fresh, same_call,
        [&](uint32_t cand) { return term_content_hash(terms_[cand]); });
    if (id == fresh) {
        uint32_t off;
        {
            std::lock_guard<std::mutex> g2(expr_mu_);
            off = push_arg_exprs(args);
        }
        terms_.push_back({term_op::call, nf, d, off, uint32_t(args.size())});
    }
    return id;
}

term_id context::t_call_v(def_id d, std::span<const value> args) {
    std::vector<expr_id> es;
    es.reserve(args.size());
    for (const value& v : args) es.push_back(e_const(v));
    return t_call(d, es);
}

term_id context::t_timed_priority(term_id t) {
    const term_node& n = terms_[t];
    if (n.op == term_op::timed_priority) return t;
    return intern_term({term_op::timed_priority, n.nfree, t, 0, 0});
}

term_id context::t_trun(set_id s) { return intern_term({term_op::trun, 0, s, 0, 0}); }

term_id context::t_cell(chan_id write_c, chan_id read_c, const value& initial) {
    if (write_c >= channels_.size() || read_c >= channels_.size())
        throw unbound_name_error("cell over unknown channel");
    const auto& dom = channels_[write_c].domain;
    if (std::find(dom.begin(), dom.end(), initial) == dom.end())
        throw domain_error("cell initial value outside domain of " + channels_[write_c].name);
    // Values flow from the write channel to the read channel unchanged.
    const auto& rdom = channels_[read_c].domain;
    for (const value& v : dom)
        if (std::find(rdom.begin(), rdom.end(), v) == rdom.end())
            throw domain_error("cell read channel " + channels_[read_c].name +
                               " cannot carry every value of " + channels_[write_c].name);
    uint32_t st = intern_cell_state({intern_value(initial), k_cell_open});
    return intern_term({term_op::cell, 0, write_c, read_c, st});
}

term_id context::t_presence_cell(chan_id write_c, chan_id read_c) {
    if (write_c >= channels_.size() || read_c >= channels_.size())
        throw unbound_name_error("cell over unknown channel");
    // A presence cell records that a signal arrived, not its value, so reads
    // are plain (unit) events.
    const auto& rdom = channels_[read_c].domain;
    if (rdom.size() != 1 || rdom[0].kind != value_kind::unit)
        throw domain_error("presence cell read channel must be a plain event channel");
    return intern_term({term_op::presence_cell, 0, write_c, read_c, k_cell_open});
}

term_id context::t_end_by(term_id p, uint32_t d) {
    // A zero deadline needs the timelock handler immediately; routing through
    // WAIT(0) would only add an internal resolution step to every state.
    if (d == 0) return t_interrupt(p, t_ustop());
    return t_interrupt(p, t_seq(t_wait(d), t_ustop()));
}

term_id context::t_action_deadline(set_id s, set_id e, uint32_t d) {
    // The run-process must offer the deadline events too, or they could never
    // be caught: build TRUN over the union of both sets.
    std::vector<set_item> items = sets_[s].items;
    const auto& ei = sets_[e].items;
    items.insert(items.end(), ei.begin(), ei.end());
    set_id u = make_event_set(sets_[s].has_tock || sets_[e].has_tock, std::move(items));
    return t_exception(t_end_by(t_trun(u), d), e, t_skip());
}

std::span<const term_id> context::choice_children(const term_node& n) const {
    return {&child_arena_[n.a], n.b};
}

std::span<const expr_id> context::call_args(const term_node& n) const {
    if (n.c == 0) return {};
    return {&expr_arg_arena_[n.b], n.c};
}

term_id context::with_cell_state(const term_node& n, value_id v, uint32_t flags) {
    if (n.op == term_op::cell) {
        uint32_t st = intern_cell_state({v, flags});
        return intern_term({term_op::cell, 0, n.a, n.b, st});
    }
    return intern_term({term_op::presence_cell, 0, n.a, n.b, flags});
}

namespace {
// Memoized on (term, level): hash-consing makes subterm sharing common, and
// the substituted values are fixed for the whole traversal.
struct subst_walker {
    context& ctx;
    std::span<const value> vals;
    std::unordered_map<uint64_t, term_id> memo;

    term_id go(term_id t, uint32_t level) {
        const term_node& n = ctx.term(t);
        if (n.nfree <= level) return t;
        uint64_t key = (uint64_t(level) << 32) | t;
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        term_id out = rebuild(n, level);
        memo.emplace(key, out);
        return out;
    }

    term_id rebuild(const term_node& n, uint32_t level) {
        switch (n.op) {
        case term_op::prefix_out:
            return ctx.t_prefix_out(n.a, ctx.subst_expr(n.b, level, vals), go(n.c, level));
        case term_op::prefix_in: {
            expr_id p = n.b == k_invalid ? k_invalid : ctx.subst_expr(n.b, level + 1, vals);
            return ctx.t_prefix_in(n.a, p, go(n.c, level + 1));
        }
        case term_op::cond:
            return ctx.t_cond(ctx.subst_expr(n.a, level, vals), go(n.b, level),
                              go(n.c, level));
        case term_op::ext_choice: {
            auto span = ctx.choice_children(n);
            std::vector<term_id> kids(span.begin(), span.end());
            for (term_id& k : kids) k = go(k, level);
            return ctx.t_choice(std::move(kids));
        }
        case term_op::seq: return ctx.t_seq(go(n.a, level), go(n.b, level));
        case term_op::hide: return ctx.t_hide(go(n.a, level), n.b);
        case term_op::project: return ctx.t_project(go(n.a, level), n.b);
        case term_op::parallel: return ctx.t_parallel(go(n.a, level), n.b, go(n.c, level));
        case term_op::rename_t: return ctx.t_rename(go(n.a, level), n.b);
        case term_op::interrupt: return ctx.t_interrupt(go(n.a, level), go(n.b, level));
        case term_op::exception:
            return ctx.t_exception(go(n.a, level), n.b, go(n.c, level));
        case term_op::call: {
            auto args = ctx.call_args(n);
            std::vector<expr_id> es(args.begin(), args.end());
            for (expr_id& e : es) e = ctx.subst_expr(e, level, vals);
            return ctx.t_call(n.a, es);
        }
        case term_op::timed_priority: return ctx.t_timed_priority(go(n.a, level));
        default: throw kernel_error("substitution reached a closed leaf"); // unreachable
        }
    }
};
} // namespace

term_id context::subst_term(term_id t, uint32_t level, std::span<const value> db_vals) {
    subst_walker w{*this, db_vals, {}};
    return w.go(t, level);
}

namespace {
struct structure_walker {
    const context& ctx;
    // Memo key couples the subterm with the signature of the enclosing
    // synchronized-channel stack, since the hidden-vs-synchronized conflict
    // is path sensitive.
    std::unordered_set<uint64_t> seen;
    std::vector<chan_id> sync_channels; // multiset as a stack

    uint64_t sig(term_id t) const {
        uint64_t h = t;
        for (chan_id c : sync_channels) h = hash_mix(h, c);
        return h;
    }

    void walk(term_id t) {
        if (!seen.insert(sig(t)).second) return;
        const term_node& n = ctx.term(t);
        switch (n.op) {
        case term_op::skip:
        case term_op::stop:
        case term_op::ustop:
        case term_op::omega:
        case term_op::wait:
        case term_op::trun:
        case term_op::cell:
        case term_op::presence_cell: return;
        case term_op::prefix_out: walk(n.c); return;
        case term_op::prefix_in: walk(n.c); return;
        case term_op::cond:
            walk(n.b);
            walk(n.c);
            return;
        case term_op::ext_choice:
            for (term_id k : ctx.choice_children(n)) walk(k);
            return;
        case term_op::seq:
        case term_op::interrupt:
            walk(n.a);
            walk(n.b);
            return;
        case term_op::hide: {
            for (const set_item& it : ctx.set_info(n.b).items)
                for (chan_id c : sync_channels)
                    if (c == it.chan)
                        throw kernel_error(
                            "channel " + ctx.channel_info(it.chan).name +
                            " is hidden inside a composition that synchronizes on it");
            walk(n.a);
            return;
        }
        case term_op::project: walk(n.a); return;
        case term_op::parallel: {
            size_t base = sync_channels.size();
            for (const set_item& it : ctx.set_info(n.b).items) sync_channels.push_back(it.chan);
            walk(n.a);
            walk(n.c);
            sync_channels.resize(base); // duplicates on the stack are harmless
            return;
        }
        case term_op::rename_t: walk(n.a); return;
        case term_op::exception:
            walk(n.a);
            walk(n.c);
            return;
        case term_op::call: {
            const process_def& d = ctx.def_info(n.a);
            if (d.body == k_invalid)
                throw kernel_error("process " + d.name + " is declared but has no body");
            walk(d.body);
            return;
        }
        case term_op::timed_priority: walk(n.a); return;
        }
    }
};
} // namespace

void context::check_structure(term_id root) const {
    structure_walker w{*this, {}, {}};
    w.walk(root);
}

std::string context::render_term(term_id t) const {
    const term_node& n = terms_[t];
    std::ostringstream os;
    auto set_str = [&](set_id s) {
        std::ostringstream ss;
        ss << "{";
        bool first = true;
        if (sets_[s].has_tock) {
            ss << "tock";
            first = false;
        }
        for (const set_item& it : sets_[s].items) {
            if (!first) ss << ",";
            first = false;
            ss << channels_[it.chan].name;
            if (it.val != k_invalid) ss << "." << value_table_[it.val].payload;
        }
        ss << "}";
        return ss.str();
    };
    switch (n.op) {
    case term_op::skip: return "SKIP";
    case term_op::stop: return "STOP";
    case term_op::ustop: return "USTOP";
    case term_op::omega: return "OMEGA";
    case term_op::wait: os << "WAIT(" << n.a << ")"; break;
    case term_op::prefix_out:
        os << channels_[n.a].name << "!<e" << n.b << "> -> " << render_term(n.c);
        break;
    case term_op::prefix_in: os << channels_[n.a].name << "?x -> " << render_term(n.c); break;
    case term_op::cond:
        os << "if <e" << n.a << "> then " << render_term(n.b) << " else " << render_term(n.c);
        break;
    case term_op::ext_choice: {
        os << "(";
        bool first = true;
        for (term_id k : choice_children(n)) {
            if (!first) os << " [] ";
            first = false;
            os << render_term(k);
        }
        os << ")";
        break;
    }
    case term_op::seq: os << "(" << render_term(n.a) << " ; " << render_term(n.b) << ")"; break;
    case term_op::hide: os << "(" << render_term(n.a) << " \\ " << set_str(n.b) << ")"; break;
    case term_op::project:
        os << "(" << render_term(n.a) << " |\\ " << set_str(n.b) << ")";
        break;
    case term_op::parallel:
        os << "(" << render_term(n.a) << " [|" << set_str(n.b) << "|] " << render_term(n.c)
           << ")";
        break;
    case term_op::rename_t: os << "(" << render_term(n.a) << ")[[r" << n.b << "]]"; break;
    case term_op::interrupt:
        os << "(" << render_term(n.a) << " /\\ " << render_term(n.b) << ")";
        break;
    case term_op::exception:
        os << "(" << render_term(n.a) << " [|" << set_str(n.b) << "|> " << render_term(n.c)
           << ")";
        break;
    case term_op::call: {
        os << defs_[n.a].name;
        if (n.c > 0) {
            os << "(";
            for (uint32_t i = 0; i < n.c; ++i) os << (i ? "," : "") << "<e"
                                                  << expr_arg_arena_[n.b + i] << ">";
            os << ")";
        }
        break;
    }
    case term_op::timed_priority: os << "timed_priority(" << render_term(n.a) << ")"; break;
    case term_op::trun: os << "TRUN(" << set_str(n.a) << ")"; break;
    case term_op::cell:
        os << "cell(" << channels_[n.a].name << "," << channels_[n.b].name << ")";
        break;
    case term_op::presence_cell:
        os << "pcell(" << channels_[n.a].name << "," << channels_[n.b].name << ")";
        break;
    }
    return os.str();
}

} // namespace tock
