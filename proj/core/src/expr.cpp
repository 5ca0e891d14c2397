#include "tock/context.hpp"

#include <algorithm>
#include <vector>

namespace tock {

uint64_t hash_expr_node(const expr_node& n); // context.cpp
uint64_t hash_mix(uint64_t h, uint64_t v);   // context.cpp

expr_id context::intern_expr(expr_node n) {
    uint64_t h = hash_expr_node(n);
    std::lock_guard<std::mutex> g(expr_mu_);
    uint32_t fresh = uint32_t(exprs_.size());
    expr_id id = expr_index_.find_or_insert(
        h, fresh, [&](uint32_t cand) { return exprs_[cand] == n; },
        [&](uint32_t cand) { return expr_content_hash(exprs_[cand]); });
    if (id == fresh) exprs_.push_back(n);
    return id;
}

// Argument lists live in a chunked arena; pad so that a list never straddles a
// chunk boundary, keeping std::span views valid while other threads append.
uint32_t context::push_arg_exprs(std::span<const expr_id> args) {
    constexpr size_t chunk = size_t(1) << 16;
    if ((expr_arg_arena_.size() & (chunk - 1)) + args.size() > chunk)
        while (expr_arg_arena_.size() & (chunk - 1)) expr_arg_arena_.push_back(k_invalid);
    size_t off = expr_arg_arena_.size();
    for (expr_id a : args) expr_arg_arena_.push_back(a);
    return uint32_t(off);
}

expr_id context::e_const(const value& v) {
    return intern_expr({expr_op::constant, 0, intern_value(v), 0, 0});
}

expr_id context::e_var(uint32_t db_index) {
    return intern_expr({expr_op::variable, uint16_t(db_index + 1), db_index, 0, 0});
}

expr_id context::e_apply(func_id f, std::span<const expr_id> args) {
    if (f >= funcs_.size()) throw unbound_name_error("unknown function id");
    const func_decl& fd = funcs_[f];
    if (fd.arity != args.size()) throw kernel_error("arity mismatch applying " + fd.name);
    uint16_t nf = 0;
    for (expr_id a : args) nf = std::max(nf, exprs_[a].nfree);
    if (nf == 0) {
        // Closed application: fold to the result now rather than interning it.
        std::vector<value> vals;
        vals.reserve(args.size());
        for (expr_id a : args) vals.push_back(eval(a, {}));
        if (fd.native) return e_const(fd.native(vals));
        std::vector<value> frame(vals.rbegin(), vals.rend());
        return e_const(eval(fd.body, frame));
    }
    // Applications are deduplicated by argument-list content, not by arena
    // offset; the list is appended to the arena only when the node is new.
    uint64_t h = hash_mix(0x9e3779b97f4a7c15ull, uint64_t(f));
    for (expr_id a : args) h = hash_mix(h, a);
    std::lock_guard<std::mutex> g(expr_mu_);
    auto same_apply = [&](uint32_t cand) {
        const expr_node& n = exprs_[cand];
        if (n.op != expr_op::apply || n.a != f || n.c != args.size()) return false;
        for (uint32_t i = 0; i < n.c; ++i)
            if (expr_arg_arena_[n.b + i] != args[i]) return false;
        return true;
    };
    uint32_t fresh = uint32_t(exprs_.size());
    expr_id id = expr_index_.find_or_insert(
        h, fresh, same_apply,
        [&](uint32_t cand) { return expr_content_hash(exprs_[cand]); });
    if (id == fresh) {
        uint32_t off = push_arg_exprs(args);
        exprs_.push_back({expr_op::apply, nf, f, off, uint32_t(args.size())});
    }
    return id;
}

expr_id context::e_bin(bin_op op, expr_id l, expr_id r) {
    uint16_t nf = std::max(exprs_[l].nfree, exprs_[r].nfree);
    expr_id id = intern_expr({expr_op::binary, nf, uint32_t(op), l, r});
    if (nf == 0) return e_const(eval(id, {}));
    return id;
}

expr_id context::e_not(expr_id e) {
    uint16_t nf = exprs_[e].nfree;
    expr_id id = intern_expr({expr_op::negate, nf, e, 0, 0});
    if (nf == 0) return e_const(eval(id, {}));
    return id;
}

value context::eval(expr_id e, std::span<const value> bindings) const {
    const expr_node& n = exprs_[e];
    switch (n.op) {
    case expr_op::constant: return value_table_[n.a];
    case expr_op::variable:
        if (n.a >= bindings.size()) throw eval_error("unbound variable in expression");
        return bindings[n.a];
    case expr_op::apply: {
        const func_decl& f = funcs_[n.a];
        std::vector<value> args;
        args.reserve(n.c);
        for (uint32_t i = 0; i < n.c; ++i) args.push_back(eval(expr_arg_arena_[n.b + i], bindings));
        if (f.native) return f.native(args);
        // Parameter i of an expression-bodied function is de Bruijn var
        // (arity - 1 - i) inside the body, i.e. parameter 0 is outermost.
        std::vector<value> frame(args.rbegin(), args.rend());
        return eval(f.body, frame);
    }
    case expr_op::binary: {
        bin_op op = bin_op(n.a);
        value l = eval(n.b, bindings);
        if (op == bin_op::logical_and)
            return value::of_bool(l.as_bool() && eval(n.c, bindings).as_bool());
        if (op == bin_op::logical_or)
            return value::of_bool(l.as_bool() || eval(n.c, bindings).as_bool());
        value r = eval(n.c, bindings);
        switch (op) {
        case bin_op::eq: return value::of_bool(l == r);
        case bin_op::ne: return value::of_bool(l != r);
        case bin_op::lt: return value::of_bool(l.as_int() < r.as_int());
        case bin_op::le: return value::of_bool(l.as_int() <= r.as_int());
        case bin_op::gt: return value::of_bool(l.as_int() > r.as_int());
        case bin_op::ge: return value::of_bool(l.as_int() >= r.as_int());
        case bin_op::add: return value::of_int(l.as_int() + r.as_int());
        case bin_op::sub: return value::of_int(l.as_int() - r.as_int());
        default: throw eval_error("bad binary operator");
        }
    }
    case expr_op::negate: return value::of_bool(!eval(n.a, bindings).as_bool());
    }
    throw eval_error("bad expression node");
}

expr_id context::subst_expr(expr_id e, uint32_t level, std::span<const value> db_vals) {
    const expr_node& n = exprs_[e];
    if (n.nfree <= level) return e; // nothing at or above `level` is free here
    switch (n.op) {
    case expr_op::constant: return e;
    case expr_op::variable: {
        uint32_t idx = n.a;
        if (idx < level) return e;
        if (idx < level + db_vals.size()) return e_const(db_vals[idx - level]);
        return e_var(idx - uint32_t(db_vals.size()));
    }
    case expr_op::apply: {
        std::vector<expr_id> args;
        args.reserve(n.c);
        for (uint32_t i = 0; i < n.c; ++i)
            args.push_back(subst_expr(expr_arg_arena_[n.b + i], level, db_vals));
        return e_apply(n.a, args);
    }
    case expr_op::binary:
        return e_bin(bin_op(n.a), subst_expr(n.b, level, db_vals),
                     subst_expr(n.c, level, db_vals));
    case expr_op::negate: return e_not(subst_expr(n.a, level, db_vals));
    }
    throw eval_error("bad expression node");
}

} // namespace tock
