#pragma once

#include "tock/chunked_vector.hpp"
#include "tock/event.hpp"
#include "tock/expr.hpp"
#include "tock/flat_index.hpp"
#include "tock/term.hpp"
#include "tock/value.hpp"

#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tock {

using enum_id = uint16_t;

struct channel_decl {
    std::string name;
    std::vector<value> domain; // declared order; iteration order for ?x
};

struct enum_decl {
    std::string name;
    std::vector<std::string> members;
};

using native_fn = std::function<value(std::span<const value>)>;

struct func_decl {
    std::string name;
    uint32_t arity = 0;
    native_fn native;              // set for built-in functions
    expr_id body = k_invalid;      // set for expression-bodied functions
};

struct process_def {
    std::string name;
    uint32_t arity = 0;
    term_id body = k_invalid; // params appear as de Bruijn vars; param 0 outermost
};

// One item of an event set: a whole channel (value == k_invalid) or a single
// event chan.value.
struct set_item {
    chan_id chan;
    value_id val; // k_invalid = all values of the channel
    bool operator==(const set_item& o) const { return chan == o.chan && val == o.val; }
    bool operator<(const set_item& o) const {
        return chan != o.chan ? chan < o.chan : val < o.val;
    }
};

struct event_set_data {
    bool has_tock = false;
    std::vector<set_item> items; // sorted, deduplicated
};

struct rename_pair {
    chan_id from, to;
    bool operator==(const rename_pair& o) const { return from == o.from && to == o.to; }
    bool operator<(const rename_pair& o) const {
        return from != o.from ? from < o.from : to < o.to;
    }
};

struct cell_state {
    value_id val;
    uint32_t flags; // k_cell_open
    bool operator==(const cell_state& o) const { return val == o.val && flags == o.flags; }
};

// The context owns every interned table: values, labels, expressions, terms,
// event sets, rename relations, and the declaration environment (channels,
// enumerations, functions, process definitions). Declarations are made during
// a single-threaded build phase; the interning tables for values, labels,
// expressions and terms remain safe for concurrent insert-or-get so that LTS
// compilation can expand frontiers in parallel.
class context {
  public:
    context();
    context(const context&) = delete;
    context& operator=(const context&) = delete;

    // ---- declarations (single-threaded build phase) ----
    enum_id declare_enum(const std::string& name, std::vector<std::string> members);
    value enum_value(const std::string& enum_name, const std::string& member) const;
    const enum_decl& enum_info(enum_id id) const { return enums_[id]; }

    chan_id declare_channel(const std::string& name, std::vector<value> domain);
    chan_id declare_unit_channel(const std::string& name);
    chan_id channel(const std::string& name) const; // throws unbound_name_error
    std::optional<chan_id> find_channel(const std::string& name) const;
    const channel_decl& channel_info(chan_id c) const { return channels_[c]; }
    size_t channel_count() const { return channels_.size(); }

    func_id declare_native_func(const std::string& name, uint32_t arity, native_fn fn);
    func_id declare_expr_func(const std::string& name, uint32_t arity, expr_id body);
    func_id func(const std::string& name) const;
    std::optional<func_id> find_func(const std::string& name) const;
    const func_decl& func_info(func_id f) const { return funcs_[f]; }

    def_id declare_def(const std::string& name, uint32_t arity);
    void set_def_body(def_id d, term_id body);
    def_id def(const std::string& name) const;
    std::optional<def_id> find_def(const std::string& name) const;
    const process_def& def_info(def_id d) const { return defs_[d]; }
    size_t def_count() const { return defs_.size(); }

    // ---- event sets and rename relations ----
    set_id make_event_set(bool has_tock, std::vector<set_item> items);
    // Convenience: whole channels plus exact events by label.
    set_id set_of_channels(std::initializer_list<chan_id> chans, bool with_tock = false);
    const event_set_data& set_info(set_id s) const { return sets_[s]; }
    bool set_contains(set_id s, chan_id c, value_id v) const;

    rel_id make_rename(std::vector<rename_pair> pairs);
    std::span<const chan_id> rename_targets(rel_id r, chan_id from) const;

    // ---- values and labels ----
    value_id intern_value(const value& v);
    const value& value_of(value_id id) const { return value_table_[id]; }
    label_id label(chan_id c, const value& v);
    label_id label(chan_id c, value_id v);
    // Label for a unit channel event.
    label_id unit_label(chan_id c) { return label(c, value::unit_v()); }
    chan_id label_channel(label_id l) const;
    const value& label_value(label_id l) const;
    std::string label_name(label_id l) const;
    size_t label_count() const;
    bool label_in_set(label_id l, set_id s) const;

    // ---- expressions ----
    expr_id e_const(const value& v);
    expr_id e_int(int32_t i) { return e_const(value::of_int(i)); }
    expr_id e_bool(bool b) { return e_const(value::of_bool(b)); }
    expr_id e_unit() { return e_const(value::unit_v()); }
    expr_id e_var(uint32_t db_index);
    expr_id e_apply(func_id f, std::span<const expr_id> args);
    expr_id e_bin(bin_op op, expr_id l, expr_id r);
    expr_id e_not(expr_id e);
    const expr_node& expr(expr_id e) const { return exprs_[e]; }
    value eval(expr_id e, std::span<const value> bindings) const;
    value eval_closed(expr_id e) const { return eval(e, {}); }
    expr_id subst_expr(expr_id e, uint32_t level, std::span<const value> db_vals);

    // ---- terms ----
    term_id t_skip();
    term_id t_omega();
    term_id t_stop();
    term_id t_ustop();
    term_id t_wait(uint32_t ticks);
    term_id t_prefix_out(chan_id c, expr_id val, term_id cont);
    term_id t_prefix_out(chan_id c, const value& v, term_id cont);
    // Unit-channel event prefix.
    term_id t_event(chan_id c, term_id cont);
    term_id t_prefix_in(chan_id c, expr_id pred, term_id cont);
    term_id t_prefix_in(chan_id c, term_id cont) { return t_prefix_in(c, k_invalid, cont); }
    term_id t_cond(expr_id guard, term_id then_t, term_id else_t);
    term_id t_choice(std::vector<term_id> children);
    term_id t_choice2(term_id a, term_id b) { return t_choice({a, b}); }
    term_id t_seq(term_id l, term_id r);
    term_id t_seq(std::initializer_list<term_id> steps); // right fold
    term_id t_hide(term_id t, set_id s);
    term_id t_project(term_id t, set_id s);
    term_id t_parallel(term_id l, set_id sync, term_id r);
    term_id t_interleave(term_id l, term_id r);
    term_id t_rename(term_id t, rel_id r);
    term_id t_interrupt(term_id body, term_id handler);
    term_id t_exception(term_id body, set_id throws, term_id handler);
    term_id t_call(def_id d, std::span<const expr_id> args);
    term_id t_call(def_id d) { return t_call(d, {}); }
    term_id t_call_v(def_id d, std::span<const value> args);
    term_id t_timed_priority(term_id t);
    term_id t_trun(set_id s);
    term_id t_cell(chan_id write_c, chan_id read_c, const value& initial);
    term_id t_presence_cell(chan_id write_c, chan_id read_c);

    // Deadline combinators, defined exactly by their defining equations:
    //   end_by(P, d)            = P /\ (WAIT(d); USTOP)
    //   action_deadline(S, E, d) = (end_by(TRUN(S), d)) [| E |> SKIP
    term_id t_end_by(term_id p, uint32_t d);
    term_id t_action_deadline(set_id s, set_id e, uint32_t d);

    const term_node& term(term_id t) const { return terms_[t]; }
    std::span<const term_id> choice_children(const term_node& n) const;
    std::span<const expr_id> call_args(const term_node& n) const;
    const cell_state& cell_info(const term_node& n) const { return cell_states_[n.c]; }
    term_id with_cell_state(const term_node& n, value_id v, uint32_t flags);
    size_t term_count() const;

    term_id subst_term(term_id t, uint32_t level, std::span<const value> db_vals);
    term_id subst1(term_id t, const value& v) {
        return subst_term(t, 0, std::span<const value>(&v, 1));
    }

    // Structural validation run before compilation: calls resolve with matching
    // arity and bodies present; no event is both hidden inside a subterm and
    // synchronized by an enclosing parallel composition; exception throw sets
    // and hidden sets never contain tock.
    void check_structure(term_id root) const;

    std::string render_term(term_id t) const; // debug aid

  private:
    friend class stepper;

    term_id intern_term(term_node n);
    expr_id intern_expr(expr_node n);
    // Content hashes: arena-backed nodes (choice children, call/apply argument
    // lists) hash their list contents, everything else its raw fields. Used
    // both on the intern fast path and when the index tables grow.
    uint64_t term_content_hash(const term_node& n) const;
    uint64_t expr_content_hash(const expr_node& n) const;
    uint32_t push_children(std::span<const term_id> kids);
    uint32_t push_arg_exprs(std::span<const expr_id> args);
    uint32_t intern_cell_state(const cell_state& cs);
    uint16_t term_nfree(const term_node& n) const;

    // declaration tables
    std::vector<channel_decl> channels_;
    std::unordered_map<std::string, chan_id> channel_names_;
    std::vector<enum_decl> enums_;
    std::unordered_map<std::string, enum_id> enum_names_;
    std::vector<func_decl> funcs_;
    std::unordered_map<std::string, func_id> func_names_;
    std::vector<process_def> defs_;
    std::unordered_map<std::string, def_id> def_names_;

    std::vector<event_set_data> sets_;
    std::vector<std::vector<rename_pair>> rels_;
    std::vector<std::unordered_map<chan_id, std::vector<chan_id>>> rename_maps_;

    // interned values and labels (thread-safe)
    mutable std::mutex value_mu_;
    chunked_vector<value> value_table_;
    std::unordered_map<value, value_id> value_ids_;
    mutable std::mutex label_mu_;
    chunked_vector<std::pair<chan_id, value_id>> label_table_; // index - k_first_visible_label
    std::unordered_map<uint64_t, label_id> label_ids_;

    // interned expressions and terms (thread-safe)
    mutable std::mutex expr_mu_;
    chunked_vector<expr_node> exprs_;
    intern_index expr_index_;
    chunked_vector<expr_id> expr_arg_arena_;

    mutable std::mutex term_mu_;
    chunked_vector<term_node> terms_;
    intern_index term_index_;
    chunked_vector<term_id> child_arena_;
    mutable std::mutex cell_mu_;
    chunked_vector<cell_state> cell_states_;
    std::unordered_map<uint64_t, uint32_t> cell_state_ids_;

    term_id cached_skip_ = k_invalid, cached_stop_ = k_invalid, cached_ustop_ = k_invalid,
            cached_omega_ = k_invalid;
};

} // namespace tock
