// Operational-semantics properties of the process kernel: each test pins one
// rule of the step relation on a small hand-built term.

#include "tock/parse.hpp"
#include "tock/semantics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace tock;

namespace {

struct kernel : ::testing::Test {
    context c;
    stepper st{c};

    // Sorted, deduplicated label names of every enabled transition.
    std::vector<std::string> labels(term_id t) {
        std::set<std::string> out;
        for (const transition& tr : *st.successors(t)) out.insert(c.label_name(tr.label));
        return {out.begin(), out.end()};
    }

    // The unique successor under the given label name; fails the test if the
    // label is not enabled or is ambiguous.
    term_id after(term_id t, const std::string& label) {
        term_id hit = k_invalid;
        int count = 0;
        for (const transition& tr : *st.successors(t)) {
            if (c.label_name(tr.label) != label) continue;
            hit = tr.target;
            ++count;
        }
        EXPECT_EQ(count, 1) << "label '" << label << "' enabled " << count << " times";
        return hit;
    }

    bool enabled(term_id t, const std::string& label) {
        for (const transition& tr : *st.successors(t))
            if (c.label_name(tr.label) == label) return true;
        return false;
    }

    size_t degree(term_id t) { return st.successors(t)->size(); }
};

using strings = std::vector<std::string>;

TEST_F(kernel, skip_offers_exactly_termination) {
    EXPECT_EQ(labels(c.t_skip()), (strings{"term", "tock"}));
}

TEST_F(kernel, termination_leads_to_tock_loop) {
    term_id omega = after(c.t_skip(), "term");
    EXPECT_EQ(labels(omega), strings{"tock"});
    EXPECT_EQ(after(omega, "tock"), omega);
}

TEST_F(kernel, stop_lets_time_pass_forever) {
    term_id stop = c.t_stop();
    EXPECT_EQ(labels(stop), strings{"tock"});
    EXPECT_EQ(after(stop, "tock"), stop);
}

TEST_F(kernel, ustop_refuses_everything_including_time) {
    EXPECT_EQ(degree(c.t_ustop()), 0u);
}

TEST_F(kernel, wait_zero_terminates_immediately) {
    EXPECT_EQ(labels(c.t_wait(0)), (strings{"term", "tock"}));
}

TEST_F(kernel, wait_counts_down_one_tock_per_unit) {
    term_id t = c.t_wait(2);
    EXPECT_EQ(labels(t), strings{"tock"});
    t = after(t, "tock");
    EXPECT_EQ(labels(t), strings{"tock"});
    t = after(t, "tock");
    EXPECT_EQ(labels(t), (strings{"term", "tock"}));
}

TEST_F(kernel, prefix_is_patient) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_event(a, c.t_skip());
    EXPECT_EQ(labels(t), (strings{"a", "tock"}));
    EXPECT_EQ(after(t, "tock"), t); // waiting does not change the process
    EXPECT_EQ(labels(after(t, "a")), (strings{"term", "tock"}));
}

TEST_F(kernel, output_prefix_carries_the_evaluated_value) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1),
                                         value::of_int(2)});
    term_id t = c.t_prefix_out(ch, c.e_bin(bin_op::add, c.e_int(1), c.e_int(1)),
                               c.t_skip());
    EXPECT_EQ(labels(t), (strings{"c.2", "tock"}));
}

TEST_F(kernel, input_prefix_offers_the_whole_domain) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1),
                                         value::of_int(2)});
    term_id t = c.t_prefix_in(ch, c.t_skip());
    EXPECT_EQ(labels(t), (strings{"c.0", "c.1", "c.2", "tock"}));
}

TEST_F(kernel, input_prefix_binds_the_received_value) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1)});
    chan_id d = c.declare_channel("d", {value::of_int(0), value::of_int(1)});
    term_id t = c.t_prefix_in(ch, c.t_prefix_out(d, c.e_var(0), c.t_skip()));
    EXPECT_TRUE(enabled(after(t, "c.1"), "d.1"));
    EXPECT_FALSE(enabled(after(t, "c.1"), "d.0"));
}

TEST_F(kernel, input_predicate_restricts_the_domain) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1),
                                         value::of_int(2)});
    term_id t = c.t_prefix_in(ch, c.e_bin(bin_op::gt, c.e_var(0), c.e_int(0)),
                              c.t_skip());
    EXPECT_EQ(labels(t), (strings{"c.1", "c.2", "tock"}));
}

TEST_F(kernel, nested_inputs_bind_de_bruijn_style) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1)});
    chan_id d = c.declare_channel("d", {value::of_int(0), value::of_int(1)});
    // c?x -> c?y -> d!x: the inner read must not shadow the outer value.
    term_id t = c.t_prefix_in(
        ch, c.t_prefix_in(ch, c.t_prefix_out(d, c.e_var(1), c.t_skip())));
    term_id mid = after(t, "c.1");
    EXPECT_TRUE(enabled(after(mid, "c.0"), "d.1"));
}

TEST_F(kernel, external_choice_offers_the_union) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_choice2(c.t_event(a, c.t_skip()), c.t_event(b, c.t_stop()));
    EXPECT_EQ(labels(t), (strings{"a", "b", "tock"}));
}

TEST_F(kernel, external_choice_resolves_on_a_visible_event) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_choice2(c.t_event(a, c.t_skip()), c.t_event(b, c.t_stop()));
    EXPECT_EQ(labels(after(t, "a")), (strings{"term", "tock"}));
    EXPECT_EQ(labels(after(t, "b")), strings{"tock"});
}

TEST_F(kernel, external_choice_survives_the_passage_of_time) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_choice2(c.t_event(a, c.t_skip()), c.t_event(b, c.t_stop()));
    EXPECT_EQ(labels(after(t, "tock")), (strings{"a", "b", "tock"}));
}

TEST_F(kernel, sequence_hides_left_termination) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_seq(c.t_skip(), c.t_event(a, c.t_skip()));
    // the hand-over is internal: no 'tick' is visible at the seam
    EXPECT_FALSE(enabled(t, "term"));
    bool direct = enabled(t, "a");
    bool via_tau = enabled(t, "tau") && enabled(after(t, "tau"), "a");
    EXPECT_TRUE(direct || via_tau);
}

TEST_F(kernel, sequence_lets_time_pass_in_the_left_operand) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_seq(c.t_wait(1), c.t_event(a, c.t_skip()));
    EXPECT_EQ(labels(t), strings{"tock"});
    EXPECT_TRUE(enabled(after(t, "tock"), "a") ||
                enabled(after(after(t, "tock"), "tau"), "a"));
}

TEST_F(kernel, parallel_synchronizes_listed_events) {
    chan_id a = c.declare_unit_channel("a");
    set_id sync = c.make_event_set(false, {{a, k_invalid}});
    // left offers a, right does not yet: a must be blocked
    term_id blocked = c.t_parallel(c.t_event(a, c.t_skip()), sync, c.t_wait(1));
    EXPECT_FALSE(enabled(blocked, "a"));
    term_id ready =
        c.t_parallel(c.t_event(a, c.t_skip()), sync, c.t_event(a, c.t_skip()));
    EXPECT_TRUE(enabled(ready, "a"));
}

TEST_F(kernel, parallel_interleaves_unlisted_events) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    set_id sync = c.make_event_set(false, {{b, k_invalid}});
    term_id t = c.t_parallel(c.t_event(a, c.t_skip()), sync, c.t_stop());
    EXPECT_TRUE(enabled(t, "a")); // moves without the right side
}

TEST_F(kernel, parallel_always_synchronizes_time) {
    chan_id a = c.declare_unit_channel("a");
    set_id sync = c.make_event_set(false, {});
    // right side is urgent (no tock): the composition cannot tock
    term_id t = c.t_parallel(c.t_event(a, c.t_skip()), sync,
                             c.t_end_by(c.t_event(a, c.t_skip()), 0));
    EXPECT_FALSE(enabled(t, "tock"));
}

TEST_F(kernel, parallel_terminates_when_both_sides_do) {
    set_id sync = c.make_event_set(false, {});
    term_id t = c.t_parallel(c.t_skip(), sync, c.t_skip());
    EXPECT_TRUE(enabled(t, "term"));
    term_id half = c.t_parallel(c.t_skip(), sync, c.t_stop());
    EXPECT_FALSE(enabled(half, "term"));
}

TEST_F(kernel, parallel_synchronization_matches_values) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1),
                                         value::of_int(2)});
    set_id sync = c.make_event_set(false, {{ch, k_invalid}});
    term_id t = c.t_parallel(c.t_prefix_out(ch, c.e_int(1), c.t_skip()), sync,
                             c.t_prefix_in(ch, c.t_skip()));
    EXPECT_EQ(labels(t), (strings{"c.1", "tock"})); // only the offered value
}

TEST_F(kernel, interleaving_shares_only_time_and_termination) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_interleave(c.t_event(a, c.t_skip()),
                               c.t_event(a, c.t_stop()));
    EXPECT_TRUE(enabled(t, "a"));
    // two independent a-moves with distinct continuations
    int a_moves = 0;
    for (const transition& tr : *st.successors(t))
        if (c.label_name(tr.label) == "a") ++a_moves;
    EXPECT_EQ(a_moves, 2);
}

TEST_F(kernel, symmetric_interleaving_of_equal_components_is_collapsed) {
    // parallel is a symmetric operator, so mirrored composites intern to one
    // term and the two a-moves land on the same successor
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_interleave(c.t_event(a, c.t_skip()), c.t_event(a, c.t_skip()));
    int a_moves = 0;
    for (const transition& tr : *st.successors(t))
        if (c.label_name(tr.label) == "a") ++a_moves;
    EXPECT_EQ(a_moves, 1);
}

TEST_F(kernel, hide_turns_listed_events_internal) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    set_id h = c.make_event_set(false, {{a, k_invalid}});
    term_id t = c.t_hide(
        c.t_choice2(c.t_event(a, c.t_skip()), c.t_event(b, c.t_skip())), h);
    EXPECT_TRUE(enabled(t, "tau"));
    EXPECT_TRUE(enabled(t, "b"));
    EXPECT_FALSE(enabled(t, "a"));
}

TEST_F(kernel, hide_cannot_hide_time) {
    chan_id a = c.declare_unit_channel("a");
    set_id h = c.make_event_set(true, {{a, k_invalid}}); // tock listed
    EXPECT_THROW(c.t_hide(c.t_stop(), h), kernel_error);
}

TEST_F(kernel, hide_passes_termination_through) {
    chan_id a = c.declare_unit_channel("a");
    set_id h = c.make_event_set(false, {{a, k_invalid}});
    EXPECT_TRUE(enabled(c.t_hide(c.t_skip(), h), "term"));
}

TEST_F(kernel, rename_moves_a_label) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    rel_id r = c.make_rename({{a, b}});
    term_id t = c.t_rename(c.t_event(a, c.t_skip()), r);
    EXPECT_EQ(labels(t), (strings{"b", "tock"}));
}

TEST_F(kernel, rename_may_fan_out_one_source_to_many_targets) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    chan_id d = c.declare_unit_channel("d");
    rel_id r = c.make_rename({{a, b}, {a, d}});
    term_id t = c.t_rename(c.t_event(a, c.t_skip()), r);
    EXPECT_EQ(labels(t), (strings{"b", "d", "tock"}));
}

TEST_F(kernel, rename_preserves_the_communicated_value) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(2)});
    chan_id d = c.declare_channel("d", {value::of_int(0), value::of_int(2)});
    rel_id r = c.make_rename({{ch, d}});
    term_id t = c.t_rename(c.t_prefix_out(ch, c.e_int(2), c.t_skip()), r);
    EXPECT_TRUE(enabled(t, "d.2"));
}

TEST_F(kernel, rename_leaves_unlisted_events_alone) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    chan_id d = c.declare_unit_channel("d");
    rel_id r = c.make_rename({{a, b}});
    term_id t = c.t_rename(c.t_event(d, c.t_skip()), r);
    EXPECT_EQ(labels(t), (strings{"d", "tock"}));
}

TEST_F(kernel, timed_priority_prefers_internal_progress_over_time) {
    chan_id a = c.declare_unit_channel("a");
    set_id h = c.make_event_set(false, {{a, k_invalid}});
    term_id t = c.t_timed_priority(c.t_hide(c.t_event(a, c.t_skip()), h));
    EXPECT_FALSE(enabled(t, "tock"));
    EXPECT_TRUE(enabled(t, "tau"));
}

TEST_F(kernel, timed_priority_prefers_termination_over_time) {
    term_id t = c.t_timed_priority(c.t_skip());
    EXPECT_FALSE(enabled(t, "tock"));
    EXPECT_TRUE(enabled(t, "term"));
}

TEST_F(kernel, timed_priority_keeps_time_when_the_process_is_stable) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_timed_priority(c.t_event(a, c.t_skip()));
    EXPECT_EQ(labels(t), (strings{"a", "tock"}));
}

TEST_F(kernel, timed_priority_keeps_time_flowing_after_termination) {
    term_id t = c.t_timed_priority(c.t_skip());
    term_id omega = after(t, "term");
    EXPECT_EQ(labels(omega), strings{"tock"});
}

TEST_F(kernel, interrupt_offers_body_and_handler) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_interrupt(c.t_event(a, c.t_skip()), c.t_event(b, c.t_stop()));
    EXPECT_EQ(labels(t), (strings{"a", "b", "tock"}));
}

TEST_F(kernel, interrupt_handler_wins_and_discards_the_body) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_interrupt(c.t_event(a, c.t_skip()), c.t_event(b, c.t_stop()));
    EXPECT_EQ(labels(after(t, "b")), strings{"tock"}); // only the handler remains
}

TEST_F(kernel, interrupt_body_steps_keep_the_handler_armed) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_interrupt(
        c.t_event(a, c.t_event(a, c.t_skip())), c.t_event(b, c.t_stop()));
    term_id stepped = after(t, "a");
    EXPECT_TRUE(enabled(stepped, "a"));
    EXPECT_TRUE(enabled(stepped, "b"));
}

TEST_F(kernel, end_by_zero_forbids_time) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_end_by(c.t_event(a, c.t_skip()), 0);
    EXPECT_TRUE(enabled(t, "a"));
    EXPECT_FALSE(enabled(t, "tock"));
}

TEST_F(kernel, end_by_allows_exactly_the_budgeted_tocks) {
    // expiry is an internal step, so urgency needs timed priority at the root
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_timed_priority(c.t_end_by(c.t_event(a, c.t_skip()), 2));
    t = after(t, "tock");
    EXPECT_TRUE(enabled(t, "tock"));
    t = after(t, "tock");
    EXPECT_FALSE(enabled(t, "tock"));
    EXPECT_TRUE(enabled(t, "a"));
}

TEST_F(kernel, trun_offers_its_alphabet_forever) {
    chan_id a = c.declare_unit_channel("a");
    set_id s = c.make_event_set(false, {{a, k_invalid}});
    term_id t = c.t_trun(s);
    EXPECT_EQ(labels(t), (strings{"a", "tock"}));
    EXPECT_EQ(after(t, "a"), t);
    EXPECT_EQ(after(t, "tock"), t);
}

TEST_F(kernel, action_deadline_forces_the_required_set_in_time) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    set_id s = c.make_event_set(false, {{a, k_invalid}});
    set_id e = c.make_event_set(false, {{b, k_invalid}});
    term_id t = c.t_timed_priority(c.t_action_deadline(s, e, 1));
    EXPECT_EQ(labels(t), (strings{"a", "b", "tock"}));
    term_id expired = after(t, "tock");
    EXPECT_FALSE(enabled(expired, "tock")); // budget spent: b is now urgent
    EXPECT_TRUE(enabled(expired, "b"));
}

TEST_F(kernel, action_deadline_survives_admissible_traffic) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    set_id s = c.make_event_set(false, {{a, k_invalid}});
    set_id e = c.make_event_set(false, {{b, k_invalid}});
    term_id t = c.t_action_deadline(s, e, 1);
    term_id busy = after(t, "a");
    EXPECT_TRUE(enabled(busy, "b")); // a-traffic does not discharge the deadline
}

TEST_F(kernel, conditional_takes_the_evaluated_branch) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    term_id t = c.t_cond(c.e_bin(bin_op::lt, c.e_int(1), c.e_int(2)),
                         c.t_event(a, c.t_skip()), c.t_event(b, c.t_skip()));
    EXPECT_TRUE(enabled(t, "a"));
    EXPECT_FALSE(enabled(t, "b"));
}

TEST_F(kernel, recursive_call_unfolds_lazily) {
    chan_id a = c.declare_unit_channel("a");
    def_id p = c.declare_def("P", 0);
    c.set_def_body(p, c.t_event(a, c.t_call(p)));
    term_id t = c.t_call(p);
    EXPECT_EQ(labels(t), (strings{"a", "tock"}));
    EXPECT_EQ(labels(after(t, "a")), (strings{"a", "tock"}));
}

TEST_F(kernel, parameterized_call_substitutes_arguments) {
    chan_id ch = c.declare_channel("c", {value::of_int(0), value::of_int(1),
                                         value::of_int(2)});
    def_id p = c.declare_def("P", 1);
    c.set_def_body(p, c.t_prefix_out(ch, c.e_var(0), c.t_skip()));
    EXPECT_TRUE(enabled(c.t_call(p, std::array{c.e_int(2)}), "c.2"));
}

TEST_F(kernel, cell_read_is_nonconsuming) {
    chan_id w = c.declare_channel("w", {value::of_int(0), value::of_int(1)});
    chan_id r = c.declare_channel("r", {value::of_int(0), value::of_int(1)});
    term_id cell = c.t_cell(w, r, value::of_int(1));
    term_id once = after(cell, "r.1");
    EXPECT_TRUE(enabled(once, "r.1")); // same value still readable
}

TEST_F(kernel, cell_write_overwrites_the_stored_value) {
    chan_id w = c.declare_channel("w", {value::of_int(0), value::of_int(1)});
    chan_id r = c.declare_channel("r", {value::of_int(0), value::of_int(1)});
    term_id cell = c.t_cell(w, r, value::of_int(0));
    term_id written = after(cell, "w.1");
    EXPECT_TRUE(enabled(written, "r.1"));
    EXPECT_FALSE(enabled(written, "r.0"));
}

TEST_F(kernel, cell_accepts_at_most_one_write_per_time_unit) {
    chan_id w = c.declare_channel("w", {value::of_int(0), value::of_int(1)});
    chan_id r = c.declare_channel("r", {value::of_int(0), value::of_int(1)});
    term_id cell = c.t_cell(w, r, value::of_int(0));
    term_id written = after(cell, "w.1");
    EXPECT_FALSE(enabled(written, "w.0")); // gate closed until the next tock
    EXPECT_FALSE(enabled(written, "w.1"));
    term_id next_tick = after(written, "tock");
    EXPECT_TRUE(enabled(next_tick, "w.0"));
}

TEST_F(kernel, presence_cell_blocks_readers_until_written) {
    chan_id w = c.declare_unit_channel("w");
    chan_id take = c.declare_unit_channel("take");
    term_id cell = c.t_presence_cell(w, take);
    EXPECT_FALSE(enabled(cell, "take"));
    term_id armed = after(cell, "w");
    EXPECT_TRUE(enabled(armed, "take"));
    // taking consumes the latch
    EXPECT_FALSE(enabled(after(armed, "take"), "take"));
}

TEST_F(kernel, project_keeps_listed_events_and_internalizes_the_rest) {
    chan_id a = c.declare_unit_channel("a");
    chan_id b = c.declare_unit_channel("b");
    set_id keep = c.make_event_set(true, {{a, k_invalid}});
    term_id t = c.t_project(
        c.t_choice2(c.t_event(a, c.t_skip()), c.t_event(b, c.t_skip())), keep);
    EXPECT_TRUE(enabled(t, "a"));
    EXPECT_FALSE(enabled(t, "b"));
    EXPECT_TRUE(enabled(t, "tau"));
}

TEST_F(kernel, project_without_tock_in_the_kept_set_absorbs_time) {
    chan_id a = c.declare_unit_channel("a");
    set_id keep = c.make_event_set(false, {{a, k_invalid}});
    term_id t = c.t_project(c.t_stop(), keep);
    EXPECT_FALSE(enabled(t, "tock"));
    EXPECT_TRUE(enabled(t, "tau")); // the clock still advances underneath
}

TEST_F(kernel, successor_lists_are_canonically_ordered) {
    chan_id b = c.declare_unit_channel("b");
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_choice2(c.t_event(b, c.t_skip()), c.t_event(a, c.t_skip()));
    auto succ = st.successors(t);
    for (size_t i = 1; i < succ->size(); ++i) {
        const transition& p = (*succ)[i - 1];
        const transition& q = (*succ)[i];
        EXPECT_TRUE(p.label < q.label || (p.label == q.label && p.target <= q.target));
    }
}

TEST_F(kernel, successors_are_memoized_per_term) {
    chan_id a = c.declare_unit_channel("a");
    term_id t = c.t_event(a, c.t_skip());
    EXPECT_EQ(st.successors(t).get(), st.successors(t).get());
}

TEST_F(kernel, structurally_equal_terms_are_interned_to_one_id) {
    chan_id a = c.declare_unit_channel("a");
    term_id t1 = c.t_event(a, c.t_skip());
    term_id t2 = c.t_event(a, c.t_skip());
    EXPECT_EQ(t1, t2);
}

// ---- one-place timed buffer: visible-trace semantics under timed priority --

struct timed_buffer : kernel {
    static constexpr const char* src = R"(
        channel in : {0..2}
        channel out : {0..2}
        TimedBuffer = in?x -> (TimedBuffer [] (WAIT(1) ; out!x -> TimedBuffer))
        Example     = TP(TimedBuffer)
    )";

    term_id example() {
        parsed_module m = parse_process_text(c, src);
        return instantiate(c, m, "Example");
    }

    // States reachable by internal steps alone.
    std::set<term_id> tau_closure(const std::set<term_id>& in) {
        std::set<term_id> out = in;
        std::vector<term_id> work(in.begin(), in.end());
        while (!work.empty()) {
            term_id t = work.back();
            work.pop_back();
            for (const transition& tr : *st.successors(t)) {
                if (c.label_name(tr.label) != "tau") continue;
                if (out.insert(tr.target).second) work.push_back(tr.target);
            }
        }
        return out;
    }

    // Whether the process can perform the visible trace, with internal steps
    // interleaved freely.
    bool accepts(term_id t, const std::vector<std::string>& trace) {
        std::set<term_id> frontier = tau_closure({t});
        for (const std::string& label : trace) {
            std::set<term_id> next;
            for (term_id s : frontier)
                for (const transition& tr : *st.successors(s))
                    if (c.label_name(tr.label) == label) next.insert(tr.target);
            if (next.empty()) return false;
            frontier = tau_closure(next);
        }
        return true;
    }
};

TEST_F(timed_buffer, output_follows_one_time_unit_after_input) {
    term_id t = example();
    for (const std::string& v : {"0", "1", "2"})
        EXPECT_TRUE(accepts(t, {"in." + v, "tock", "out." + v})) << v;
}

TEST_F(timed_buffer, output_cannot_happen_in_the_input_instant) {
    term_id t = example();
    for (const std::string& v : {"0", "1", "2"})
        EXPECT_FALSE(accepts(t, {"in." + v, "out." + v})) << v;
}

TEST_F(timed_buffer, buffer_never_emits_a_value_it_did_not_take) {
    term_id t = example();
    EXPECT_FALSE(accepts(t, {"in.0", "tock", "out.1"}));
    EXPECT_FALSE(accepts(t, {"out.0"}));
}

TEST_F(timed_buffer, time_does_not_resolve_the_choice_between_refill_and_output) {
    term_id t = example();
    // after <in.0, tock> both arms stay open: a refill and the delayed output
    EXPECT_TRUE(accepts(t, {"in.0", "tock", "in.1"}));
    EXPECT_TRUE(accepts(t, {"in.0", "tock", "out.0"}));
    // a refill overwrites the held value
    EXPECT_TRUE(accepts(t, {"in.0", "tock", "in.1", "tock", "out.1"}));
    EXPECT_FALSE(accepts(t, {"in.0", "tock", "in.1", "tock", "out.0"}));
}

TEST_F(timed_buffer, buffer_is_always_prepared_to_receive) {
    term_id t = example();
    EXPECT_TRUE(accepts(t, {"in.2", "in.1", "in.0", "tock", "out.0"}));
    EXPECT_TRUE(accepts(t, {"tock", "tock", "in.1", "tock", "tock", "out.1"}));
}

} // namespace
