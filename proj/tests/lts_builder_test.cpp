// Explicit-state compilation and determinization: frozen counts on
// hand-enumerable processes, trace-set preservation, bounds and thread
// independence.

#include "tock/lts.hpp"
#include "tock/parse.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace tock;

namespace {

struct lts_builder : ::testing::Test {
    context c;
    stepper st{c};

    term_id entry(const std::string& src, const std::string& name) {
        parsed_module m = parse_process_text(c, src);
        return instantiate(c, m, name);
    }

    // All distinct label names appearing on edges.
    std::set<std::string> edge_labels(const lts& m) {
        std::set<std::string> out;
        for (const lts_edge& e : m.edges) out.insert(c.label_name(e.label));
        return out;
    }

    // Every trace over observable labels (visible + tock + term) the LTS can
    // perform within `depth` steps, as label-id sequences. Internal moves are
    // followed without consuming depth.
    std::set<std::vector<label_id>> bounded_traces(const lts& m, int depth) {
        std::set<std::vector<label_id>> out;
        // subset walk: set of states reachable by internal moves
        auto closure = [&](std::set<uint32_t> s) {
            std::vector<uint32_t> work(s.begin(), s.end());
            while (!work.empty()) {
                uint32_t q = work.back();
                work.pop_back();
                for (const lts_edge& e : m.out(q))
                    if (e.label == k_label_tau)
                        if (s.insert(e.dst).second) work.push_back(e.dst);
            }
            return s;
        };
        struct item {
            std::set<uint32_t> states;
            std::vector<label_id> trace;
        };
        std::vector<item> frontier{{closure({0}), {}}};
        out.insert({});
        for (int d = 0; d < depth && !frontier.empty(); ++d) {
            std::vector<item> next;
            for (const item& it : frontier) {
                std::map<label_id, std::set<uint32_t>> step;
                for (uint32_t q : it.states)
                    for (const lts_edge& e : m.out(q))
                        if (e.label != k_label_tau) step[e.label].insert(e.dst);
                for (auto& [lbl, dsts] : step) {
                    item nx{closure(std::move(dsts)), it.trace};
                    nx.trace.push_back(lbl);
                    out.insert(nx.trace);
                    next.push_back(std::move(nx));
                }
            }
            frontier = std::move(next);
        }
        return out;
    }

    // Same trace enumeration on the determinized form.
    std::set<std::vector<label_id>> bounded_traces(const dlts& m, int depth) {
        std::set<std::vector<label_id>> out;
        struct item {
            uint32_t state;
            std::vector<label_id> trace;
        };
        std::vector<item> frontier{{0, {}}};
        out.insert({});
        for (int d = 0; d < depth && !frontier.empty(); ++d) {
            std::vector<item> next;
            for (const item& it : frontier)
                for (const lts_edge& e : m.out(it.state)) {
                    item nx{e.dst, it.trace};
                    nx.trace.push_back(e.label);
                    out.insert(nx.trace);
                    next.push_back(std::move(nx));
                }
            frontier = std::move(next);
        }
        return out;
    }
};

TEST_F(lts_builder, a_timelocked_process_compiles_to_one_bare_state) {
    lts m = compile_lts(st, c.t_ustop());
    EXPECT_EQ(m.stats.states, 1u);
    EXPECT_EQ(m.stats.transitions, 0u);
}

TEST_F(lts_builder, value_register_compiles_to_one_state_per_held_value) {
    // HV(x) offers a write of any new value and a read of the held one; over
    // {0..2} the hand enumeration gives 3 states, each with 3 write edges,
    // 1 read edge and a tock self-loop: 15 edges in total.
    term_id t = entry(R"(
        channel set_HV : {0..2}
        channel get_HV : {0..2}
        HV(x) = set_HV?nv -> HV(nv) [] get_HV!x -> HV(x)
        Main = HV(0)
    )",
                      "Main");
    lts m = compile_lts(st, t);
    EXPECT_EQ(m.stats.states, 3u);
    EXPECT_EQ(m.stats.transitions, 15u);
    uint64_t visible = 0;
    for (const lts_edge& e : m.edges) visible += label_is_visible(e.label) ? 1 : 0;
    EXPECT_EQ(visible, 12u);
}

TEST_F(lts_builder, timed_buffer_compiles_to_a_finite_system) {
    term_id t = entry(R"(
        channel in : {0..2}
        channel out : {0..2}
        TimedBuffer = in?x -> (TimedBuffer [] (WAIT(1) ; out!x -> TimedBuffer))
        Example     = TP(TimedBuffer)
    )",
                      "Example");
    lts m = compile_lts(st, t);
    EXPECT_GT(m.stats.states, 0u);
    EXPECT_LT(m.stats.states, 64u);
    for (const std::string& l : edge_labels(m)) {
        EXPECT_TRUE(l == "tau" || l == "tock" || l.starts_with("in.") ||
                    l.starts_with("out."))
            << l;
    }
    // state 0 is the initial state: it must offer every input value
    std::set<std::string> initial;
    for (const lts_edge& e : m.out(0)) initial.insert(c.label_name(e.label));
    EXPECT_TRUE(initial.count("in.0") && initial.count("in.1") && initial.count("in.2"));
}

TEST_F(lts_builder, compilation_is_reproducible) {
    term_id t = entry(R"(
        channel a
        channel b
        P = (a -> WAIT(1) ; P) [] (b -> STOP)
    )",
                      "P");
    lts m1 = compile_lts(st, t);
    lts m2 = compile_lts(st, t);
    EXPECT_EQ(m1.stats.states, m2.stats.states);
    EXPECT_EQ(m1.stats.transitions, m2.stats.transitions);
    EXPECT_EQ(m1.row, m2.row);
    for (size_t i = 0; i < m1.edges.size(); ++i)
        EXPECT_TRUE(m1.edges[i] == m2.edges[i]) << i;
}

TEST_F(lts_builder, state_numbering_is_identical_for_every_thread_count) {
    term_id t = entry(R"(
        channel a
        channel b
        channel d : {0..2}
        P = (a -> d!0 -> P) [] (b -> Q)
        Q = d?x -> (WAIT(1) ; P)
        Main = (P [|{a}|] (a -> Q)) \ {b}
    )",
                      "Main");
    exploration_limits l1, l4, l8;
    l1.threads = 1;
    l4.threads = 4;
    l8.threads = 8;
    lts m1 = compile_lts(st, t, l1);
    lts m4 = compile_lts(st, t, l4);
    lts m8 = compile_lts(st, t, l8);
    EXPECT_EQ(m1.row, m4.row);
    EXPECT_EQ(m1.row, m8.row);
    EXPECT_EQ(m1.state_term, m4.state_term);
    EXPECT_EQ(m1.state_term, m8.state_term);
    for (size_t i = 0; i < m1.edges.size(); ++i) {
        EXPECT_TRUE(m1.edges[i] == m4.edges[i]) << i;
        EXPECT_TRUE(m1.edges[i] == m8.edges[i]) << i;
    }
}

TEST_F(lts_builder, exceeding_the_state_bound_reports_partial_progress) {
    // an unbounded counter: fresh states forever
    chan_id tick = c.declare_unit_channel("step");
    def_id d = c.declare_def("Counter", 1);
    c.set_def_body(d, c.t_event(tick, c.t_call(d, std::array{c.e_bin(
                                           bin_op::add, c.e_var(0), c.e_int(1))})));
    term_id t = c.t_call_v(d, std::array{value::of_int(0)});
    exploration_limits lim;
    lim.max_states = 100;
    try {
        compile_lts(st, t, lim);
        FAIL() << "expected bound_exceeded";
    } catch (const bound_exceeded& e) {
        EXPECT_GE(e.partial.states, 100u);
        EXPECT_LT(e.partial.states, 100u + 64u); // one frontier layer of slack
    }
}

TEST_F(lts_builder, stopping_at_a_label_explores_a_sound_prefix) {
    // deep linear system: full size 42 states; the marker sits at depth 5
    std::string src = "channel a\nchannel hit\n";
    for (int i = 0; i < 40; ++i) {
        src += "P" + std::to_string(i) + " = " +
               (i == 5 ? std::string("hit -> P6") : "a -> P" + std::to_string(i + 1)) +
               "\n";
    }
    src += "P40 = STOP\n";
    term_id t = entry(src, "P0");
    lts full = compile_lts(st, t);
    exploration_limits lim;
    lim.stop_at_label = c.unit_label(c.channel("hit"));
    lts cut = compile_lts(st, t, lim);
    EXPECT_LT(cut.stats.states, full.stats.states);
    bool found = false;
    for (const lts_edge& e : cut.edges) found |= e.label == lim.stop_at_label;
    EXPECT_TRUE(found);
}

TEST_F(lts_builder, determinization_of_a_deterministic_system_is_isomorphic) {
    term_id t = entry(R"(
        channel a
        channel b
        P = a -> b -> P
    )",
                      "P");
    lts m = compile_lts(st, t);
    dlts d = determinize(m);
    EXPECT_EQ(d.num_states(), m.num_states());
    EXPECT_EQ(bounded_traces(m, 6), bounded_traces(d, 6));
}

TEST_F(lts_builder, determinization_merges_internal_branching) {
    // after hiding, the choice becomes one internal fork: the normal form
    // starts in a state offering both futures
    term_id t = entry(R"(
        channel a
        channel b
        channel i
        P = (i -> a -> STOP [] i -> b -> STOP) \ {i}
    )",
                      "P");
    lts m = compile_lts(st, t);
    dlts d = determinize(m);
    EXPECT_NE(d.next(0, c.unit_label(c.channel("a"))), k_invalid);
    EXPECT_NE(d.next(0, c.unit_label(c.channel("b"))), k_invalid);
    EXPECT_EQ(bounded_traces(m, 6), bounded_traces(d, 6));
}

TEST_F(lts_builder, determinization_preserves_bounded_trace_sets) {
    const char* sources[] = {
        // nondeterministic via hiding
        "channel a\nchannel b\nchannel i\n"
        "P = (i -> a -> P [] i -> b -> WAIT(1) ; P) \\ {i}\n",
        // timed choice with shared first event
        "channel a\nchannel b\n"
        "P = (a -> b -> P) [] (a -> WAIT(1) ; P)\n",
        // termination plumbing
        "channel a\nchannel b\n"
        "P = ((a -> SKIP) ; (b -> SKIP)) ; P\n",
    };
    for (const char* src : sources) {
        context fresh;
        stepper fst{fresh};
        parsed_module mod = parse_process_text(fresh, src);
        lts m = compile_lts(fst, fresh.t_timed_priority(instantiate(fresh, mod, "P")));
        dlts d = determinize(m);
        EXPECT_EQ(bounded_traces(m, 7), bounded_traces(d, 7)) << src;
    }
}

TEST_F(lts_builder, text_export_lists_every_state_once) {
    term_id t = entry("channel a\nP = a -> P\n", "P");
    lts m = compile_lts(st, t);
    std::string text = lts_to_text(m, c);
    EXPECT_NE(text.find("states 1"), std::string::npos);
    EXPECT_NE(text.find("a"), std::string::npos);
    std::string json = lts_to_json(m, c);
    EXPECT_NE(json.find("\"states\""), std::string::npos);
}

} // namespace
