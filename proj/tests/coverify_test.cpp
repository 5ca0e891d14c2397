// Composed hardware/software model on the coarse profile: assertion registry
// shape, fault-variant wiring, and frozen state-space sizes for the checks
// that run in seconds. The long-running P1 refinement lives in the acceptance
// suite.

#include "tock/assertions.hpp"
#include "tock/flat_compose.hpp"
#include "tock/hvc_coverify.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

using namespace tock;
using namespace tock::hvc;

namespace {

TEST(registry, lists_the_ten_assertions_in_report_order) {
    context c;
    coverification cv =
        build_coverification(c, options_for_model("correct", time_scale::desk()));
    std::vector<assertion_spec> r = assertion_registry(cv);

    std::vector<std::string> names;
    for (const auto& a : r) names.push_back(a.name);
    EXPECT_EQ(names,
              (std::vector<std::string>{"P1", "P2", "P3", "P4", "Reach_Init",
                                        "Reach_Wait24VPower", "Reach_ClosedLoop",
                                        "Reach_ErrorMode", "Reach_Watchdog_s0",
                                        "Reach_Watchdog_s1"}));
    for (const auto& a : r) {
        EXPECT_FALSE(a.statement.empty()) << a.name;
        EXPECT_NE(a.impl, k_invalid) << a.name;
        if (a.k == assertion_spec::kind::trace_refinement)
            EXPECT_NE(a.spec, k_invalid) << a.name;
        if (a.k == assertion_spec::kind::reachable)
            EXPECT_NE(a.marker, k_invalid) << a.name;
    }
    EXPECT_EQ(r[3].k, assertion_spec::kind::timed_deadlock_free);
}

TEST(registry, model_variants_flip_exactly_one_switch) {
    time_scale desk = time_scale::desk();
    EXPECT_EQ(known_models(),
              (std::vector<std::string>{"correct", "mutants/no-disable-hv",
                                        "mutants/no-msetpoint-reset",
                                        "mutants/slow-evolution"}));

    coverify_options correct = options_for_model("correct", desk);
    EXPECT_TRUE(correct.software.disable_hv_in_supply_check);
    EXPECT_TRUE(correct.software.reset_msetpoint_in_disable);
    EXPECT_EQ(correct.evolution_delay_ms_override, 0u);
    EXPECT_TRUE(options_for_model("", desk).software.disable_hv_in_supply_check);

    coverify_options no_disable = options_for_model("mutants/no-disable-hv", desk);
    EXPECT_FALSE(no_disable.software.disable_hv_in_supply_check);
    EXPECT_TRUE(no_disable.software.reset_msetpoint_in_disable);

    coverify_options no_reset = options_for_model("mutants/no-msetpoint-reset", desk);
    EXPECT_TRUE(no_reset.software.disable_hv_in_supply_check);
    EXPECT_FALSE(no_reset.software.reset_msetpoint_in_disable);

    coverify_options slow = options_for_model("mutants/slow-evolution", desk);
    EXPECT_EQ(slow.evolution_delay_ms_override, 3200u);
    EXPECT_TRUE(slow.software.disable_hv_in_supply_check);

    EXPECT_THROW(options_for_model("mutants/no-such-fault", desk), instantiation_error);
}

struct coverify_desk : ::testing::Test {
    context c;
    coverification cv =
        build_coverification(c, options_for_model("correct", time_scale::desk()));
    std::vector<assertion_spec> registry = assertion_registry(cv);

    const assertion_spec& named(const std::string& n) {
        for (const auto& a : registry)
            if (a.name == n) return a;
        throw std::runtime_error("no assertion " + n);
    }
};

// The exact state counts below pin down the explored spaces on the coarse
// profile. They are regression tripwires: a semantics change that grows or
// shrinks a space shows up here long before it shows up as a wrong verdict.

TEST_F(coverify_desk, specifications_compile_to_small_deterministic_systems) {
    stepper st(c);
    lts s1 = compile_lts(st, cv.spec_p1);
    EXPECT_EQ(s1.num_states(), 306u);
    EXPECT_EQ(s1.edges.size(), 2136u);
    EXPECT_EQ(determinize(s1).num_states(), 305u);
    EXPECT_EQ(determinize(compile_lts(st, cv.spec_p2)).num_states(), 6u);
    EXPECT_EQ(determinize(compile_lts(st, cv.spec_p3)).num_states(), 6u);
}

TEST_F(coverify_desk, the_platform_composition_splits_into_leaf_processes) {
    stepper st(c);
    lts p = compile_lts(st, cv.hvc_platform);
    EXPECT_EQ(p.num_states(), 7578u);
    EXPECT_EQ(p.edges.size(), 19980u);

    flat_system fs = flatten_composition(st, cv.impl_p1);
    size_t leaves = 0;
    for (const auto& n : fs.nodes)
        if (n.kind == flat_node::leaf) ++leaves;
    EXPECT_EQ(fs.nodes.size(), 55u);
    EXPECT_EQ(leaves, 18u);
    // one pair of identical components shares a compiled system
    EXPECT_EQ(fs.leaf_systems.size(), 17u);
}

TEST_F(coverify_desk, every_controller_state_is_reachable_with_frozen_sizes) {
    struct expected {
        const char* name;
        uint64_t states, transitions;
    };
    const expected table[] = {
        {"Reach_Init", 256, 673},
        {"Reach_Wait24VPower", 6194, 29600},
        {"Reach_ClosedLoop", 43048, 221165},
        {"Reach_ErrorMode", 65004, 338329},
        {"Reach_Watchdog_s0", 256, 673},
        {"Reach_Watchdog_s1", 1713, 7058},
    };
    for (const expected& e : table) {
        assertion_row row = run_assertion(c, named(e.name));
        EXPECT_TRUE(row.passed) << e.name << ": " << row.counterexample_text;
        EXPECT_EQ(row.states, e.states) << e.name;
        EXPECT_EQ(row.transitions, e.transitions) << e.name;
    }
}

TEST_F(coverify_desk, power_loss_reactions_hold_with_frozen_product_sizes) {
    assertion_row p2 = run_assertion(c, named("P2"));
    EXPECT_TRUE(p2.passed) << p2.counterexample_text;
    EXPECT_EQ(p2.states, 345016u);

    assertion_row p3 = run_assertion(c, named("P3"));
    EXPECT_TRUE(p3.passed) << p3.counterexample_text;
    EXPECT_EQ(p3.states, 318163u);
}

TEST_F(coverify_desk, the_composed_software_is_deadlock_free_with_frozen_sizes) {
    assertion_row p4 = run_assertion(c, named("P4"));
    EXPECT_TRUE(p4.passed) << p4.counterexample_text;
    EXPECT_EQ(p4.states, 517147u);
    EXPECT_EQ(p4.transitions, 2938013u);
}

TEST_F(coverify_desk, verdicts_and_sizes_are_thread_invariant) {
    for (unsigned threads : {1u, 4u, 8u}) {
        exploration_limits lim;
        lim.threads = threads;
        assertion_row row = run_assertion(c, named("P2"), lim);
        EXPECT_TRUE(row.passed) << threads;
        EXPECT_EQ(row.states, 345016u) << threads;
    }
}

TEST(coverify_faults, a_forgotten_pwm_disable_is_caught_with_a_replayable_trace) {
    context c;
    coverification cv = build_coverification(
        c, options_for_model("mutants/no-disable-hv", time_scale::desk()));
    std::vector<assertion_spec> registry = assertion_registry(cv);
    const assertion_spec* p2 = nullptr;
    for (const auto& a : registry)
        if (a.name == "P2") p2 = &a;
    ASSERT_NE(p2, nullptr);

    // run_assertion replays refinement counterexamples against the
    // implementation before reporting them, so a returned row is already a
    // validated witness.
    assertion_row row = run_assertion(c, *p2);
    EXPECT_FALSE(row.passed);
    EXPECT_NE(row.counterexample_text.find("Power_Off"), std::string::npos)
        << row.counterexample_text;
}

} // namespace
