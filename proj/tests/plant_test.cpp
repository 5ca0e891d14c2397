// Numeric properties of the analog plant model. The settling-time constants
// come from tests/oracles/plant_settle_oracle.py, which evaluates the
// closed-form solution of the second-order lag instead of iterating the
// stepper recurrence.

#include "tock/plant.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace tock::plant;

namespace {

constexpr double settle_tol = 2e-6; // one step of slack on either side

struct plant : ::testing::Test {
    plant_model m; // defaults: kp=1.1196, tp1=0.087821, tp2=0.02042, h=1e-6
};

TEST_F(plant, dc_gain_matches_the_identified_model) {
    plant_stepper st(m);
    st.reset(0.0);
    double u = 5.0;
    for (int k = 0; k < 2'000'000; ++k) st.step(u); // 2 s ≫ slowest pole
    EXPECT_NEAR(st.output() / u, 1.1196, 1e-6);
}

TEST_F(plant, dc_gain_is_input_level_independent) {
    for (double u : {1.0, 2.5, 10.0}) {
        plant_stepper st(m);
        st.reset(0.0);
        for (int k = 0; k < 2'000'000; ++k) st.step(u);
        EXPECT_NEAR(st.output() / u, 1.1196, 1e-6) << "u=" << u;
    }
}

TEST_F(plant, reset_puts_the_plant_at_steady_state) {
    plant_stepper st(m);
    st.reset(5.0);
    EXPECT_NEAR(st.output(), 1.1196 * 5.0, 1e-9);
    st.step(5.0);
    EXPECT_NEAR(st.output(), 1.1196 * 5.0, 1e-9); // holding the input holds y
}

TEST_F(plant, band_entry_times_match_the_closed_form_oracle) {
    struct row { int32_t from, to; double entry_s; };
    const row oracle[] = {
        {0, 1, 0.148202}, {0, 2, 0.148202}, {1, 0, 0.199759},
        {1, 2, 0.086616}, {2, 0, 0.260642}, {2, 1, 0.339949},
    };
    for (const row& r : oracle) {
        double got = settle_time_after_change(m, 0.15, r.from, r.to);
        EXPECT_NEAR(got, r.entry_s, settle_tol) << r.from << "->" << r.to;
    }
}

TEST_F(plant, unit_step_settling_estimate_matches_the_oracle) {
    EXPECT_NEAR(estimate_settling_time(m, 0.15, 1.0), 0.148202, settle_tol);
    // the band is relative for |u| >= 1, so the entry time is scale-free
    EXPECT_NEAR(estimate_settling_time(m, 0.15, 5.0), 0.148202, settle_tol);
}

TEST_F(plant, every_level_transition_converges_inside_the_monitor_window) {
    phw_monitor mon;
    double worst = 0.0;
    for (int32_t from = 0; from <= 2; ++from)
        for (int32_t to = 0; to <= 2; ++to) {
            if (from == to) continue;
            worst = std::max(worst, settle_time_after_change(m, mon.band_fraction, from, to));
        }
    EXPECT_NEAR(worst, 0.339949, settle_tol);
    EXPECT_LE(worst, mon.settle_window_s);
    EXPECT_LE(worst, 0.370); // convergence beats the hardware evolution delay
}

TEST_F(plant, halving_the_step_moves_band_entry_by_under_two_microseconds) {
    plant_model half = m;
    half.step_s = m.step_s / 2.0;
    for (int32_t from : {1, 2}) {
        double coarse = settle_time_after_change(m, 0.15, from, 3 - from);
        double fine = settle_time_after_change(half, 0.15, from, 3 - from);
        EXPECT_LT(std::abs(coarse - fine), 2e-6) << from << "->" << 3 - from;
    }
}

TEST_F(plant, model_validation_rejects_bad_parameters) {
    plant_model bad = m;
    bad.step_s = 3e-3; // fastest pole is 0.02042 s: limit is tp2/10
    EXPECT_THROW(plant_stepper{bad}, step_too_large);
    bad = m;
    bad.kp = 0.0;
    EXPECT_THROW(plant_stepper{bad}, tock::instantiation_error);
    bad = m;
    bad.tp2 = -1.0;
    EXPECT_THROW(plant_stepper{bad}, tock::instantiation_error);
}

TEST_F(plant, exhaustive_programs_cover_every_level_sequence_once) {
    search_params p;
    auto programs = exhaustive_programs(p, m.step_s);
    // empty + 2 + 2*2 + 4*2 distinct no-repeat sequences over levels {0,1,2}
    EXPECT_EQ(programs.size(), 15u);
    std::set<std::string> seen;
    for (const auto& prog : programs) {
        EXPECT_TRUE(seen.insert(program_text(prog, m.step_s)).second);
        int32_t prev = 0;
        uint64_t prev_step = 0;
        for (const auto& ch : prog.changes) {
            EXPECT_NE(ch.level, prev); // consecutive levels always differ
            EXPECT_GT(ch.at_step, prev_step);
            prev = ch.level;
            prev_step = ch.at_step;
        }
    }
}

TEST_F(plant, random_programs_are_reproducible_for_a_seed) {
    search_params p;
    auto a = random_program(p, m.step_s, 3);
    auto b = random_program(p, m.step_s, 3);
    EXPECT_EQ(program_text(a, m.step_s), program_text(b, m.step_s));
    p.seed = 99;
    bool any_differs = false;
    for (uint64_t i = 0; i < 5 && !any_differs; ++i) {
        any_differs = program_text(random_program(p, m.step_s, i), m.step_s) !=
                      program_text(random_program(search_params{}, m.step_s, i), m.step_s);
    }
    EXPECT_TRUE(any_differs);
}

TEST_F(plant, bounded_search_reports_valid_within_bound) {
    search_params p;
    p.max_steps = 1'000;
    search_outcome out = find_violation(m, phw_monitor{}, p);
    EXPECT_EQ(out.result, search_result::valid_within_bound);
    EXPECT_EQ(out.programs, 20u); // 15 exhaustive + 5 random
    EXPECT_FALSE(out.violation.has_value());
}

TEST_F(plant, monitor_flags_an_output_stuck_outside_the_band) {
    // an impossibly short window turns normal transport lag into a violation
    phw_monitor mon;
    mon.settle_window_s = 1e-4;
    input_program prog;
    prog.changes.push_back({0, 2});
    sim_result r = simulate_program(m, mon, prog, 10'000);
    ASSERT_TRUE(r.violation.has_value());
    EXPECT_NEAR(r.violation->u, 2.0, 1e-12);
    EXPECT_GT(r.violation->excess, 0.0);
    EXPECT_GE(r.violation->t, mon.settle_window_s);
    EXPECT_LT(r.violation->y, 2.0); // still climbing toward the target
}

TEST_F(plant, settled_scan_rejects_bands_that_never_contain_the_output) {
    // steady-state error is (kp-1)*u, so a sliver band around u is unreachable
    EXPECT_THROW(estimate_settling_time(m, 0.01, 1.0), non_convergence);
}

} // namespace
