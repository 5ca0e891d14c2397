#pragma once

#include "tock/value.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tock::plant {

struct step_too_large : kernel_error {
    using kernel_error::kernel_error;
};
struct non_convergence : kernel_error {
    using kernel_error::kernel_error;
};

// Identified second-order transfer function Kp / ((1 + Tp1 s)(1 + Tp2 s))
// plus the fixed discretization step and the logical-to-volts input gain.
struct plant_model {
    double kp = 1.1196;
    double tp1 = 0.087821; // s
    double tp2 = 0.02042;  // s
    double step_s = 1e-6;
    double input_gain = 5.0; // logical {0,1,2} -> {0,5,10} V

    void validate() const; // throws step_too_large / instantiation_error
};

// Exact zero-order-hold discretization via partial fractions: each real pole
// becomes x' = phi x + (1 - phi) u with phi = exp(-h/T), and the output
// recombines the two pole states. Grid samples coincide with the continuous
// solution for inputs held constant between steps.
class plant_stepper {
public:
    explicit plant_stepper(const plant_model& m);

    void reset(double u_steady = 0.0);
    double step(double u); // advance one step under held input, return output
    double output() const { return kp_ * (a_ * x1_ + b_ * x2_); }
    double step_seconds() const { return h_; }

private:
    double h_, kp_, a_, b_, phi1_, phi2_;
    double x1_ = 0.0, x2_ = 0.0;
};

// Convergence monitor: after each input change the output must be inside the
// band within the settle window and stay there. Signals are compared on the
// logical scale, matching the channel domain of the discrete models.
struct phw_monitor {
    double band_fraction = 0.15;
    double settle_window_s = 0.3668;
};

// Piecewise-constant logical input: starts at level 0; each change applies at
// the beginning of the given step.
struct level_change {
    uint64_t at_step;
    int32_t level;
};
struct input_program {
    std::vector<level_change> changes;
};

struct violation_info {
    uint64_t program_index = 0;
    std::string program_text;
    uint64_t at_step = 0;
    double t = 0, u = 0, y = 0;
    double excess = 0; // E(t) = |u - y| - band*max(u,1), > 0 at a violation
};

enum class search_result { valid_within_bound, violation };

struct search_params {
    uint64_t max_steps = 1'000'000; // simulation budget per input program
    uint32_t max_changes = 3;       // exhaustive enumeration depth
    uint32_t random_programs = 5;
    uint64_t seed = 1;
    double dwell_s = 1.0; // minimum time between input changes
    int32_t max_level = 2;
};

struct search_outcome {
    search_result result = search_result::valid_within_bound;
    uint64_t programs = 0;
    uint64_t steps = 0; // total steps simulated across programs
    double elapsed_s = 0.0;
    std::optional<violation_info> violation;
};

// Optional per-sample sink (t, u_logical, y_logical, E) for trace output.
using trace_sink = std::function<void(double, double, double, double)>;

struct sim_result {
    std::optional<violation_info> violation;
    uint64_t steps = 0;
};

sim_result simulate_program(const plant_model& m, const phw_monitor& mon,
                            const input_program& prog, uint64_t max_steps,
                            const trace_sink& sink = {});

// All change sequences of length <= max_changes at dwell boundaries, then
// `random_programs` seeded random ones; first violation in program order wins.
search_outcome find_violation(const plant_model& m, const phw_monitor& mon,
                              const search_params& p);

std::vector<input_program> exhaustive_programs(const search_params& p, double step_s);
input_program random_program(const search_params& p, double step_s, uint64_t index);
std::string program_text(const input_program& prog, double step_s);

// Earliest t such that the step response to u stays within
// band_fraction*max(u,1) of u from t on; throws non_convergence if the band is
// not settled into within 10*(Tp1+Tp2).
double estimate_settling_time(const plant_model& m, double band_fraction, double u);

// Same criterion for a transition between steady logical levels.
double settle_time_after_change(const plant_model& m, double band_fraction,
                                int32_t from_level, int32_t to_level);

} // namespace tock::plant
