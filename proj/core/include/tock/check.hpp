#pragma once

#include "tock/lts.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tock {

enum class check_result { pass, fail };

struct counterexample {
    // "trace": spec refused the final label after the preceding prefix.
    // "timelock": a state refusing every event, time included, is reachable.
    // "timed-deadlock": a cycle of states offering only tock is reachable.
    std::string kind;
    std::vector<label_id> trace; // observable prefix leading to the problem
    label_id violating = k_invalid;   // refused label (trace violations)
    std::vector<label_id> loop;       // the quiescent cycle (timed deadlock)
};

struct check_stats {
    uint64_t product_states = 0;
    double seconds = 0.0;
};

struct check_outcome {
    check_result result = check_result::pass;
    std::optional<counterexample> cex;
    check_stats stats;
};

// Traces refinement: every observable sequence of the implementation (visible
// events, tock, termination) must be a trace of the specification. The
// specification must already be determinized. The counterexample, when one
// exists, has minimal observable length and is identical between runs.
check_outcome check_traces_refinement(const lts& impl, const dlts& spec,
                                      uint64_t max_product_states = 400'000'000);

// Channels the implementation can communicate on that the specification never
// mentions; a non-empty result usually means a missing hide or projection.
std::vector<std::string> alphabet_gap(const lts& impl, const dlts& spec, const context& ctx);

// Fails on a reachable state with no transitions at all (timelock) or on a
// reachable cycle whose states offer nothing but tock (the system can let
// time pass forever while refusing every interaction). Post-termination
// states are exempt: quiescence after successful termination is not an error.
check_outcome check_timed_deadlock_free(const lts& m, const context& ctx);

// Passes when an edge labelled `marker` is reachable; the witness trace leads
// to the state offering it.
check_outcome check_reachable(const lts& m, label_id marker);

// Nondeterministic replay of a trace against a process term (subset walk with
// internal-step closure). Used to validate counterexamples independently of
// the compiled transition systems.
bool replay_trace(stepper& st, term_id root, std::span<const label_id> trace);

// A refinement counterexample is genuine iff the implementation can perform
// prefix+violating while the determinized specification accepts the prefix
// but refuses the final label.
bool verify_refinement_counterexample(stepper& impl_stepper, term_id impl_root,
                                      const dlts& spec, const counterexample& cex);

std::string format_trace(const context& ctx, std::span<const label_id> trace);

} // namespace tock
