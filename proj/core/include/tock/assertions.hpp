#pragma once

#include "tock/hvc_coverify.hpp"
#include "tock/report.hpp"

namespace tock::hvc {

// Compiles the assertion's process terms, runs the matching check, and fills
// in a report row. Refinement counterexamples are re-validated against the
// uncompiled implementation term before being reported; a counterexample that
// does not replay indicates a checker defect and raises kernel_error.
// Exploration bounds propagate as bound_exceeded.
assertion_row run_assertion(context& ctx, const assertion_spec& a,
                            const exploration_limits& lim = {});

} // namespace tock::hvc
