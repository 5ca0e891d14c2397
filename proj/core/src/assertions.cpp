#include "tock/assertions.hpp"

#include "tock/flat_compose.hpp"

#include <chrono>
#include <sstream>

namespace tock::hvc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string refinement_cex_text(const context& ctx, const counterexample& cex) {
    std::ostringstream os;
    os << "trace: " << format_trace(ctx, cex.trace) << "\n";
    os << "refused: " << ctx.label_name(cex.violating) << "\n";
    return os.str();
}

std::string deadlock_cex_text(const context& ctx, const counterexample& cex) {
    std::ostringstream os;
    os << cex.kind << "\n";
    os << "trace: " << format_trace(ctx, cex.trace) << "\n";
    if (!cex.loop.empty()) os << "loop: " << format_trace(ctx, cex.loop) << "\n";
    return os.str();
}

} // namespace

assertion_row run_assertion(context& ctx, const assertion_spec& a,
                            const exploration_limits& lim) {
    assertion_row row;
    row.name = a.name;
    row.statement = a.statement;

    stepper st(ctx);
    auto t0 = std::chrono::steady_clock::now();

    // The implementation side is explored composition-wise: leaf processes are
    // compiled once, the composite is walked as packed state tuples. This keeps
    // peak memory proportional to the sum of the leaves plus the visited
    // product, instead of interning every composite configuration as a term.
    flat_system fs = flatten_composition(st, a.impl, lim);

    switch (a.k) {
    case assertion_spec::kind::trace_refinement: {
        lts spec_lts = compile_lts(st, a.spec, lim);
        dlts spec = determinize(spec_lts, lim.max_states);
        row.compile_seconds = seconds_since(t0);

        auto t1 = std::chrono::steady_clock::now();
        check_outcome out = check_traces_refinement_product(ctx, fs, spec, lim);
        row.verify_seconds = seconds_since(t1);
        row.states = out.stats.product_states;
        row.transitions = 0; // product edges are never materialized
        row.passed = out.result == check_result::pass;
        if (!row.passed) {
            if (!verify_refinement_counterexample(st, a.impl, spec, *out.cex)) {
                throw kernel_error("counterexample for " + a.name +
                                   " does not replay against the implementation");
            }
            row.counterexample_text = refinement_cex_text(ctx, *out.cex);
        }
        break;
    }
    case assertion_spec::kind::timed_deadlock_free: {
        lts impl = compile_lts_product(ctx, fs, lim);
        row.states = impl.num_states();
        row.transitions = impl.edges.size();
        row.compile_seconds = seconds_since(t0);
        auto t1 = std::chrono::steady_clock::now();
        check_outcome out = check_timed_deadlock_free(impl, ctx);
        row.verify_seconds = seconds_since(t1);
        row.passed = out.result == check_result::pass;
        if (!row.passed) row.counterexample_text = deadlock_cex_text(ctx, *out.cex);
        break;
    }
    case assertion_spec::kind::reachable: {
        // Stop the build as soon as a layer produces the marker; the prefix is
        // sound for deciding reachability and usually orders of magnitude
        // smaller than the full space.
        exploration_limits rl = lim;
        rl.stop_at_label = a.marker;
        lts impl = compile_lts_product(ctx, fs, rl);
        row.states = impl.num_states();
        row.transitions = impl.edges.size();
        row.compile_seconds = seconds_since(t0);
        auto t1 = std::chrono::steady_clock::now();
        check_outcome out = check_reachable(impl, a.marker);
        row.verify_seconds = seconds_since(t1);
        row.passed = out.result == check_result::pass;
        if (!row.passed) {
            row.counterexample_text = "marker " + ctx.label_name(a.marker) +
                                      " unreachable in " +
                                      std::to_string(impl.num_states()) + " states\n";
        }
        break;
    }
    }
    return row;
}

} // namespace tock::hvc
