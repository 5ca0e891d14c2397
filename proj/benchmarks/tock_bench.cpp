#include "tock/check.hpp"
#include "tock/flat_compose.hpp"
#include "tock/parse.hpp"
#include "tock/plant.hpp"

#include "benchmark/benchmark.h"

#include <memory>
#include <string>

namespace {

using namespace tock;

// A chain of n one-place cells handing values over hidden internal channels:
// the classic scaling composition whose state space grows with the product of
// the cells.
std::string chain_source(int cells) {
    std::string src = "channel io : {0..1}\n";
    for (int i = 1; i < cells; ++i)
        src += "channel m" + std::to_string(i) + " : {0..1}\n";
    auto chan = [&](int i) {
        if (i == 0) return std::string("io");
        if (i == cells) return std::string("io");
        return "m" + std::to_string(i);
    };
    std::string par;
    for (int i = 0; i < cells; ++i) {
        std::string name = "C" + std::to_string(i);
        src += name + " = " + chan(i) + "?x -> " + chan(i + 1) + "!x -> " + name + "\n";
        if (i == 0) {
            par = name;
        } else {
            par = "(" + par + " [| {" + chan(i) + "} |] " + name + ")";
        }
    }
    // the boundary channel stays visible at both ends; the relay channels are
    // hidden, so progress between cells is internal work
    std::string hide = "{";
    for (int i = 1; i < cells; ++i) hide += (i > 1 ? ", " : "") + chan(i);
    hide += "}";
    src += "Chain = TP(" + par + " \\ " + hide + ")\n";
    return src;
}

void bm_kernel_successors(benchmark::State& state) {
    context c;
    parsed_module mod = parse_process_text(c, chain_source(4));
    stepper st(c);
    term_id root = c.t_timed_priority(instantiate(c, mod, "Chain"));

    // walk the graph depth-first forever, counting individual successor
    // expansions; this measures raw small-step interpretation speed
    uint64_t expansions = 0;
    term_id t = root;
    for (auto _ : state) {
        stepper::succ_list succ = st.successors(t);
        benchmark::DoNotOptimize(succ.get());
        ++expansions;
        t = succ->empty() ? root : (*succ)[expansions % succ->size()].target;
    }
    state.SetItemsProcessed(int64_t(expansions));
}

void bm_compile_chain(benchmark::State& state) {
    const int cells = int(state.range(0));
    uint64_t states = 0;
    for (auto _ : state) {
        context c;
        parsed_module mod = parse_process_text(c, chain_source(cells));
        stepper st(c);
        lts m = compile_lts(st, instantiate(c, mod, "Chain"));
        states += m.num_states();
        benchmark::DoNotOptimize(m.row.data());
    }
    state.SetItemsProcessed(int64_t(states));
}

void bm_compile_product_vs_direct(benchmark::State& state) {
    const int cells = int(state.range(0));
    uint64_t states = 0;
    for (auto _ : state) {
        context c;
        parsed_module mod = parse_process_text(c, chain_source(cells));
        stepper st(c);
        flat_system fs = flatten_composition(st, instantiate(c, mod, "Chain"));
        lts m = compile_lts_product(c, fs);
        states += m.num_states();
        benchmark::DoNotOptimize(m.row.data());
    }
    state.SetItemsProcessed(int64_t(states));
}

void bm_determinize(benchmark::State& state) {
    context c;
    parsed_module mod = parse_process_text(c, chain_source(int(state.range(0))));
    stepper st(c);
    lts m = compile_lts(st, instantiate(c, mod, "Chain"));
    uint64_t states = 0;
    for (auto _ : state) {
        dlts d = determinize(m);
        states += d.num_states();
        benchmark::DoNotOptimize(d.edges.data());
    }
    state.SetItemsProcessed(int64_t(states));
}

void bm_refinement_check(benchmark::State& state) {
    context c;
    parsed_module mod = parse_process_text(c, chain_source(int(state.range(0))) +
                                                  "Spec = TRUN({io})\n");
    stepper st(c);
    lts impl = compile_lts(st, c.t_timed_priority(instantiate(c, mod, "Chain")));
    dlts spec =
        determinize(compile_lts(st, c.t_timed_priority(instantiate(c, mod, "Spec"))));
    uint64_t pairs = 0;
    for (auto _ : state) {
        check_outcome out = check_traces_refinement(impl, spec);
        pairs += out.stats.product_states;
        benchmark::DoNotOptimize(out.result);
    }
    state.SetItemsProcessed(int64_t(pairs));
}

void bm_plant_step(benchmark::State& state) {
    plant::plant_model model;
    plant::plant_stepper ps(model);
    double u = 5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ps.step(u));
    }
    state.SetItemsProcessed(int64_t(state.iterations()));
}

void bm_plant_settling_estimate(benchmark::State& state) {
    plant::plant_model model;
    for (auto _ : state) {
        benchmark::DoNotOptimize(plant::estimate_settling_time(model, 0.15, 1.0));
    }
}

} // namespace

BENCHMARK(bm_kernel_successors);
BENCHMARK(bm_compile_chain)->Arg(3)->Arg(5)->Arg(7);
BENCHMARK(bm_compile_product_vs_direct)->Arg(3)->Arg(5)->Arg(7);
BENCHMARK(bm_determinize)->Arg(5);
BENCHMARK(bm_refinement_check)->Arg(5);
BENCHMARK(bm_plant_step);
BENCHMARK(bm_plant_settling_estimate);

BENCHMARK_MAIN();
