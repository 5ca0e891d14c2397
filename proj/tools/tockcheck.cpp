// Batch verification front end: run assertion subsets over a model variant,
// search the continuous plant for convergence violations, or simulate a single
// input program. Reports mirror the library's verification_report layout.

#include "CLI11.hpp"

#include "tock/assertions.hpp"
#include "tock/hvc_coverify.hpp"
#include "tock/parse.hpp"
#include "tock/plant.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

// Exit codes: 0 every check passed (or the search stayed valid within its
// budget), 1 at least one check failed, 2 a state/time bound was exceeded
// before a verdict, anything else is a usage or I/O error.
constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_bound = 2;
constexpr int exit_usage = 3;

struct common_options {
    std::string profile = "desk";
    std::string model = "correct";
    uint64_t max_states = 200'000'000;
    uint64_t max_millis = 0;
    unsigned threads = 1;
    std::string json_path;
    std::string csv_path;
    std::string out_dir = ".";
};

tock::hvc::time_scale scale_for(const std::string& profile) {
    if (profile == "native") return tock::hvc::time_scale::native();
    if (profile == "desk") return tock::hvc::time_scale::desk();
    throw CLI::ValidationError("--profile", "unknown profile '" + profile + "'");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int run_check(const common_options& common, const std::vector<std::string>& names) {
    tock::context ctx;
    tock::hvc::coverify_options opts =
        tock::hvc::options_for_model(common.model, scale_for(common.profile));
    tock::hvc::coverification cv = tock::hvc::build_coverification(ctx, opts);
    std::vector<tock::hvc::assertion_spec> registry = tock::hvc::assertion_registry(cv);

    std::vector<const tock::hvc::assertion_spec*> selected;
    if (names.size() == 1 && names[0] == "all") {
        for (const auto& a : registry) selected.push_back(&a);
    } else {
        for (const std::string& n : names) {
            const tock::hvc::assertion_spec* hit = nullptr;
            for (const auto& a : registry)
                if (a.name == n) hit = &a;
            if (!hit) {
                std::cerr << "unknown assertion '" << n << "'; known:";
                for (const auto& a : registry) std::cerr << ' ' << a.name;
                std::cerr << "\n";
                return exit_usage;
            }
            selected.push_back(hit);
        }
    }

    tock::exploration_limits lim;
    lim.max_states = common.max_states;
    lim.max_millis = common.max_millis;
    lim.threads = common.threads;

    tock::verification_report report;
    report.model = common.model;
    report.profile = common.profile;

    bool any_fail = false;
    for (const tock::hvc::assertion_spec* a : selected) {
        try {
            tock::assertion_row row = tock::hvc::run_assertion(ctx, *a, lim);
            if (!row.passed) {
                any_fail = true;
                std::filesystem::path cex =
                    std::filesystem::path(common.out_dir) / (a->name + ".cex.txt");
                write_file(cex.string(), row.counterexample_text);
                std::cerr << a->name << ": counterexample written to " << cex.string()
                          << "\n";
            }
            report.rows.push_back(std::move(row));
        } catch (const tock::bound_exceeded& e) {
            std::cerr << a->name << ": bound exceeded (" << e.what() << ")\n";
            std::cout << tock::report_to_text(report);
            return exit_bound;
        }
    }

    std::cout << tock::report_to_text(report);
    if (!common.json_path.empty()) write_file(common.json_path, tock::report_to_json(report));
    if (!common.csv_path.empty()) write_file(common.csv_path, tock::report_to_csv(report));
    return any_fail ? exit_fail : exit_pass;
}

int run_findviolation(const tock::plant::search_params& params, const std::string& json_path) {
    tock::plant::plant_model model;
    tock::plant::phw_monitor monitor;
    tock::plant::search_outcome out = tock::plant::find_violation(model, monitor, params);

    if (out.result == tock::plant::search_result::valid_within_bound) {
        std::cout << "ValidWithinBound: " << out.programs << " programs, " << out.steps
                  << " steps, " << out.elapsed_s << "s\n";
    } else {
        const tock::plant::violation_info& v = *out.violation;
        std::cout << "Violation in program " << v.program_index << " [" << v.program_text
                  << "] at t=" << v.t << "s: u=" << v.u << " y=" << v.y
                  << " excess=" << v.excess << "\n";
    }
    if (!json_path.empty()) {
        std::ostringstream os;
        os << "{\"result\":\""
           << (out.result == tock::plant::search_result::valid_within_bound
                   ? "ValidWithinBound"
                   : "Violation")
           << "\",\"programs\":" << out.programs << ",\"steps\":" << out.steps << "}\n";
        write_file(json_path, os.str());
    }
    return out.result == tock::plant::search_result::valid_within_bound ? exit_pass
                                                                        : exit_fail;
}

int run_sim_plant(const std::vector<std::string>& changes, uint64_t max_steps,
                  const std::string& trace_csv) {
    tock::plant::plant_model model;
    tock::plant::phw_monitor monitor;
    tock::plant::input_program prog;
    for (const std::string& ch : changes) {
        auto colon = ch.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--change", "expected <seconds>:<level>");
        double at_s = std::stod(ch.substr(0, colon));
        int level = std::stoi(ch.substr(colon + 1));
        prog.changes.push_back(
            {static_cast<uint64_t>(at_s / model.step_s + 0.5), level});
    }

    std::ofstream trace;
    tock::plant::trace_sink sink;
    if (!trace_csv.empty()) {
        trace.open(trace_csv, std::ios::binary);
        if (!trace) throw std::runtime_error("cannot write " + trace_csv);
        trace << "t,u,y,excess\n";
        // Thin the trace to ~1kHz so a one-second run stays around a thousand
        // rows regardless of the integration step.
        uint64_t stride = static_cast<uint64_t>(1e-3 / model.step_s + 0.5);
        if (stride == 0) stride = 1;
        uint64_t counter = 0;
        sink = [&trace, stride, counter](double t, double u, double y,
                                         double excess) mutable {
            if (counter++ % stride == 0)
                trace << t << ',' << u << ',' << y << ',' << excess << '\n';
        };
    }

    tock::plant::sim_result res =
        tock::plant::simulate_program(model, monitor, prog, max_steps, sink);
    std::cout << "program: " << tock::plant::program_text(prog, model.step_s) << "\n";
    std::cout << "steps: " << res.steps << "\n";
    if (res.violation) {
        const auto& v = *res.violation;
        std::cout << "violation at t=" << v.t << "s: u=" << v.u << " y=" << v.y
                  << " excess=" << v.excess << "\n";
        return exit_fail;
    }
    std::cout << "no band violation\n";
    return exit_pass;
}

int run_compile(const common_options& common, const std::string& file,
                const std::string& process, const std::string& lts_text_path,
                const std::string& lts_json_path) {
    tock::context ctx;
    tock::parsed_module mod = tock::parse_process_file(ctx, file);
    if (!mod.has(process)) {
        std::cerr << "process '" << process << "' not defined in " << file << "; known:";
        for (const auto& [name, _] : mod.defs) std::cerr << ' ' << name;
        std::cerr << "\n";
        return exit_usage;
    }
    tock::exploration_limits lim;
    lim.max_states = common.max_states;
    lim.threads = common.threads;
    tock::stepper st(ctx);
    try {
        tock::lts m = tock::compile_lts(st, tock::instantiate(ctx, mod, process), lim);
        std::cout << process << ": " << m.num_states() << " states, " << m.edges.size()
                  << " transitions\n";
        if (!lts_text_path.empty()) write_file(lts_text_path, tock::lts_to_text(m, ctx));
        if (!lts_json_path.empty()) write_file(lts_json_path, tock::lts_to_json(m, ctx));
        return exit_pass;
    } catch (const tock::bound_exceeded& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return exit_bound;
    }
}

int run_refine(const common_options& common, const std::string& file,
               const std::string& spec_name, const std::string& impl_name) {
    tock::context ctx;
    tock::parsed_module mod = tock::parse_process_file(ctx, file);
    auto find = [&](const std::string& name) {
        if (!mod.has(name))
            throw std::runtime_error("process '" + name + "' not defined in " + file);
        return tock::instantiate(ctx, mod, name);
    };
    tock::exploration_limits lim;
    lim.max_states = common.max_states;
    lim.threads = common.threads;
    tock::stepper st(ctx);
    try {
        tock::lts spec_lts = tock::compile_lts(st, find(spec_name), lim);
        tock::dlts spec = tock::determinize(spec_lts, lim.max_states);
        tock::lts impl = tock::compile_lts(st, find(impl_name), lim);
        tock::check_outcome out = tock::check_traces_refinement(impl, spec, lim.max_states);
        if (out.result == tock::check_result::pass) {
            std::cout << "Pass: " << impl_name << " refines " << spec_name << " (traces)\n";
            return exit_pass;
        }
        std::cout << "Fail: trace " << tock::format_trace(ctx, out.cex->trace)
                  << " then " << ctx.label_name(out.cex->violating)
                  << " is not allowed by " << spec_name << "\n";
        return exit_fail;
    } catch (const tock::bound_exceeded& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return exit_bound;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tockcheck: discrete-timed process verification for the "
                 "high-voltage controller study"};
    app.set_config("--config", "", "read options from an INI file");
    app.require_subcommand(1);

    common_options common;

    auto add_common = [&](CLI::App* cmd, bool with_model) {
        cmd->add_option("--profile", common.profile,
                        "time profile: native (2ms tick) or desk (10ms tick)")
            ->check(CLI::IsMember({"native", "desk"}))
            ->capture_default_str();
        if (with_model) {
            cmd->add_option("--model", common.model,
                            "model variant (correct or a named fault)")
                ->check(CLI::IsMember(tock::hvc::known_models()))
                ->capture_default_str();
        }
        cmd->add_option("--max-states", common.max_states, "state/pair exploration bound")
            ->capture_default_str();
        cmd->add_option("--max-millis", common.max_millis,
                        "wall-clock bound per compilation (0 = none)");
        cmd->add_option("--threads", common.threads, "worker threads per check")
            ->capture_default_str();
    };

    // check
    std::vector<std::string> names;
    CLI::App* check = app.add_subcommand("check", "run named assertions (or 'all')");
    check->add_option("names", names, "assertion names, or 'all'")->required();
    add_common(check, true);
    check->add_option("--json", common.json_path, "write the report as JSON");
    check->add_option("--csv", common.csv_path, "write the report as CSV");
    check->add_option("--out-dir", common.out_dir, "directory for counterexample files")
        ->capture_default_str();

    // findviolation
    tock::plant::search_params params;
    std::string fv_json;
    CLI::App* fv = app.add_subcommand(
        "findviolation", "search plant input programs for a convergence violation");
    fv->add_option("--max-steps", params.max_steps, "simulation steps per program")
        ->capture_default_str();
    fv->add_option("--max-changes", params.max_changes, "exhaustive program depth")
        ->capture_default_str();
    fv->add_option("--random-programs", params.random_programs,
                   "seeded random programs after the exhaustive set")
        ->capture_default_str();
    fv->add_option("--seed", params.seed, "random program seed")->capture_default_str();
    fv->add_option("--dwell", params.dwell_s, "minimum seconds between input changes")
        ->capture_default_str();
    fv->add_option("--json", fv_json, "write the outcome as JSON");

    // sim-plant
    std::vector<std::string> changes;
    uint64_t sim_steps = 1'000'000;
    std::string trace_csv;
    CLI::App* sim = app.add_subcommand("sim-plant", "simulate one input program");
    sim->add_option("--change", changes, "input change <seconds>:<level>, repeatable");
    sim->add_option("--max-steps", sim_steps, "simulation step budget")
        ->capture_default_str();
    sim->add_option("--trace-csv", trace_csv, "write t,u,y,excess samples");

    // compile
    std::string cfile, cproc, lts_text_path, lts_json_path;
    CLI::App* compile = app.add_subcommand("compile",
                                           "compile a textual process definition");
    compile->add_option("file", cfile, "process definition file")
        ->required()
        ->check(CLI::ExistingFile);
    compile->add_option("process", cproc, "name of the process to compile")->required();
    add_common(compile, false);
    compile->add_option("--text", lts_text_path, "write the transition system as text");
    compile->add_option("--json", lts_json_path, "write the transition system as JSON");

    // refine
    std::string rfile, rspec, rimpl;
    CLI::App* refine = app.add_subcommand(
        "refine", "check traces refinement between two defined processes");
    refine->add_option("file", rfile, "process definition file")
        ->required()
        ->check(CLI::ExistingFile);
    refine->add_option("spec", rspec, "specification process name")->required();
    refine->add_option("impl", rimpl, "implementation process name")->required();
    add_common(refine, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(common, names);
        if (fv->parsed()) return run_findviolation(params, fv_json);
        if (sim->parsed()) return run_sim_plant(changes, sim_steps, trace_csv);
        if (compile->parsed())
            return run_compile(common, cfile, cproc, lts_text_path, lts_json_path);
        if (refine->parsed()) return run_refine(common, rfile, rspec, rimpl);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
