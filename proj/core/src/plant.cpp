#include "tock/plant.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace tock::plant {

void plant_model::validate() const {
    if (!(tp1 > 0) || !(tp2 > 0)) throw instantiation_error("plant time constants must be positive");
    if (!(kp > 0)) throw instantiation_error("plant gain must be positive");
    if (!(step_s > 0)) throw instantiation_error("plant step must be positive");
    if (!(input_gain > 0)) throw instantiation_error("input gain must be positive");
    if (step_s > tp2 / 10.0) {
        throw step_too_large("step " + std::to_string(step_s) +
                             "s too large for fastest pole (limit " +
                             std::to_string(tp2 / 10.0) + "s)");
    }
}

plant_stepper::plant_stepper(const plant_model& m) {
    m.validate();
    h_ = m.step_s;
    kp_ = m.kp;
    a_ = m.tp1 / (m.tp1 - m.tp2);
    b_ = -m.tp2 / (m.tp1 - m.tp2);
    phi1_ = std::exp(-h_ / m.tp1);
    phi2_ = std::exp(-h_ / m.tp2);
}

void plant_stepper::reset(double u_steady) { x1_ = x2_ = u_steady; }

double plant_stepper::step(double u) {
    x1_ += (1.0 - phi1_) * (u - x1_);
    x2_ += (1.0 - phi2_) * (u - x2_);
    return output();
}

namespace {

double band_width(double band_fraction, double target) {
    double mag = std::abs(target);
    return band_fraction * (mag > 1.0 ? mag : 1.0);
}

} // namespace

sim_result simulate_program(const plant_model& m, const phw_monitor& mon,
                            const input_program& prog, uint64_t max_steps,
                            const trace_sink& sink) {
    plant_stepper st(m);
    st.reset(0.0);
    sim_result r;
    double h = m.step_s;
    int32_t level = 0;
    double t_change = 0.0;
    size_t next_change = 0;
    if (sink) sink(0.0, 0.0, 0.0, -band_width(mon.band_fraction, 0.0));
    for (uint64_t k = 0; k < max_steps; ++k) {
        while (next_change < prog.changes.size() && prog.changes[next_change].at_step == k) {
            if (prog.changes[next_change].level != level) {
                level = prog.changes[next_change].level;
                t_change = static_cast<double>(k) * h;
            }
            ++next_change;
        }
        double y_logical = st.step(static_cast<double>(level) * m.input_gain) / m.input_gain;
        double t = static_cast<double>(k + 1) * h;
        double excess = std::abs(static_cast<double>(level) - y_logical) -
                        band_width(mon.band_fraction, static_cast<double>(level));
        if (sink) sink(t, static_cast<double>(level), y_logical, excess);
        r.steps = k + 1;
        if (t >= t_change + mon.settle_window_s && excess > 0.0) {
            violation_info v;
            v.at_step = k + 1;
            v.t = t;
            v.u = static_cast<double>(level);
            v.y = y_logical;
            v.excess = excess;
            r.violation = v;
            return r;
        }
    }
    return r;
}

std::vector<input_program> exhaustive_programs(const search_params& p, double step_s) {
    std::vector<input_program> out;
    uint64_t dwell_steps = static_cast<uint64_t>(std::llround(p.dwell_s / step_s));
    std::vector<std::vector<int32_t>> frontier{{}};
    out.push_back({});
    for (uint32_t len = 1; len <= p.max_changes; ++len) {
        std::vector<std::vector<int32_t>> next;
        for (const auto& seq : frontier) {
            int32_t prev = seq.empty() ? 0 : seq.back();
            for (int32_t lvl = 0; lvl <= p.max_level; ++lvl) {
                if (lvl == prev) continue;
                auto ext = seq;
                ext.push_back(lvl);
                input_program prog;
                for (size_t j = 0; j < ext.size(); ++j) {
                    prog.changes.push_back({dwell_steps * (j + 1), ext[j]});
                }
                out.push_back(std::move(prog));
                next.push_back(std::move(ext));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

input_program random_program(const search_params& p, double step_s, uint64_t index) {
    std::mt19937_64 rng(p.seed * 0x9E3779B97F4A7C15ull + index + 1);
    uint64_t dwell_steps = static_cast<uint64_t>(std::llround(p.dwell_s / step_s));
    std::uniform_int_distribution<uint32_t> len_dist(0, p.max_changes);
    std::uniform_int_distribution<int32_t> lvl_dist(0, p.max_level);
    uint32_t len = len_dist(rng);
    input_program prog;
    int32_t prev = 0;
    for (uint32_t j = 0; j < len; ++j) {
        int32_t lvl = prev;
        while (lvl == prev) lvl = lvl_dist(rng);
        prog.changes.push_back({dwell_steps * (j + 1), lvl});
        prev = lvl;
    }
    return prog;
}

std::string program_text(const input_program& prog, double step_s) {
    if (prog.changes.empty()) return "constant 0";
    std::ostringstream os;
    for (size_t i = 0; i < prog.changes.size(); ++i) {
        if (i) os << ", ";
        os << "t=" << static_cast<double>(prog.changes[i].at_step) * step_s << "s->"
           << prog.changes[i].level;
    }
    return os.str();
}

search_outcome find_violation(const plant_model& m, const phw_monitor& mon,
                              const search_params& p) {
    m.validate();
    auto t0 = std::chrono::steady_clock::now();
    search_outcome out;
    std::vector<input_program> programs = exhaustive_programs(p, m.step_s);
    for (uint32_t i = 0; i < p.random_programs; ++i) {
        programs.push_back(random_program(p, m.step_s, i));
    }
    out.programs = programs.size();
    for (uint64_t i = 0; i < programs.size(); ++i) {
        sim_result r = simulate_program(m, mon, programs[i], p.max_steps);
        out.steps += r.steps;
        if (r.violation) {
            out.result = search_result::violation;
            out.violation = *r.violation;
            out.violation->program_index = i;
            out.violation->program_text = program_text(programs[i], m.step_s);
            break;
        }
    }
    out.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

// Step the plant from a steady input to a held target and return the earliest
// time after which the (rescaled) output never leaves the band again within a
// 10*(Tp1+Tp2) horizon.
double settle_scan(const plant_model& m, double initial_volts, double input_volts,
                   double target, double divisor, double band, double band_fraction) {
    plant_stepper st(m);
    st.reset(initial_volts);
    double horizon = 10.0 * (m.tp1 + m.tp2);
    uint64_t steps = static_cast<uint64_t>(std::ceil(horizon / m.step_s));
    int64_t last_outside = -1;
    bool outside = std::abs(target - st.output() / divisor) > band;
    if (outside) last_outside = 0;
    for (uint64_t k = 1; k <= steps; ++k) {
        double y = st.step(input_volts) / divisor;
        outside = std::abs(target - y) > band;
        if (outside) last_outside = static_cast<int64_t>(k);
    }
    if (outside) {
        throw non_convergence("output still outside the " + std::to_string(band_fraction) +
                              " band after " + std::to_string(horizon) + "s");
    }
    return static_cast<double>(last_outside + 1) * m.step_s;
}

} // namespace

double estimate_settling_time(const plant_model& m, double band_fraction, double u) {
    m.validate();
    return settle_scan(m, 0.0, u, u, 1.0, band_width(band_fraction, u), band_fraction);
}

double settle_time_after_change(const plant_model& m, double band_fraction,
                                int32_t from_level, int32_t to_level) {
    m.validate();
    return settle_scan(m, static_cast<double>(from_level) * m.input_gain,
                       static_cast<double>(to_level) * m.input_gain,
                       static_cast<double>(to_level), m.input_gain,
                       band_width(band_fraction, static_cast<double>(to_level)),
                       band_fraction);
}

} // namespace tock::plant
