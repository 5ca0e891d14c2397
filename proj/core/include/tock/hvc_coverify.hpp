#pragma once

#include <string>
#include <vector>

#include "tock/hvc_software.hpp"

namespace tock::hvc {

// Build options for the composed system: the instantiation, the software
// fault switches, and the actuator-delay override used by the slow-actuator
// fault variant (0 keeps the profile's delay).
struct coverify_options {
    instantiation inst;
    model_options software;
    uint32_t evolution_delay_ms_override = 0;
};

// Named fault variants selectable from the command line. "" or "correct"
// yields the faithful model.
coverify_options options_for_model(const std::string& model_name, const time_scale& scale);
std::vector<std::string> known_models();

// The composed co-verification model: hardware abstraction, platform mapping,
// mapped system, specifications and the implementation wrapper, plus every
// assertion target.
struct coverification {
    context* ctx = nullptr;
    coverify_options opts;
    software_model sw;

    // platform channels
    chan_id rp_actualhv_out = k_invalid; // measured voltage, monitor-visible
    chan_id rp_inputv_out = k_invalid;   // commanded voltage into the plant
    chan_id rp_actualhv = k_invalid;     // measured voltage fed back to software
    chan_id rp_actualhv_in = k_invalid;
    chan_id rp_setpoint = k_invalid;     // operator setpoint
    chan_id rp_setpoint_in = k_invalid;
    chan_id rp_pow24v = k_invalid;       // 24V supply level {0, 24}
    chan_id rp_pow24v_in = k_invalid;
    chan_id rp_errorack = k_invalid;
    chan_id rp_errorack_in = k_invalid;
    chan_id ch_e = k_invalid;            // sampled |actual - setpoint|
    chan_id int_rp_setpoint = k_invalid; // latched setpoint relay
    chan_id get_hv = k_invalid, set_hv = k_invalid, change = k_invalid;

    // process terms
    term_id hvc_platform = k_invalid;
    term_id platform_mapping = k_invalid;
    term_id mapped_system = k_invalid;
    term_id spec_p1 = k_invalid;
    term_id impl_p1 = k_invalid;
    term_id spec_p2 = k_invalid;
    term_id spec_p3 = k_invalid;
};

coverification build_coverification(context& c, const coverify_options& opts);

// One entry of the assertion registry.
struct assertion_spec {
    enum class kind { trace_refinement, timed_deadlock_free, reachable };
    std::string name;      // P1..P4, Reach_*
    std::string statement; // human-readable formulation
    kind k = kind::trace_refinement;
    term_id impl = k_invalid;
    term_id spec = k_invalid;    // refinement only
    label_id marker = k_invalid; // reachability only
};

// All ten assertions in report order: P1, P2, P3, P4, Reach_*.
std::vector<assertion_spec> assertion_registry(const coverification& cv);

} // namespace tock::hvc
