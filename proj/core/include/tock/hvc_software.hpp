#pragma once

#include <string>
#include <vector>

#include "tock/context.hpp"

namespace tock::hvc {

// Mapping from physical durations to discrete tick counts. Every duration used
// by the models must divide evenly by tick_ms; ms()/s() throw
// instantiation_error otherwise so a profile cannot silently distort timing.
struct time_scale {
    std::string name = "native";
    uint32_t tick_ms = 2;

    // controller timing (physical milliseconds)
    uint32_t cycle_ms = 10;
    uint32_t watchdog_initial_ms = 4;
    uint32_t watchdog_mid_ms = 2;  // s0 -> s1
    uint32_t watchdog_rest_ms = 8; // s1 -> s0
    // plant/environment timing
    uint32_t evolution_delay_ms = 370;  // actuator settling delay
    uint32_t holdoff_ms = 22;           // quiet period before setpoint changes
    uint32_t min_interval_ms = 1000;    // minimum gap between setpoint changes
    uint32_t deadline_ms = 3000;        // convergence deadline

    // Reference profile: one tick is 2ms.
    static time_scale native();
    // Coarse profile for fast runs: one tick is 10ms. Delays are rounded up to
    // the next multiple of the tick so the profile never under-approximates a
    // delay, and deadlines are left unchanged.
    static time_scale desk();

    uint32_t ms(uint32_t duration_ms) const;
    uint32_t s(uint32_t duration_s) const;

    uint32_t cycle_ticks() const { return ms(cycle_ms); }
    uint32_t watchdog_initial_ticks() const { return ms(watchdog_initial_ms); }
    uint32_t watchdog_mid_ticks() const { return ms(watchdog_mid_ms); }
    uint32_t watchdog_rest_ticks() const { return ms(watchdog_rest_ms); }
    uint32_t evolution_ticks() const { return ms(evolution_delay_ms); }
    uint32_t holdoff_ticks() const { return ms(holdoff_ms); }
    uint32_t min_interval_ticks() const { return ms(min_interval_ms); }
    uint32_t deadline_ticks() const { return ms(deadline_ms); }
};

// Finite instantiation of the controller's data types.
struct instantiation {
    time_scale scale = time_scale::desk();
    int32_t real_max = 2; // voltage scale {0..real_max}
    int32_t ramp_step = 1;
    // Half-width of the supervision window kept around mSetPoint by
    // AdjustLimits (clamped to the scale). The measured voltage legitimately
    // lags mSetPoint by the whole hardware evolution delay, which at this
    // coarse scale is the full range, so the default window spans the scale;
    // narrower windows are useful for fault injection only.
    int32_t limit_band = 2;
    // Duty-cycle percentages the controller may emit. Must contain at least
    // one representative of each duty2volt band ({0..19}, {20..60}, {61..100}).
    std::vector<int32_t> duty_domain = {0, 40, 80};

    void validate() const; // throws instantiation_error
};

// Fault-injection switches. The default-constructed options describe the
// correct controller; clearing a flag reproduces a known faulty variant.
struct model_options {
    // When false, supplyVoltCheck still records the power loss and enters the
    // error state but forgets to disable the PWM output.
    bool disable_hv_in_supply_check = true;
    // When false, disableHV forgets to reset the internal setpoint to zero.
    bool reset_msetpoint_in_disable = true;
};

// duty2volt percentage banding: {0..19} -> 0, {20..60} -> 1, {61..100} -> 2.
int32_t duty2volt(int32_t duty_percent);

// The constructed software model plus every handle a composition or an
// assertion needs: boundary channels, instrumentation channels, and the named
// process terms.
struct software_model {
    context* ctx = nullptr;
    instantiation inst;
    model_options opts;

    // boundary input channels (asynchronous: one-place overwrite buffers)
    chan_id ext_setpoint_in = k_invalid;
    chan_id ext_actualhv_in = k_invalid;
    chan_id ext_pow24vstatus_in = k_invalid;
    chan_id ext_errorack_in = k_invalid;
    // boundary output channels
    chan_id int_enablepwm_out = k_invalid;
    chan_id int_dutycyclepwm1_out = k_invalid;
    // instrumentation: shared-variable write of the internal setpoint
    chan_id set_msetpoint = k_invalid;
    // instrumentation: state-entry markers (unit channels)
    chan_id state_init = k_invalid;
    chan_id state_wait24vpower = k_invalid;
    chan_id state_closedloop = k_invalid;
    chan_id state_errormode = k_invalid;
    chan_id watchdog_s0 = k_invalid;
    chan_id watchdog_s1 = k_invalid;

    // enum value ids
    value power_on, power_off;

    // Raw composition with every internal channel still visible (controllers,
    // shared-variable processes, boundary buffers).
    term_id composition = k_invalid;
    // Controller semantics: boundary events visible, internals hidden, time
    // prioritized. The deadlock-freedom assertion runs on this term.
    term_id mod_sys = k_invalid;
    // mod_sys with the six state-entry markers left visible.
    term_id mod_sys_instrumented = k_invalid;
    // Projection to {ext_pow24VStatus.in.Power_Off, int_dutyCyclePWM1.out, tock}.
    term_id mod_sys_pwm = k_invalid;
    // Projection to {ext_pow24VStatus.in.Power_Off, set_mSetPoint, tock}.
    term_id mod_sys_setpoint = k_invalid;

    // Event sets useful to compositions: every internal channel (shared
    // variables, buffer reads), and the markers.
    set_id internal_channels = k_invalid;
    set_id marker_channels = k_invalid;

    label_id marker_label(const std::string& which) const; // e.g. "Init", "Watchdog_s0"
};

// Declares all channels and definitions in `c` and builds the model. The
// context must not already contain a model (channel names would collide).
software_model build_software(context& c, const instantiation& inst,
                              const model_options& opts = {});

} // namespace tock::hvc
