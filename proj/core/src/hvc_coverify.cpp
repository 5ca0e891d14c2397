#include "tock/hvc_coverify.hpp"

#include <array>

namespace tock::hvc {

coverify_options options_for_model(const std::string& model_name, const time_scale& scale) {
    coverify_options o;
    o.inst.scale = scale;
    if (model_name.empty() || model_name == "correct") return o;
    if (model_name == "mutants/no-disable-hv") {
        o.software.disable_hv_in_supply_check = false;
        return o;
    }
    if (model_name == "mutants/no-msetpoint-reset") {
        o.software.reset_msetpoint_in_disable = false;
        return o;
    }
    if (model_name == "mutants/slow-evolution") {
        o.evolution_delay_ms_override = 3200;
        return o;
    }
    throw instantiation_error("unknown model '" + model_name +
                              "' (expected 'correct' or mutants/{no-disable-hv,"
                              "no-msetpoint-reset,slow-evolution})");
}

std::vector<std::string> known_models() {
    return {"correct", "mutants/no-disable-hv", "mutants/no-msetpoint-reset",
            "mutants/slow-evolution"};
}

namespace {

struct builder {
    context& c;
    const coverify_options& opts;
    coverification m;

    func_id f_duty2volt = k_invalid;
    func_id f_abs_diff = k_invalid;
    func_id f_power_status = k_invalid;
    def_id d_hv = k_invalid;
    value v_on, v_off;

    builder(context& ctx, const coverify_options& o) : c(ctx), opts(o) {}

    uint32_t evolution_ticks() const {
        uint32_t delay_ms = opts.evolution_delay_ms_override
                                ? opts.evolution_delay_ms_override
                                : opts.inst.scale.evolution_delay_ms;
        return opts.inst.scale.ms(delay_ms);
    }

    std::vector<value> real_domain() const {
        std::vector<value> d;
        for (int32_t i = 0; i <= opts.inst.real_max; ++i) d.push_back(value::of_int(i));
        return d;
    }

    void declare_channels() {
        auto reals = real_domain();
        m.rp_actualhv_out = c.declare_channel("RPActualHV_out", reals);
        m.rp_inputv_out = c.declare_channel("RPInputV_out", reals);
        m.rp_actualhv = c.declare_channel("RPActualHV", reals);
        m.rp_actualhv_in = c.declare_channel("RPActualHV_in", reals);
        m.rp_setpoint = c.declare_channel("RPsetPoint", reals);
        m.rp_setpoint_in = c.declare_channel("RPsetPoint_in", reals);
        std::vector<value> volts24{value::of_int(0), value::of_int(24)};
        m.rp_pow24v = c.declare_channel("RPpow24V", volts24);
        m.rp_pow24v_in = c.declare_channel("RPpow24V_in", volts24);
        m.rp_errorack = c.declare_unit_channel("RPerrorAck");
        m.rp_errorack_in = c.declare_unit_channel("RPerrorAck_in");
        m.ch_e = c.declare_channel("e", reals);
        m.int_rp_setpoint = c.declare_channel("int_RPsetPoint", reals);
        m.get_hv = c.declare_channel("get_HV", reals);
        m.set_hv = c.declare_channel("set_HV", reals);
        m.change = c.declare_channel("change", reals);
    }

    void declare_funcs() {
        f_duty2volt = c.declare_native_func("duty2volt", 1, [](std::span<const value> a) {
            return value::of_int(duty2volt(a[0].as_int()));
        });
        f_abs_diff = c.declare_native_func("abs_diff", 2, [](std::span<const value> a) {
            int32_t d = a[0].as_int() - a[1].as_int();
            return value::of_int(d >= 0 ? d : -d);
        });
        value on = v_on, off = v_off;
        f_power_status = c.declare_native_func(
            "powerStatus", 1,
            [on, off](std::span<const value> a) { return a[0].as_bool() ? on : off; });
    }

    // HV(x) = set_HV?nv -> HV(nv) [] get_HV!x -> HV(x)
    term_id hv_cell() {
        if (d_hv == k_invalid) {
            d_hv = c.declare_def("HV", 1);
            term_id body = c.t_choice2(
                c.t_prefix_in(m.set_hv, c.t_call(d_hv, std::array{c.e_var(0)})),
                c.t_prefix_out(m.get_hv, c.e_var(0),
                               c.t_call(d_hv, std::array{c.e_var(0)})));
            c.set_def_body(d_hv, body);
        }
        return c.t_call_v(d_hv, std::array{value::of_int(0)});
    }

    // Detector = RPInputV_out?nv -> get_HV?x ->
    //            (if nv != x then change!nv -> Detector else Detector)
    term_id detector() {
        def_id d = c.declare_def("Detector", 0);
        term_id again = c.t_call(d);
        term_id body = c.t_prefix_in(
            m.rp_inputv_out,
            c.t_prefix_in(m.get_hv,
                          c.t_cond(c.e_bin(bin_op::ne, c.e_var(1), c.e_var(0)),
                                   c.t_prefix_out(m.change, c.e_var(1), again), again)));
        c.set_def_body(d, body);
        return c.t_call(d);
    }

    // Evolution = change?x -> ((WAIT(delay); set_HV!x -> Evolution) [] Evolution)
    // The bare second branch lets a pending update be abandoned when a fresh
    // change arrives before the delay elapses.
    term_id evolution() {
        def_id d = c.declare_def("Evolution", 0);
        term_id again = c.t_call(d);
        term_id commit = c.t_seq(c.t_wait(evolution_ticks()),
                                 c.t_prefix_out(m.set_hv, c.e_var(0), again));
        c.set_def_body(d, c.t_prefix_in(m.change, c.t_choice2(commit, again)));
        return c.t_call(d);
    }

    // The hardware abstraction: a detector triggers a delayed output-voltage
    // update; a renamed state cell makes the measured voltage continuously
    // readable on RPActualHV_out.
    void build_platform() {
        rel_id set_to_change = c.make_rename({{m.set_hv, m.change}});
        term_id follower = c.t_rename(hv_cell(), set_to_change);
        term_id stateful_evolution =
            c.t_parallel(evolution(), c.set_of_channels({m.change}), follower);
        set_id detect_sync = c.set_of_channels({m.change, m.get_hv});
        term_id hardware = c.t_hide(
            c.t_parallel(detector(), detect_sync, stateful_evolution), detect_sync);
        rel_id get_to_out = c.make_rename({{m.get_hv, m.rp_actualhv_out}});
        term_id readout = c.t_rename(hv_cell(), get_to_out);
        set_id hv_sync = c.set_of_channels({m.set_hv});
        m.hvc_platform = c.t_timed_priority(
            c.t_hide(c.t_parallel(readout, hv_sync, hardware), hv_sync));
    }

    // PWM_Map(pwm) = int_enablePWM.out?x ->
    //                  ((if x == false then RPInputV_out!0 -> SKIP else SKIP); PWM_Map(x))
    //             [] int_dutyCyclePWM1.out?x ->
    //                  ((if pwm then RPInputV_out!duty2volt(x) -> SKIP else SKIP);
    //                   PWM_Map(pwm))
    term_id pwm_map() {
        def_id d = c.declare_def("PWM_Map", 1);
        term_id enable_branch = c.t_prefix_in(
            m.sw.int_enablepwm_out,
            c.t_seq(c.t_cond(c.e_not(c.e_var(0)),
                             c.t_prefix_out(m.rp_inputv_out, value::of_int(0), c.t_skip()),
                             c.t_skip()),
                    c.t_call(d, std::array{c.e_var(0)})));
        expr_id volts = c.e_apply(f_duty2volt, std::array{c.e_var(0)});
        term_id duty_branch = c.t_prefix_in(
            m.sw.int_dutycyclepwm1_out,
            c.t_seq(c.t_cond(c.e_var(1), c.t_prefix_out(m.rp_inputv_out, volts, c.t_skip()),
                             c.t_skip()),
                    c.t_call(d, std::array{c.e_var(1)})));
        c.set_def_body(d, c.t_choice2(enable_branch, duty_branch));
        return c.t_prefix_out(m.rp_inputv_out, value::of_int(0),
                              c.t_call_v(d, std::array{value::of_bool(false)}));
    }

    // Pow24_Map(pwr) = RPpow24V_in?x:{18<=x<=24} -> Pow24_Map(true)
    //               [] RPpow24V_in?x:{!(18<=x<=24)} -> Pow24_Map(false)
    //               [] ext_pow24VStatus.in!(pwr ? On : Off) -> Pow24_Map(pwr)
    term_id pow24_map() {
        def_id d = c.declare_def("Pow24_Map", 1);
        expr_id in_range = c.e_bin(bin_op::logical_and,
                                   c.e_bin(bin_op::ge, c.e_var(0), c.e_int(18)),
                                   c.e_bin(bin_op::le, c.e_var(0), c.e_int(24)));
        term_id stable = c.t_prefix_in(m.rp_pow24v_in, in_range,
                                       c.t_call(d, std::array{c.e_bool(true)}));
        term_id unstable = c.t_prefix_in(m.rp_pow24v_in, c.e_not(in_range),
                                         c.t_call(d, std::array{c.e_bool(false)}));
        term_id report =
            c.t_prefix_out(m.sw.ext_pow24vstatus_in,
                           c.e_apply(f_power_status, std::array{c.e_var(0)}),
                           c.t_call(d, std::array{c.e_var(0)}));
        c.set_def_body(d, c.t_choice({stable, unstable, report}));
        return c.t_call_v(d, std::array{value::of_bool(true)});
    }

    void build_platform_mapping() {
        m.platform_mapping = c.t_timed_priority(c.t_interleave(pwm_map(), pow24_map()));
    }

    // The software renamed onto platform channel names, composed with the
    // mapping, then connected to the hardware abstraction with perfect sensing
    // (the measured voltage is fed straight back as the software's input).
    void build_mapped_system() {
        rel_id to_rp_in = c.make_rename({{m.sw.ext_actualhv_in, m.rp_actualhv_in},
                                         {m.sw.ext_errorack_in, m.rp_errorack_in},
                                         {m.sw.ext_setpoint_in, m.rp_setpoint_in}});
        term_id software = c.t_rename(m.sw.mod_sys, to_rp_in);

        set_id pmap_sync = c.set_of_channels(
            {m.sw.int_enablepwm_out, m.sw.int_dutycyclepwm1_out, m.sw.ext_pow24vstatus_in});
        term_id software_pmap =
            c.t_hide(c.t_parallel(software, pmap_sync, m.platform_mapping), pmap_sync);

        rel_id to_platform = c.make_rename({{m.rp_actualhv_in, m.rp_actualhv},
                                            {m.rp_errorack_in, m.rp_errorack},
                                            {m.rp_pow24v_in, m.rp_pow24v},
                                            {m.rp_setpoint_in, m.rp_setpoint}});
        term_id mapped_software = c.t_rename(software_pmap, to_platform);

        // One-to-two rename: the measured voltage stays observable and also
        // feeds the software input.
        rel_id dual = c.make_rename({{m.rp_actualhv_out, m.rp_actualhv_out},
                                     {m.rp_actualhv_out, m.rp_actualhv}});
        term_id platform_dual = c.t_rename(m.hvc_platform, dual);

        set_id link = c.set_of_channels({m.rp_inputv_out, m.rp_actualhv});
        m.mapped_system = c.t_timed_priority(
            c.t_hide(c.t_parallel(mapped_software, link, platform_dual), link));
    }

    // SpecP1 = TP(Follow):
    // Follow = e?x -> (if x == 0 then Follow
    //                  else ((ADeadline({|e|}, {e.0}, d); TRUN({e.0}))
    //                        /\ RPsetPoint?x -> Follow))
    //       [] RPsetPoint?x -> Follow
    void build_spec_p1() {
        uint32_t d_ticks = opts.inst.scale.deadline_ticks();
        def_id d = c.declare_def("Follow", 0);
        term_id again = c.t_call(d);
        value_id zero = c.intern_value(value::of_int(0));
        set_id all_e = c.set_of_channels({m.ch_e});
        set_id e_zero = c.make_event_set(false, {{m.ch_e, zero}});
        term_id window =
            c.t_seq(c.t_action_deadline(all_e, e_zero, d_ticks), c.t_trun(e_zero));
        term_id converge = c.t_interrupt(window, c.t_prefix_in(m.rp_setpoint, again));
        term_id on_e = c.t_prefix_in(
            m.ch_e, c.t_cond(c.e_bin(bin_op::eq, c.e_var(0), c.e_int(0)), again, converge));
        c.set_def_body(d, c.t_choice2(on_e, c.t_prefix_in(m.rp_setpoint, again)));
        m.spec_p1 = c.t_timed_priority(c.t_call(d));
    }

    // Error(ahv, sp) = RPsetPoint?x -> Error(ahv, x)
    //               [] RPActualHV_out?x -> Error(x, sp)
    //               [] e!abs_diff(ahv, sp) -> Error(ahv, sp)
    term_id error_monitor() {
        def_id d = c.declare_def("Error", 2);
        // Parameters: ahv is var 1, sp is var 0; one binder deeper they shift up.
        term_id on_sp = c.t_prefix_in(m.rp_setpoint,
                                      c.t_call(d, std::array{c.e_var(2), c.e_var(0)}));
        term_id on_hv = c.t_prefix_in(m.rp_actualhv_out,
                                      c.t_call(d, std::array{c.e_var(0), c.e_var(1)}));
        expr_id diff = c.e_apply(f_abs_diff, std::array{c.e_var(1), c.e_var(0)});
        term_id emit = c.t_prefix_out(m.ch_e, diff,
                                      c.t_call(d, std::array{c.e_var(1), c.e_var(0)}));
        c.set_def_body(d, c.t_choice({on_sp, on_hv, emit}));
        return c.t_call_v(d, std::array{value::of_int(0), value::of_int(0)});
    }

    // Sampler = EndBy(RPActualHV_out?x -> e?y -> SKIP, 0); WAIT(1); Sampler
    // Forces exactly one measurement and one error sample per tick.
    term_id sampler() {
        def_id d = c.declare_def("Sampler", 0);
        term_id sample = c.t_end_by(
            c.t_prefix_in(m.rp_actualhv_out, c.t_prefix_in(m.ch_e, c.t_skip())), 0);
        c.set_def_body(d, c.t_seq({sample, c.t_wait(1), c.t_call(d)}));
        return c.t_call(d);
    }

    // RPEventMapping(x) = RPsetPoint?nv -> RPEventMapping(nv)
    //                  [] int_RPsetPoint!x -> RPEventMapping(x)
    // An asynchronous relay: external setpoint changes are latched and the
    // latest value is continuously offered to the system.
    term_id rp_event_mapping() {
        def_id d = c.declare_def("RPEventMapping", 1);
        term_id body = c.t_choice2(
            c.t_prefix_in(m.rp_setpoint, c.t_call(d, std::array{c.e_var(0)})),
            c.t_prefix_out(m.int_rp_setpoint, c.e_var(0),
                           c.t_call(d, std::array{c.e_var(0)})));
        c.set_def_body(d, body);
        return c.t_call_v(d, std::array{value::of_int(0)});
    }

    // ImplP1: the mapped system under the environment assumptions (no error
    // acknowledgements, stable 24V supply, rate-limited setpoint changes) with
    // the error monitor sampled once per tick.
    void build_impl_p1() {
        term_id assumption_errorack = c.t_stop();
        term_id assumption_pow24 =
            c.t_prefix_out(m.rp_pow24v, value::of_int(24), c.t_stop());

        set_id ack_set = c.set_of_channels({m.rp_errorack});
        term_id sys =
            c.t_hide(c.t_parallel(m.mapped_system, ack_set, assumption_errorack), ack_set);
        set_id pow_set = c.set_of_channels({m.rp_pow24v});
        term_id system_p1 =
            c.t_hide(c.t_parallel(sys, pow_set, assumption_pow24), pow_set);

        rel_id sp_internal = c.make_rename({{m.rp_setpoint, m.int_rp_setpoint}});
        set_id relay_set = c.set_of_channels({m.int_rp_setpoint});
        term_id rp_system_p1 = c.t_hide(
            c.t_parallel(c.t_rename(system_p1, sp_internal), relay_set, rp_event_mapping()),
            relay_set);

        term_id monitor =
            c.t_parallel(error_monitor(),
                         c.set_of_channels({m.rp_actualhv_out, m.ch_e}), sampler());
        set_id probe = c.set_of_channels({m.rp_setpoint, m.rp_actualhv_out});
        term_id e_system_p1 = c.t_hide(c.t_parallel(rp_system_p1, probe, monitor),
                                       c.set_of_channels({m.rp_actualhv_out}));

        // Assumption_SetPoint = EndBy(RPsetPoint.0 -> SKIP, 0); WAIT(holdoff); RPChange
        // RPChange = RPsetPoint?x -> WAIT(interval); RPChange
        def_id d_change = c.declare_def("RPChange", 0);
        c.set_def_body(
            d_change,
            c.t_prefix_in(m.rp_setpoint,
                          c.t_seq(c.t_wait(opts.inst.scale.min_interval_ticks()),
                                  c.t_call(d_change))));
        term_id assumption_setpoint = c.t_seq(
            {c.t_end_by(c.t_prefix_out(m.rp_setpoint, value::of_int(0), c.t_skip()), 0),
             c.t_wait(opts.inst.scale.holdoff_ticks()), c.t_call(d_change)});

        m.impl_p1 = c.t_timed_priority(c.t_parallel(
            e_system_p1, c.set_of_channels({m.rp_setpoint}), assumption_setpoint));
    }

    // SpecP2 = TP(PWM_off):
    // PWM_Behaviour = duty?x:{x>0} -> PWM_on [] duty.0 -> PWM_off
    // PWM_off = PWM_Behaviour [] Power_Off -> PWM_off
    // PWM_on  = PWM_Behaviour
    //        [] Power_Off -> ADeadline({Power_Off, duty}, {duty.0}, ms(10)); PWM_off
    void build_spec_p2() {
        chan_id duty = m.sw.int_dutycyclepwm1_out;
        chan_id pow = m.sw.ext_pow24vstatus_in;
        value_id off_id = c.intern_value(v_off);
        value_id duty0 = c.intern_value(value::of_int(0));

        def_id d_beh = c.declare_def("PWM_Behaviour", 0);
        def_id d_off = c.declare_def("PWM_off", 0);
        def_id d_on = c.declare_def("PWM_on", 0);

        c.set_def_body(
            d_beh,
            c.t_choice2(c.t_prefix_in(duty, c.e_bin(bin_op::gt, c.e_var(0), c.e_int(0)),
                                      c.t_call(d_on)),
                        c.t_prefix_out(duty, value::of_int(0), c.t_call(d_off))));
        c.set_def_body(d_off, c.t_choice2(c.t_call(d_beh),
                                          c.t_prefix_out(pow, v_off, c.t_call(d_off))));
        set_id window_s = c.make_event_set(false, {{pow, off_id}, {duty, k_invalid}});
        set_id window_e = c.make_event_set(false, {{duty, duty0}});
        term_id deadline = c.t_seq(
            c.t_action_deadline(window_s, window_e, opts.inst.scale.ms(10)),
            c.t_call(d_off));
        c.set_def_body(d_on, c.t_choice2(c.t_call(d_beh),
                                         c.t_prefix_out(pow, v_off, deadline)));
        m.spec_p2 = c.t_timed_priority(c.t_call(d_off));
    }

    // SpecP3 mirrors SpecP2 over internal-setpoint writes: after a power-off
    // report the controller must write mSetPoint := 0 within 10ms.
    void build_spec_p3() {
        chan_id msp = m.sw.set_msetpoint;
        chan_id pow = m.sw.ext_pow24vstatus_in;
        value_id off_id = c.intern_value(v_off);
        value_id zero = c.intern_value(value::of_int(0));

        def_id d_beh = c.declare_def("mSetPoint_Behaviour", 0);
        def_id d_zero = c.declare_def("mSetPoint_zero", 0);
        def_id d_nz = c.declare_def("mSetPoint_non_zero", 0);

        c.set_def_body(
            d_beh,
            c.t_choice2(c.t_prefix_in(msp, c.e_bin(bin_op::gt, c.e_var(0), c.e_int(0)),
                                      c.t_call(d_nz)),
                        c.t_prefix_out(msp, value::of_int(0), c.t_call(d_zero))));
        c.set_def_body(d_zero, c.t_choice2(c.t_call(d_beh),
                                           c.t_prefix_out(pow, v_off, c.t_call(d_zero))));
        set_id window_s = c.make_event_set(false, {{pow, off_id}, {msp, k_invalid}});
        set_id window_e = c.make_event_set(false, {{msp, zero}});
        term_id deadline = c.t_seq(
            c.t_action_deadline(window_s, window_e, opts.inst.scale.ms(10)),
            c.t_call(d_zero));
        c.set_def_body(d_nz, c.t_choice2(c.t_call(d_beh),
                                         c.t_prefix_out(pow, v_off, deadline)));
        m.spec_p3 = c.t_timed_priority(c.t_call(d_zero));
    }

    coverification build() {
        m.ctx = &c;
        m.opts = opts;
        m.sw = build_software(c, opts.inst, opts.software);
        v_on = m.sw.power_on;
        v_off = m.sw.power_off;
        declare_channels();
        declare_funcs();
        build_platform();
        build_platform_mapping();
        build_mapped_system();
        build_spec_p1();
        build_impl_p1();
        build_spec_p2();
        build_spec_p3();
        c.check_structure(m.hvc_platform);
        c.check_structure(m.mapped_system);
        c.check_structure(m.impl_p1);
        c.check_structure(m.spec_p1);
        c.check_structure(m.spec_p2);
        c.check_structure(m.spec_p3);
        return m;
    }
};

} // namespace

coverification build_coverification(context& c, const coverify_options& opts) {
    builder b(c, opts);
    return b.build();
}

std::vector<assertion_spec> assertion_registry(const coverification& cv) {
    using k = assertion_spec::kind;
    std::vector<assertion_spec> r;
    r.push_back({"P1", "sampled error reaches zero within the deadline after a setpoint change",
                 k::trace_refinement, cv.impl_p1, cv.spec_p1, k_invalid});
    r.push_back({"P2", "PWM duty cycle is zeroed within 10ms of a power-off report",
                 k::trace_refinement, cv.sw.mod_sys_pwm, cv.spec_p2, k_invalid});
    r.push_back({"P3", "internal setpoint is zeroed within 10ms of a power-off report",
                 k::trace_refinement, cv.sw.mod_sys_setpoint, cv.spec_p3, k_invalid});
    r.push_back({"P4", "controller software is free of timed deadlock",
                 k::timed_deadlock_free, cv.sw.mod_sys, k_invalid, k_invalid});
    struct reach_row {
        const char* name;
        const char* which;
        const char* what;
    };
    const reach_row rows[] = {
        {"Reach_Init", "Init", "initialization state is reachable"},
        {"Reach_Wait24VPower", "Wait24Vpower", "supply-wait state is reachable"},
        {"Reach_ClosedLoop", "ClosedLoop", "closed-loop control state is reachable"},
        {"Reach_ErrorMode", "ErrorMode", "error state is reachable"},
        {"Reach_Watchdog_s0", "Watchdog_s0", "watchdog limit-adjust phase is reachable"},
        {"Reach_Watchdog_s1", "Watchdog_s1", "watchdog supply-check phase is reachable"},
    };
    for (const auto& row : rows) {
        r.push_back({row.name, row.what, k::reachable, cv.sw.mod_sys_instrumented,
                     k_invalid, cv.sw.marker_label(row.which)});
    }
    return r;
}

} // namespace tock::hvc
