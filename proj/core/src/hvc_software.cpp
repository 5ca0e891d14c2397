#include "tock/hvc_software.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace tock::hvc {

time_scale time_scale::native() { return time_scale{}; }

time_scale time_scale::desk() {
    time_scale t;
    t.name = "desk";
    t.tick_ms = 10;
    t.watchdog_initial_ms = 10; // 4ms rounded up to one tick
    t.watchdog_mid_ms = 0;      // 2ms collapses into the same tick
    t.watchdog_rest_ms = 10;
    t.evolution_delay_ms = 400; // 370ms rounded up to the next tick boundary
    t.holdoff_ms = 30;          // 22ms rounded up
    return t;
}

uint32_t time_scale::ms(uint32_t duration_ms) const {
    if (tick_ms == 0) throw instantiation_error("time scale tick must be positive");
    if (duration_ms % tick_ms != 0)
        throw instantiation_error("duration " + std::to_string(duration_ms) +
                                  "ms is not a multiple of the " + std::to_string(tick_ms) +
                                  "ms tick in profile '" + name + "'");
    return duration_ms / tick_ms;
}

uint32_t time_scale::s(uint32_t duration_s) const { return ms(duration_s * 1000); }

int32_t duty2volt(int32_t duty_percent) {
    if (duty_percent >= 0 && duty_percent <= 19) return 0;
    if (duty_percent >= 20 && duty_percent <= 60) return 1;
    if (duty_percent >= 61 && duty_percent <= 100) return 2;
    return 0;
}

void instantiation::validate() const {
    // Exercise every duration conversion so a bad profile fails loudly here.
    scale.cycle_ticks();
    scale.watchdog_initial_ticks();
    scale.watchdog_mid_ticks();
    uint32_t rest = scale.watchdog_rest_ticks();
    scale.evolution_ticks();
    scale.holdoff_ticks();
    scale.min_interval_ticks();
    scale.deadline_ticks();
    if (scale.cycle_ticks() == 0)
        throw instantiation_error("controller cycle must span at least one tick");
    if (rest == 0)
        throw instantiation_error("watchdog rest phase must span at least one tick");
    if (real_max < 1) throw instantiation_error("voltage scale needs at least {0..1}");
    if (ramp_step < 1) throw instantiation_error("ramp step must be positive");
    if (limit_band < 0) throw instantiation_error("limit band must be nonnegative");
    if (duty_domain.empty()) throw instantiation_error("duty domain is empty");
    for (int32_t d : duty_domain)
        if (d < 0 || d > 100)
            throw instantiation_error("duty value " + std::to_string(d) +
                                      " outside percentage range 0..100");
    for (int32_t band = 0; band <= 2; ++band) {
        bool found = false;
        for (int32_t d : duty_domain)
            if (duty2volt(d) == band) found = true;
        if (!found)
            throw instantiation_error("duty domain has no representative of voltage band " +
                                      std::to_string(band));
    }
}

label_id software_model::marker_label(const std::string& which) const {
    chan_id c = k_invalid;
    if (which == "Init") c = state_init;
    else if (which == "Wait24Vpower") c = state_wait24vpower;
    else if (which == "ClosedLoop") c = state_closedloop;
    else if (which == "ErrorMode") c = state_errormode;
    else if (which == "Watchdog_s0") c = watchdog_s0;
    else if (which == "Watchdog_s1") c = watchdog_s1;
    else throw unbound_name_error("unknown state marker '" + which + "'");
    return ctx->unit_label(c);
}

namespace {

// Assembles the controller model inside one context. Split out of
// build_software so the many channel/def handles can live as members instead
// of a parameter blizzard.
//
// Data layout: values a single machine reads and writes (the sampled setpoint,
// the measured voltage) travel as process parameters; everything two machines
// can touch lives in one Memory process that updates a whole record per
// synchronization. Keeping each read-modify-write a single event means no
// interleaving can observe a half-finished update, which both matches the
// atomic-operation reading of the controller and keeps the state space small.
struct builder {
    context& c;
    const instantiation& inst;
    const model_options& opts;
    software_model m;

    // boundary buffer read sides
    chan_id setpoint_val, actualhv_val, errorack_take;

    // memory operations (machine <-> Memory synchronizations)
    chan_id op_init;    // mSetPoint := 0 (announced), HVEnabled := false
    chan_id op_adjust;  // overLimit/underLimit := mSetPoint +- 1, clamped
    chan_id op_setpow;  // pow24VStatus := sampled value
    chan_id op_error;   // currentState := ErrorMode (record-only variant)
    chan_id op_disable; // HVEnabled := false; flag also records ErrorMode
    chan_id op_hv_on;   // HVEnabled := true
    chan_id ramp_q;     // move mSetPoint one step toward the argument
    chan_id pid_q;      // serves the duty percentage for min(mSetPoint, overLimit)
    chan_id check_q;    // submit a measurement for the limit check
    chan_id ok_r, trip_r; // limit-check verdicts
    chan_id g_r;        // serves the guard code: 2 = error, 1 = power on, 0 = power off
    chan_id hv_r;       // serves HVEnabled

    value v_on, v_off, v_st_init, v_st_wait24, v_st_closed, v_st_error;

    func_id f_over, f_under, f_min, f_duty_rep, f_guard;

    def_id d_mem;
    def_id d_disable, d_enable, d_supply;
    def_id d_sm_init, d_sm_wait24, d_w24_loop, d_sm_closed, d_cl_loop, d_cl_body,
        d_cl_tail, d_sm_error, d_em_loop, d_wd_loop;

    builder(context& ctx, const instantiation& i, const model_options& o)
        : c(ctx), inst(i), opts(o) {}

    std::vector<value> real_domain() const {
        std::vector<value> d;
        for (int32_t i = 0; i <= inst.real_max; ++i) d.push_back(value::of_int(i));
        return d;
    }
    std::vector<value> bool_domain() const {
        return {value::of_bool(false), value::of_bool(true)};
    }

    // prefix that must complete before time may pass
    term_id urgent_write(chan_id ch, expr_id v) {
        return c.t_end_by(c.t_prefix_out(ch, v, c.t_skip()), 0);
    }
    term_id urgent_write(chan_id ch, const value& v) {
        return urgent_write(ch, c.e_const(v));
    }
    term_id marker(chan_id ch) { return c.t_end_by(c.t_event(ch, c.t_skip()), 0); }

    void declare_channels() {
        auto reals = real_domain();
        auto bools = bool_domain();

        enum_id power = c.declare_enum("Power", {"Power_On", "Power_Off"});
        v_on = value::of_enum(power, 0);
        v_off = value::of_enum(power, 1);
        m.power_on = v_on;
        m.power_off = v_off;
        enum_id st = c.declare_enum("State", {"Init", "Wait24Vpower", "ClosedLoop", "ErrorMode"});
        v_st_init = value::of_enum(st, 0);
        v_st_wait24 = value::of_enum(st, 1);
        v_st_closed = value::of_enum(st, 2);
        v_st_error = value::of_enum(st, 3);
        std::vector<value> powers = {v_on, v_off};
        std::vector<value> states = {v_st_init, v_st_wait24, v_st_closed, v_st_error};

        std::vector<value> duties;
        std::vector<int32_t> sorted = inst.duty_domain;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (int32_t d : sorted) duties.push_back(value::of_int(d));

        m.ext_setpoint_in = c.declare_channel("ext_setPoint.in", reals);
        setpoint_val = c.declare_channel("ext_setPoint.val", reals);
        m.ext_actualhv_in = c.declare_channel("ext_ActualHV.in", reals);
        actualhv_val = c.declare_channel("ext_ActualHV.val", reals);
        m.ext_pow24vstatus_in = c.declare_channel("ext_pow24VStatus.in", powers);
        m.ext_errorack_in = c.declare_unit_channel("ext_errorAck.in");
        errorack_take = c.declare_unit_channel("ext_errorAck.take");

        m.int_enablepwm_out = c.declare_channel("int_enablePWM.out", bools);
        m.int_dutycyclepwm1_out = c.declare_channel("int_dutyCyclePWM1.out", duties);

        m.set_msetpoint = c.declare_channel("set_mSetPoint", reals);

        op_init = c.declare_unit_channel("op_init");
        op_adjust = c.declare_unit_channel("op_adjustLimits");
        op_setpow = c.declare_channel("op_setPow24", powers);
        op_error = c.declare_unit_channel("op_recordError");
        op_disable = c.declare_channel("op_disable", bools);
        op_hv_on = c.declare_unit_channel("op_hvOn");
        ramp_q = c.declare_channel("op_ramp", reals);
        pid_q = c.declare_channel("op_pidDuty", duties);
        check_q = c.declare_channel("op_checkLimits", reals);
        ok_r = c.declare_unit_channel("op_limitsOk");
        trip_r = c.declare_unit_channel("op_limitsTrip");
        g_r = c.declare_channel("op_guard", reals);
        hv_r = c.declare_channel("op_hvEnabled", bools);

        m.state_init = c.declare_unit_channel("state_Init");
        m.state_wait24vpower = c.declare_unit_channel("state_Wait24Vpower");
        m.state_closedloop = c.declare_unit_channel("state_ClosedLoop");
        m.state_errormode = c.declare_unit_channel("state_ErrorMode");
        m.watchdog_s0 = c.declare_unit_channel("watchdog_s0");
        m.watchdog_s1 = c.declare_unit_channel("watchdog_s1");
    }

    void declare_funcs() {
        int32_t mx = inst.real_max;
        f_over = c.declare_native_func("overLimitF", 1, [mx](std::span<const value> a) {
            int32_t x = a[0].as_int();
            return value::of_int(x > mx ? mx : x);
        });
        f_under = c.declare_native_func("underLimitF", 1, [](std::span<const value> a) {
            int32_t x = a[0].as_int();
            return value::of_int(x < 0 ? 0 : x);
        });
        f_min = c.declare_native_func("minF", 2, [](std::span<const value> a) {
            return value::of_int(std::min(a[0].as_int(), a[1].as_int()));
        });
        // Representative duty percentage for each voltage band, taken from the
        // instantiated duty domain (smallest member of the band).
        std::map<int32_t, int32_t> reps;
        std::vector<int32_t> sorted = inst.duty_domain;
        std::sort(sorted.begin(), sorted.end());
        for (int32_t d : sorted)
            if (!reps.count(duty2volt(d))) reps[duty2volt(d)] = d;
        f_duty_rep = c.declare_native_func("dutyRep", 1, [reps](std::span<const value> a) {
            int32_t band = a[0].as_int();
            if (band < 0) band = 0;
            if (band > 2) band = 2;
            return value::of_int(reps.at(band));
        });
        value err = v_st_error, on = v_on;
        f_guard = c.declare_native_func("guardCode", 2, [err, on](std::span<const value> a) {
            if (a[0] == err) return value::of_int(2);
            return value::of_int(a[1] == on ? 1 : 0);
        });
    }

    // Memory(m, ov, un, cs, pw, hv): one process owning every datum both
    // machines can reach. Each branch is one atomic record update or a served
    // read; mSetPoint changes are announced on set_mSetPoint before the state
    // is committed.
    void define_memory() {
        d_mem = c.declare_def("Memory", 6);
        // parameter order m, ov, un, cs, pw, hv; at nesting depth k parameter
        // index i is de Bruijn variable (5 - i) + k.
        auto at = [&](uint32_t depth) {
            return std::array<expr_id, 6>{c.e_var(5 + depth), c.e_var(4 + depth),
                                          c.e_var(3 + depth), c.e_var(2 + depth),
                                          c.e_var(1 + depth), c.e_var(0 + depth)};
        };
        auto recall = [&](const std::array<expr_id, 6>& a) {
            return c.t_call(d_mem, std::span<const expr_id>(a));
        };
        std::vector<term_id> branches;

        { // op_init: announce mSetPoint := 0, drop the enable latch
            auto a = at(0);
            a[0] = c.e_int(0);
            a[5] = c.e_bool(false);
            branches.push_back(c.t_event(
                op_init, c.t_seq(urgent_write(m.set_msetpoint, value::of_int(0)), recall(a))));
        }
        { // op_adjust: limits follow mSetPoint +- limit_band, clamped to the
          // scale; see the instantiation field for why the default band spans
          // the whole scale.
            auto a = at(0);
            a[1] = c.e_apply(f_over,
                             std::array{c.e_bin(bin_op::add, a[0], c.e_int(inst.limit_band))});
            a[2] = c.e_apply(f_under,
                             std::array{c.e_bin(bin_op::sub, a[0], c.e_int(inst.limit_band))});
            branches.push_back(c.t_event(op_adjust, recall(a)));
        }
        { // op_setpow?x
            auto a = at(1);
            a[4] = c.e_var(0);
            branches.push_back(c.t_prefix_in(op_setpow, recall(a)));
        }
        { // op_error
            auto a = at(0);
            a[3] = c.e_const(v_st_error);
            branches.push_back(c.t_event(op_error, recall(a)));
        }
        { // op_disable?flag
            auto a = at(1);
            a[5] = c.e_bool(false);
            auto a_err = a;
            a_err[3] = c.e_const(v_st_error);
            if (opts.reset_msetpoint_in_disable) {
                a[0] = c.e_int(0);
                a_err[0] = c.e_int(0);
            }
            term_id tail = c.t_cond(c.e_var(0), recall(a_err), recall(a));
            if (opts.reset_msetpoint_in_disable)
                tail = c.t_seq(urgent_write(m.set_msetpoint, value::of_int(0)), tail);
            branches.push_back(c.t_prefix_in(op_disable, tail));
        }
        { // op_hv_on
            auto a = at(0);
            a[5] = c.e_bool(true);
            branches.push_back(c.t_event(op_hv_on, recall(a)));
        }
        { // ramp_q?sp: one step toward sp, announced when it moves
            auto a = at(1);
            expr_id mv = a[0], sp = c.e_var(0), step = c.e_int(inst.ramp_step);
            auto up = a, down = a;
            up[0] = c.e_bin(bin_op::add, mv, step);
            down[0] = c.e_bin(bin_op::sub, mv, step);
            term_id go_up = c.t_seq(urgent_write(m.set_msetpoint, up[0]), recall(up));
            term_id go_down = c.t_seq(urgent_write(m.set_msetpoint, down[0]), recall(down));
            branches.push_back(c.t_prefix_in(
                ramp_q, c.t_cond(c.e_bin(bin_op::lt, mv, sp), go_up,
                                 c.t_cond(c.e_bin(bin_op::gt, mv, sp), go_down, recall(a)))));
        }
        { // pid_q: serve the duty percentage for the capped setpoint
            auto a = at(0);
            expr_id target = c.e_apply(f_min, std::array{a[0], a[1]});
            expr_id duty = c.e_apply(f_duty_rep, std::array{target});
            branches.push_back(c.t_prefix_out(pid_q, duty, recall(a)));
        }
        { // check_q?x, answered with a verdict
            auto a = at(1);
            expr_id trip = c.e_bin(bin_op::logical_or,
                                   c.e_bin(bin_op::gt, c.e_var(0), a[1]),
                                   c.e_bin(bin_op::lt, c.e_var(0), a[2]));
            branches.push_back(c.t_prefix_in(
                check_q, c.t_cond(trip, c.t_event(trip_r, recall(a)),
                                  c.t_event(ok_r, recall(a)))));
        }
        { // g_r: serve the transition-guard code
            auto a = at(0);
            expr_id code = c.e_apply(f_guard, std::array{a[3], a[4]});
            branches.push_back(c.t_prefix_out(g_r, code, recall(a)));
        }
        { // hv_r: serve the enable latch
            auto a = at(0);
            branches.push_back(c.t_prefix_out(hv_r, a[5], recall(a)));
        }
        { // op_enter?s: the machine's own state transitions
            auto a = at(1);
            a[3] = c.e_var(0);
            branches.push_back(c.t_prefix_in(op_enter, recall(a)));
        }
        c.set_def_body(d_mem, c.t_choice(std::move(branches)));
    }

    void define_operations() {
        d_disable = c.declare_def("disableHV", 1);
        d_enable = c.declare_def("enableHV", 0);
        d_supply = c.declare_def("supplyVoltCheck", 0);

        // disableHV(flag): stop the PWM and drop the internal record; when the
        // flag is set the record also moves to the error state.
        c.set_def_body(
            d_disable,
            c.t_seq({urgent_write(m.int_enablepwm_out, value::of_bool(false)),
                     urgent_write(m.int_dutycyclepwm1_out, value::of_int(0)),
                     c.t_prefix_out(op_disable, c.e_var(0), c.t_skip())}));

        c.set_def_body(d_enable, urgent_write(m.int_enablepwm_out, value::of_bool(true)));

        // supplyVoltCheck: probe the 24V status and react to a power loss.
        // The probe is a synchronous read of the boundary event itself, not of
        // a buffered copy: a loss report can then never be overwritten by a
        // later recovery before the software notices it, which is what lets a
        // fixed reaction deadline hold at every tick width.
        {
            term_id on_off = opts.disable_hv_in_supply_check
                                 ? c.t_call(d_disable, std::array{c.e_bool(true)})
                                 : c.t_event(op_error, c.t_skip());
            term_id t = c.t_prefix_in(
                m.ext_pow24vstatus_in,
                c.t_prefix_out(op_setpow, c.e_var(0),
                               c.t_cond(c.e_bin(bin_op::eq, c.e_var(0), c.e_const(v_off)),
                                        on_off, c.t_skip())));
            c.set_def_body(d_supply, t);
        }
    }

    void define_state_machine() {
        uint32_t cycle = inst.scale.cycle_ticks();

        d_sm_init = c.declare_def("SM_Init", 0);
        d_sm_wait24 = c.declare_def("SM_Wait24Vpower", 0);
        d_w24_loop = c.declare_def("SM_Wait24Vpower_loop", 0);
        d_sm_closed = c.declare_def("SM_ClosedLoop", 0);
        d_cl_loop = c.declare_def("SM_ClosedLoop_loop", 0);
        d_cl_body = c.declare_def("SM_ClosedLoop_body", 1); // sampled setpoint
        d_cl_tail = c.declare_def("SM_ClosedLoop_tail", 0);
        d_sm_error = c.declare_def("SM_ErrorMode", 0);
        d_em_loop = c.declare_def("SM_ErrorMode_loop", 0);
        d_wd_loop = c.declare_def("Watchdog_loop", 0);

        // Init: adjust limits once, then move on after a cycle.
        c.set_def_body(d_sm_init,
                       c.t_seq({marker(m.state_init), c.t_event(op_adjust, c.t_skip()),
                                c.t_wait(cycle), c.t_call(d_sm_wait24)}));

        c.set_def_body(d_sm_wait24,
                       c.t_seq(marker(m.state_wait24vpower),
                               c.t_prefix_out(op_enter, c.e_const(v_st_wait24),
                                              c.t_call(d_w24_loop))));

        // Wait24Vpower cycle: keep the output disabled, watch the supply, and
        // sample the requested setpoint; advance when it is safe.
        {
            term_id to_error = c.t_seq(c.t_wait(cycle), c.t_call(d_sm_error));
            term_id to_closed = c.t_seq(c.t_wait(cycle), c.t_call(d_sm_closed));
            term_id again = c.t_seq(c.t_wait(cycle), c.t_call(d_w24_loop));
            // binder depth at the guard: code=0, sampled sp=1
            expr_id ok = c.e_bin(bin_op::logical_and,
                                 c.e_bin(bin_op::eq, c.e_var(1), c.e_int(0)),
                                 c.e_bin(bin_op::eq, c.e_var(0), c.e_int(1)));
            term_id guard = c.t_prefix_in(
                g_r, c.t_cond(c.e_bin(bin_op::eq, c.e_var(0), c.e_int(2)), to_error,
                              c.t_cond(ok, to_closed, again)));
            c.set_def_body(d_w24_loop,
                           c.t_seq({c.t_call(d_disable, std::array{c.e_bool(false)}),
                                    c.t_call(d_supply),
                                    c.t_prefix_in(setpoint_val, guard)}));
        }

        c.set_def_body(d_sm_closed,
                       c.t_seq(marker(m.state_closedloop),
                               c.t_prefix_out(op_enter, c.e_const(v_st_closed),
                                              c.t_call(d_cl_loop))));

        // ClosedLoop cycle: sample the setpoint; zero disables the output,
        // a first nonzero value powers the stage up.
        {
            term_id enable_path = c.t_event(
                op_hv_on,
                c.t_seq({c.t_call(d_supply), c.t_call(d_enable),
                         c.t_call(d_cl_body, std::array{c.e_var(1)})}));
            term_id nonzero = c.t_prefix_in(
                hv_r, c.t_cond(c.e_not(c.e_var(0)), enable_path,
                               c.t_call(d_cl_body, std::array{c.e_var(1)})));
            term_id dispatch =
                c.t_cond(c.e_bin(bin_op::eq, c.e_var(0), c.e_int(0)),
                         c.t_seq(c.t_call(d_disable, std::array{c.e_bool(false)}),
                                 c.t_call(d_cl_tail)),
                         nonzero);
            c.set_def_body(d_cl_loop, c.t_prefix_in(setpoint_val, dispatch));
        }

        // While enabled: ramp, drive the PWM, sample the measured voltage and
        // check the limits.
        {
            term_id verdict = c.t_choice2(
                c.t_event(ok_r, c.t_call(d_cl_tail)),
                c.t_event(trip_r, c.t_seq(c.t_call(d_disable, std::array{c.e_bool(true)}),
                                          c.t_call(d_cl_tail))));
            term_id regulate = c.t_seq(
                {c.t_prefix_out(ramp_q, c.e_var(1), c.t_skip()),
                 c.t_prefix_in(pid_q,
                               c.t_seq(urgent_write(m.int_dutycyclepwm1_out, c.e_var(0)),
                                       c.t_prefix_in(actualhv_val,
                                                     c.t_prefix_out(check_q, c.e_var(0),
                                                                    verdict))))});
            c.set_def_body(d_cl_body,
                           c.t_prefix_in(hv_r,
                                         c.t_cond(c.e_var(0), regulate, c.t_call(d_cl_tail))));
        }

        {
            term_id to_error = c.t_seq(c.t_wait(cycle), c.t_call(d_sm_error));
            term_id again = c.t_seq(c.t_wait(cycle), c.t_call(d_cl_loop));
            c.set_def_body(d_cl_tail,
                           c.t_prefix_in(g_r,
                                         c.t_cond(c.e_bin(bin_op::eq, c.e_var(0), c.e_int(2)),
                                                  to_error, again)));
        }

        c.set_def_body(d_sm_error, c.t_seq(marker(m.state_errormode), c.t_call(d_em_loop)));

        // ErrorMode: wait for a manual acknowledgement, re-offering it every
        // cycle; acknowledged errors hand back to Wait24Vpower.
        c.set_def_body(
            d_em_loop,
            c.t_choice2(c.t_event(errorack_take,
                                  c.t_seq(c.t_wait(cycle), c.t_call(d_sm_wait24))),
                        c.t_seq(c.t_wait(cycle), c.t_call(d_em_loop))));

        // Watchdog: limits then supply check, phase-shifted against the main
        // machine's cycle.
        {
            term_id t = c.t_seq({marker(m.watchdog_s0), c.t_event(op_adjust, c.t_skip()),
                                 c.t_wait(inst.scale.watchdog_mid_ticks()),
                                 marker(m.watchdog_s1), c.t_call(d_supply),
                                 c.t_wait(inst.scale.watchdog_rest_ticks()),
                                 c.t_call(d_wd_loop)});
            c.set_def_body(d_wd_loop, t);
        }
    }

    // currentState writes from the machine's own transitions
    chan_id op_enter = k_invalid;

    void compose() {
        uint32_t cycle = inst.scale.cycle_ticks();

        term_id sm_start = c.t_seq({c.t_event(op_init, c.t_skip()), c.t_wait(cycle),
                                    c.t_call(d_sm_init)});
        term_id wd_start =
            c.t_seq(c.t_wait(inst.scale.watchdog_initial_ticks()), c.t_call(d_wd_loop));
        term_id machines = c.t_interleave(sm_start, wd_start);

        term_id memory = c.t_call_v(
            d_mem, std::array{value::of_int(0), value::of_int(0), value::of_int(0),
                              v_st_init, v_off, value::of_bool(false)});

        // The setpoint and measured-voltage inputs are polled sensors: a
        // latest-value buffer per input, sampled by the control cycle. The
        // supply status deliberately has no buffer — see supplyVoltCheck.
        term_id cells = c.t_cell(m.ext_setpoint_in, setpoint_val, value::of_int(0));
        cells = c.t_interleave(cells, c.t_cell(m.ext_actualhv_in, actualhv_val,
                                               value::of_int(0)));
        cells = c.t_interleave(cells, c.t_presence_cell(m.ext_errorack_in, errorack_take));

        term_id state = c.t_interleave(memory, cells);

        std::vector<set_item> access;
        for (chan_id ch : {op_init, op_adjust, op_setpow, op_error, op_disable, op_hv_on,
                           ramp_q, pid_q, check_q, ok_r, trip_r, g_r, hv_r, op_enter,
                           setpoint_val, actualhv_val, errorack_take})
            access.push_back({ch, k_invalid});
        set_id access_set = c.make_event_set(false, access);
        m.internal_channels = access_set;

        std::vector<set_item> markers;
        for (chan_id ch : {m.state_init, m.state_wait24vpower, m.state_closedloop,
                           m.state_errormode, m.watchdog_s0, m.watchdog_s1})
            markers.push_back({ch, k_invalid});
        m.marker_channels = c.make_event_set(false, markers);

        // set_mSetPoint is announced by Memory without a partner, so it is not
        // part of the synchronization set; it is hidden everywhere except the
        // instrumented terms that assert on it.
        std::vector<set_item> internal_and_msp = access;
        internal_and_msp.push_back({m.set_msetpoint, k_invalid});
        set_id hide_instr = c.make_event_set(false, internal_and_msp);

        std::vector<set_item> all_internal = internal_and_msp;
        all_internal.insert(all_internal.end(), markers.begin(), markers.end());
        set_id hide_all = c.make_event_set(false, all_internal);

        std::vector<set_item> internal_keep_msp = access;
        internal_keep_msp.insert(internal_keep_msp.end(), markers.begin(), markers.end());
        set_id hide_keep_msp = c.make_event_set(false, internal_keep_msp);

        m.composition = c.t_parallel(machines, access_set, state);
        m.mod_sys = c.t_timed_priority(c.t_hide(m.composition, hide_all));
        m.mod_sys_instrumented = c.t_timed_priority(c.t_hide(m.composition, hide_instr));

        value_id off_id = c.intern_value(v_off);
        set_id pwm_keep = c.make_event_set(
            true, {{m.ext_pow24vstatus_in, off_id}, {m.int_dutycyclepwm1_out, k_invalid}});
        m.mod_sys_pwm =
            c.t_timed_priority(c.t_project(c.t_hide(m.composition, hide_all), pwm_keep));

        set_id sp_keep = c.make_event_set(
            true, {{m.ext_pow24vstatus_in, off_id}, {m.set_msetpoint, k_invalid}});
        m.mod_sys_setpoint = c.t_timed_priority(
            c.t_project(c.t_hide(m.composition, hide_keep_msp), sp_keep));
    }

    software_model build() {
        inst.validate();
        m.ctx = &c;
        m.inst = inst;
        m.opts = opts;
        declare_channels();
        op_enter = c.declare_channel("op_enterState",
                                     {v_st_init, v_st_wait24, v_st_closed, v_st_error});
        declare_funcs();
        define_memory();
        define_operations();
        define_state_machine();
        compose();
        c.check_structure(m.mod_sys);
        c.check_structure(m.mod_sys_instrumented);
        c.check_structure(m.mod_sys_pwm);
        c.check_structure(m.mod_sys_setpoint);
        return m;
    }
};

} // namespace

software_model build_software(context& c, const instantiation& inst,
                              const model_options& opts) {
    builder b(c, inst, opts);
    return b.build();
}

} // namespace tock::hvc
