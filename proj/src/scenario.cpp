#include "teslasim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "teslasim/errors.hpp"
#include "teslasim/turbine.hpp"
#include "teslasim/units.hpp"

namespace teslasim {

double TargetSchedule::at(double t) const {
    if (ramp.has_value()) {
        const RampSpec& r = *ramp;
        if (t <= r.t0) return r.x0_mm;
        const double span = std::abs(r.x1_mm - r.x0_mm);
        const double t_end = r.t0 + span / r.rate_mm_s;
        if (t >= t_end) return r.x1_mm;
        const double dir = r.x1_mm >= r.x0_mm ? 1.0 : -1.0;
        return r.x0_mm + dir * r.rate_mm_s * (t - r.t0);
    }
    if (points.empty()) return 0.0;
    if (t < points.front().t) return 0.0;  // home until the first activation
    double x = points.front().x_mm;
    for (const auto& p : points) {
        if (p.t <= t)
            x = p.x_mm;
        else
            break;
    }
    return x;
}

void TargetSchedule::validate() const {
    if (ramp.has_value() && !points.empty())
        throw ConfigError("targets: give either step points or a ramp, not both");
    if (ramp.has_value() && !(ramp->rate_mm_s > 0.0))
        throw ConfigError("targets.ramp.rate_mm_s: must be > 0");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].t > points[i - 1].t))
            throw ConfigError("targets.points: activation times must be strictly increasing");
    }
    for (const auto& p : points) {
        if (!std::isfinite(p.t) || !std::isfinite(p.x_mm))
            throw ConfigError("targets.points: non-finite entry");
    }
}

void Scenario::validate() const {
    motor.validate();
    gains.validate();
    limits.validate();
    encoder.validate();
    load.validate();
    targets.validate();
    if (!(dt > 0.0) || dt > 0.01) throw ConfigError("scenario.dt: must be in (0, 0.01] s");
    if (!(duration > 0.0)) throw ConfigError("scenario.duration: must be > 0");
    if (!(supply_pressure_bar >= 0.0) || supply_pressure_bar > kMaxSupplyPressureBar)
        throw ConfigError("scenario.supply_pressure_bar: must be in [0, 4]");
    if (!(velocity_window > 0.0)) throw ConfigError("scenario.velocity_window: must be > 0");
    if (targets.empty()) throw ConfigError("scenario.targets: schedule is empty");
}

std::vector<TraceSample> run_scenario(const Scenario& s) {
    s.validate();

    const long long steps = std::llround(s.duration / s.dt);
    if (steps < 1) throw ConfigError("scenario.duration: shorter than one timestep");

    const MotorParams& m = s.motor;
    const double lead_mm_per_rad = m.screw_lead / kTwoPi * 1e3;
    const double supply_frac = full_open_flow(s.supply_pressure_bar);

    RotorState rotor;
    EncoderState enc;
    PidState pid;
    CommandShaper shaper(s.limits, s.gains.u_max, m.valve_gain);
    DelayLine line(s.limits.tube_delay);
    ValveCommand eff;  // command currently acting at the turbine

    std::vector<CountSample> history;
    const std::size_t history_cap =
        static_cast<std::size_t>(std::ceil(s.velocity_window / s.dt)) + 4;

    std::vector<TraceSample> trace;
    trace.reserve(static_cast<std::size_t>(steps));

    for (long long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * s.dt;

        // --- sense ---
        const double output_angle = gearbox_out(rotor.angle, m.gear_ratio);
        const double x_m = screw_position(output_angle, m.screw_lead);
        const EncoderSample es = sample_encoder(output_angle, s.encoder, enc, eff.direction);
        enc = es.state;
        history.push_back({t, enc.count});
        if (history.size() > history_cap) history.erase(history.begin());

        const double x_meas_mm = screw_position(es.measured_angle, m.screw_lead) * 1e3;
        double xdot_meas_mm = 0.0;
        if (history.size() >= 2)
            xdot_meas_mm = estimate_velocity(history, s.velocity_window, s.encoder) *
                           lead_mm_per_rad;

        // --- regulate ---
        const double x_d_mm = s.targets.at(t);
        const PidResult pr = pid_step(s.gains, pid, x_meas_mm, x_d_mm, xdot_meas_mm, s.dt);
        pid = pr.state;
        const ValveCommand cmd = shaper.shape(pr.u_signed, s.dt);

        // --- actuate through the pneumatic line ---
        line.push(t, cmd);
        eff = line.at(t);
        const double open_frac = std::clamp(eff.kappa * eff.u, 0.0, 1.0);
        const double tau_drive = eff.direction * m.fluid.rho_gain * m.fluid.h(open_frac * supply_frac);

        // --- load ---
        const double slide_speed = gearbox_out(rotor.velocity, m.gear_ratio) * m.screw_lead / kTwoPi;
        const double f_tissue = tissue_load(x_m, slide_speed, s.load);
        const double tau_load_raw =
            -f_tissue * m.screw_lead / (kTwoPi * m.screw_efficiency * m.gear_ratio);
        // The lead screw self-locks: a stopped rotor never feels the load.
        const double tau_load =
            rotor.velocity == 0.0 ? backdrive_filter(tau_load_raw, m) : tau_load_raw;

        TraceSample row;
        row.t = t;
        row.turbine_angle = rotor.angle;
        row.turbine_speed_rpm = rad_s_to_rpm(rotor.velocity);
        row.output_angle = output_angle;
        row.position_mm = x_m * 1e3;
        row.encoder_count = enc.count;
        row.u = cmd.u;
        row.direction = cmd.direction;
        row.tau_drive = tau_drive;
        row.tau_load = tau_load;
        row.force_n = f_tissue;
        row.error_mm = x_meas_mm - x_d_mm;
        row.flags.speed_limit_exceeded = row.turbine_speed_rpm > s.limits.max_turbine_rpm;
        row.flags.aliasing = es.aliasing;
        trace.push_back(row);

        rotor = step_dynamics(rotor, tau_drive, tau_load, m, s.dt);
        if (!std::isfinite(rotor.angle) || !std::isfinite(rotor.velocity)) {
            std::ostringstream msg;
            msg << "scenario '" << s.label << "': state diverged at t = " << t + s.dt
                << " s (last valid sample index " << k << ")";
            throw NumericalError(msg.str());
        }
    }
    return trace;
}

std::vector<SweepRow> speed_pressure_sweep(const MotorParams& motor,
                                           const std::vector<double>& pressures_bar) {
    motor.validate();
    std::vector<SweepRow> rows;
    rows.reserve(pressures_bar.size());
    for (double p : pressures_bar) rows.push_back({p, steady_state_speed_rpm(p, motor)});
    return rows;
}

std::vector<ForceRow> force_table(const MotorParams& motor,
                                  const std::vector<double>& pressures_bar) {
    motor.validate();
    std::vector<ForceRow> rows;
    rows.reserve(pressures_bar.size());
    for (double p : pressures_bar) {
        if (!(p >= 0.0) || p > kMaxSupplyPressureBar) {
            std::ostringstream msg;
            msg << "force_table: pressure " << p << " Bar outside [0, " << kMaxSupplyPressureBar
                << "]";
            throw ConfigError(msg.str());
        }
        rows.push_back({p, stall_force(p, motor)});
    }
    return rows;
}

namespace {

struct TargetWindow {
    double x_mm = 0.0;
    double activation = 0.0;
    std::size_t first = 0;  // trace row range [first, last)
    std::size_t last = 0;
};

std::vector<TargetWindow> target_windows(const Scenario& s, const std::vector<TraceSample>& trace) {
    std::vector<TargetWindow> windows;
    if (s.targets.ramp.has_value()) {
        const RampSpec& r = *s.targets.ramp;
        TargetWindow w;
        w.x_mm = r.x1_mm;
        // Settling is judged from the moment the moving target stops.
        w.activation = r.t0 + std::abs(r.x1_mm - r.x0_mm) / r.rate_mm_s;
        w.first = 0;
        w.last = trace.size();
        windows.push_back(w);
        return windows;
    }
    for (std::size_t i = 0; i < s.targets.points.size(); ++i) {
        TargetWindow w;
        w.x_mm = s.targets.points[i].x_mm;
        w.activation = s.targets.points[i].t;
        const double t_end = i + 1 < s.targets.points.size()
                                 ? s.targets.points[i + 1].t
                                 : std::numeric_limits<double>::infinity();
        w.first = trace.size();
        w.last = trace.size();
        for (std::size_t k = 0; k < trace.size(); ++k) {
            if (trace[k].t < w.activation) continue;
            if (w.first == trace.size()) w.first = k;
            if (trace[k].t < t_end) w.last = k + 1;
        }
        windows.push_back(w);
    }
    return windows;
}

}  // namespace

PositioningReport positioning_experiment(const Scenario& s, const SettleCriterion& settle) {
    if (!(settle.band_mm > 0.0)) throw ConfigError("settle.band_mm: must be > 0");
    if (!(settle.hold_s >= 0.0)) throw ConfigError("settle.hold_s: must be >= 0");

    PositioningReport report;
    if (s.targets.empty()) return report;  // nothing to position toward
    report.trace = run_scenario(s);

    double prev_target = 0.0;
    for (const TargetWindow& w : target_windows(s, report.trace)) {
        PositioningRow row;
        row.target_mm = w.x_mm;
        row.settle_time_s = std::numeric_limits<double>::infinity();

        const double approach = w.x_mm >= prev_target ? 1.0 : -1.0;
        double run_start = -1.0;  // start of the current in-band run
        bool settled = false;
        for (std::size_t k = w.first; k < w.last; ++k) {
            const TraceSample& r = report.trace[k];
            const double e = r.position_mm - w.x_mm;
            row.peak_overshoot_mm = std::max(row.peak_overshoot_mm, approach * e);
            if (!settled) {
                if (std::abs(e) <= settle.band_mm) {
                    if (run_start < 0.0) run_start = r.t;
                    if (r.t - run_start >= settle.hold_s) {
                        row.settle_time_s = run_start - w.activation;
                        settled = true;
                    }
                } else {
                    run_start = -1.0;
                }
            }
            if (k + 1 == w.last) row.final_error_mm = e;
        }
        row.peak_overshoot_mm = std::max(row.peak_overshoot_mm, 0.0);
        report.rows.push_back(row);
        prev_target = w.x_mm;
    }
    return report;
}

}  // namespace teslasim
