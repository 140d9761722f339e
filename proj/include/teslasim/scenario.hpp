#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teslasim/control.hpp"
#include "teslasim/drivetrain.hpp"
#include "teslasim/sensing.hpp"

namespace teslasim {

struct TargetPoint {
    double t = 0.0;     // s, when this target becomes active
    double x_mm = 0.0;  // slide position target
};

struct RampSpec {
    double t0 = 0.0;
    double x0_mm = 0.0;
    double x1_mm = 0.0;
    double rate_mm_s = 1.0;  // > 0
};

// Piecewise-constant step schedule or a single ramp.
struct TargetSchedule {
    std::vector<TargetPoint> points;
    std::optional<RampSpec> ramp;

    bool empty() const { return points.empty() && !ramp.has_value(); }
    double at(double t) const;
    void validate() const;
};

// Declarative closed-loop experiment. Identical Scenario values produce
// bit-identical traces.
struct Scenario {
    MotorParams motor;
    PidGains gains;
    ActuationLimits limits;
    EncoderConfig encoder;
    LoadModel load;
    double dt = 5e-4;                 // s, in (0, 10 ms]
    double duration = 60.0;           // s
    double supply_pressure_bar = 4.0;
    double velocity_window = 0.02;    // s, velocity estimator window
    TargetSchedule targets;
    std::uint64_t seed = 0;  // reserved for stochastic extensions
    std::string label = "scenario";

    void validate() const;  // ConfigError naming the offending field
};

struct TraceFlags {
    bool speed_limit_exceeded = false;
    bool aliasing = false;

    bool operator==(const TraceFlags&) const = default;
};

// One closed-loop record per timestep. Column order here is the CSV order.
struct TraceSample {
    double t = 0.0;
    double turbine_angle = 0.0;      // q, rad
    double turbine_speed_rpm = 0.0;  // omega
    double output_angle = 0.0;       // post-gearbox, rad
    double position_mm = 0.0;        // x, slide
    long long encoder_count = 0;
    double u = 0.0;                  // commanded valve voltage, V
    int direction = +1;
    double tau_drive = 0.0;          // N*m at the turbine shaft
    double tau_load = 0.0;           // N*m reflected load at the turbine shaft
    double force_n = 0.0;            // axial needle-tissue force, N
    double error_mm = 0.0;           // measured position error e = x_meas - x_d
    TraceFlags flags;

    bool operator==(const TraceSample&) const = default;
};

// Full closed-loop simulation: control -> command shaping -> tube delay ->
// torque map -> rotor dynamics -> gearbox/screw -> encoder -> control.
std::vector<TraceSample> run_scenario(const Scenario& s);

struct SweepRow {
    double pressure_bar = 0.0;
    double speed_rpm = 0.0;
};

// Steady-state speed per supply pressure (full-open valve).
std::vector<SweepRow> speed_pressure_sweep(const MotorParams& motor,
                                           const std::vector<double>& pressures_bar);

struct ForceRow {
    double pressure_bar = 0.0;
    double force_n = 0.0;
};

// Stalled-slide axial force per supply pressure through the calibrated chain.
std::vector<ForceRow> force_table(const MotorParams& motor,
                                  const std::vector<double>& pressures_bar);

struct SettleCriterion {
    double band_mm = 0.5;  // |error| must stay inside this band
    double hold_s = 2.0;   // for at least this long
};

struct PositioningRow {
    double target_mm = 0.0;
    double final_error_mm = 0.0;
    double peak_overshoot_mm = 0.0;  // max excursion past the target, >= 0
    double settle_time_s = 0.0;      // from target activation; +inf = never settled
};

struct PositioningReport {
    std::vector<PositioningRow> rows;
    std::vector<TraceSample> trace;
};

// Runs the scenario and summarizes each target of the schedule. A target that
// never settles is reported with settle_time_s = +inf, not an error.
PositioningReport positioning_experiment(const Scenario& s,
                                         const SettleCriterion& settle = {});

}  // namespace teslasim
