#pragma once

#include <functional>
#include <vector>

namespace teslasim {

struct MotorParams;  // drivetrain.hpp

// Disk stack geometry. The shear torque acts across the n_gaps = disk_count-1
// inter-disk gaps, between the exhaust radius r1 and the disk rim r2.
struct TurbineGeometry {
    int disk_count = 6;
    double inner_radius = 0.0075;  // r1, m (exhaust holes near the centre)
    double outer_radius = 0.0275;  // r2, m
    double half_gap = 0.001;       // half the inter-disk spacing, m

    int gap_count() const { return disk_count - 1; }
    void validate() const;  // throws ConfigError
};

// Parameters of the calibrated torque map tau = i * rho * h(phi).
// h is the simplest monotone family matching the observed behaviour:
// deadband, then linear, then saturation. h(0) = 0 always.
struct FluidTorqueParams {
    double mu = 1.81e-5;  // dynamic viscosity of the driving fluid, Pa*s (air)
    double rho_gain = 5.7057e-3;  // N*m per unit of h, calibrated
    double h_deadband = 0.125;    // flow fraction below which h = 0
    double h_slope = 1.0;
    double h_sat = 0.875;  // h never exceeds this

    double h(double flow) const;
    void validate() const;
};

// Tangential mid-gap fluid speed as a function of radius. The profile across
// the gap coordinate y is parabolic, v(y) = v_peak*(1 - (y/half_gap)^2), so
// the wall shear slope at the disk surface is 2*v_peak/half_gap.
struct VelocityProfile {
    std::function<double(double)> peak_velocity_at;  // m/s at radius r

    double wall_shear_slope(double r, double half_gap) const {
        return 2.0 * peak_velocity_at(r) / half_gap;
    }
};

// Valve interface between the controller and the torque map: the proportional
// valve voltage u (always >= 0) and the solenoid direction selector.
struct ValveCommand {
    double u = 0.0;      // V, in [0, u_max]
    int direction = +1;  // i = +1 / -1, which inlet port is fed
    double kappa = 0.1;  // valve flow gain, flow fraction per volt
};

// Fraction of the maximum flow available at a given supply pressure with the
// valve fully open (kappa*u = 1). Clamped to [0, 1].
double full_open_flow(double pressure_bar);

// Total shear-driven torque, n*mu * integral_{r1}^{r2} dv/dy dr, evaluated by
// composite Simpson quadrature. node_count is rounded up to the next odd
// value and never below 101.
double shear_torque(const TurbineGeometry& geom, const FluidTorqueParams& params,
                    const VelocityProfile& profile, int node_count = 101);

// Calibrated flow-to-torque map: i * rho * h(kappa * u).
double flow_to_torque(const ValveCommand& cmd, const FluidTorqueParams& params,
                      double kappa);

// Steady turbine speed at a supply pressure with the valve fully open:
// solves b*omega + c = tau(p) by bisection (relative tolerance 1e-9).
// Returns 0 when the stall torque cannot break the Coulomb friction.
// Pressure outside [0, 4] Bar throws ConfigError.
double steady_state_speed_rpm(double supply_pressure_bar, const MotorParams& motor);

struct SpeedObservation {
    double pressure_bar = 0.0;
    double speed_rpm = 0.0;
};

struct TorqueMapCalibration {
    FluidTorqueParams params;
    double residual_rms_rpm = 0.0;
};

// Fits (rho_gain, h_deadband) to steady-state speed observations by
// coordinate descent with golden-section line searches, minimizing the sum of
// squared RPM residuals. h_slope is fixed at 1 and h_sat tied to
// 1 - h_deadband during the fit. Requires at least two distinct pressures and
// one zero-speed stiction observation. Deterministic.
TorqueMapCalibration calibrate_torque_map(const std::vector<SpeedObservation>& observations,
                                          const MotorParams& motor);

}  // namespace teslasim
