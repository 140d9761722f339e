#include "teslasim/turbine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "teslasim/drivetrain.hpp"
#include "teslasim/errors.hpp"
#include "teslasim/units.hpp"

namespace teslasim {

void TurbineGeometry::validate() const {
    if (!(inner_radius > 0.0) || !(outer_radius > inner_radius))
        throw ConfigError("turbine geometry: need 0 < r1 < r2");
    if (!(half_gap > 0.0)) throw ConfigError("turbine geometry: half_gap must be > 0");
    if (disk_count < 2) throw ConfigError("turbine geometry: need at least 2 disks (1 gap)");
}

double FluidTorqueParams::h(double flow) const {
    const double lifted = h_slope * std::max(flow - h_deadband, 0.0);
    return std::min(lifted, h_sat);
}

void FluidTorqueParams::validate() const {
    if (!(mu > 0.0)) throw ConfigError("fluid params: mu must be > 0");
    if (!(rho_gain > 0.0)) throw ConfigError("fluid params: rho_gain must be > 0");
    if (h_deadband < 0.0 || h_slope < 0.0 || h_sat < 0.0)
        throw ConfigError("fluid params: h must be monotone non-decreasing with h(0) = 0");
}

double full_open_flow(double pressure_bar) {
    return std::clamp(pressure_bar / kMaxSupplyPressureBar, 0.0, 1.0);
}

double shear_torque(const TurbineGeometry& geom, const FluidTorqueParams& params,
                    const VelocityProfile& profile, int node_count) {
    geom.validate();
    params.validate();
    if (!profile.peak_velocity_at) throw ConfigError("shear_torque: profile has no velocity function");

    int n = std::max(node_count, 101);
    if (n % 2 == 0) ++n;  // Simpson needs an even panel count

    const double r1 = geom.inner_radius;
    const double r2 = geom.outer_radius;
    const double step = (r2 - r1) / (n - 1);

    auto integrand = [&](double r) {
        const double slope = profile.wall_shear_slope(r, geom.half_gap);
        if (!std::isfinite(slope)) {
            std::ostringstream msg;
            msg << "shear_torque: non-finite velocity profile at r = " << r;
            throw NumericalError(msg.str());
        }
        return slope;
    };

    double sum = integrand(r1) + integrand(r2);
    for (int i = 1; i < n - 1; ++i) {
        const double r = r1 + step * i;
        sum += integrand(r) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    const double integral = sum * step / 3.0;
    return geom.gap_count() * params.mu * integral;
}

double flow_to_torque(const ValveCommand& cmd, const FluidTorqueParams& params, double kappa) {
    return cmd.direction * params.rho_gain * params.h(kappa * cmd.u);
}

namespace {

double stall_torque(double pressure_bar, const MotorParams& motor) {
    return motor.fluid.rho_gain * motor.fluid.h(full_open_flow(pressure_bar));
}

// Minimizes a unimodal f over [lo, hi] by golden-section search with a fixed
// iteration count, so identical inputs always land on the same point.
template <typename F>
double golden_min(F&& f, double lo, double hi, int iterations = 120) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double steady_state_speed_rpm(double supply_pressure_bar, const MotorParams& motor) {
    if (!(supply_pressure_bar >= 0.0) || supply_pressure_bar > kMaxSupplyPressureBar) {
        std::ostringstream msg;
        msg << "steady_state_speed: pressure " << supply_pressure_bar << " Bar outside [0, "
            << kMaxSupplyPressureBar << "]";
        throw ConfigError(msg.str());
    }
    motor.validate();

    const double tau = stall_torque(supply_pressure_bar, motor);
    const double c = motor.coulomb_friction;
    if (tau <= c) return 0.0;  // stiction never broken

    // b*omega + c = tau. Bracket above the linear solution and bisect.
    const double b = motor.viscous_friction;
    if (b <= 0.0) throw ConfigError("steady_state_speed: viscous friction must be > 0");
    double lo = 0.0;
    double hi = 2.0 * (tau - c) / b + 1.0;
    auto residual = [&](double omega) { return b * omega + c - tau; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
        if ((hi - lo) <= 1e-9 * std::max(1.0, hi)) break;
    }
    return rad_s_to_rpm(0.5 * (lo + hi));
}

TorqueMapCalibration calibrate_torque_map(const std::vector<SpeedObservation>& observations,
                                          const MotorParams& motor) {
    std::set<double> pressures;
    bool has_stiction_point = false;
    for (const auto& obs : observations) {
        pressures.insert(obs.pressure_bar);
        if (obs.speed_rpm == 0.0) has_stiction_point = true;
    }
    if (pressures.size() < 2)
        throw ConfigError("calibrate_torque_map: need at least 2 observations with distinct pressures");
    if (!has_stiction_point)
        throw ConfigError("calibrate_torque_map: need one zero-speed stiction observation");

    // Single-knee family: h_slope = 1, h_sat = 1 - deadband, so only
    // (rho_gain, h_deadband) are free.
    auto model_rpm = [&](double rho, double deadband, double pressure) {
        MotorParams trial = motor;
        trial.fluid.rho_gain = rho;
        trial.fluid.h_deadband = deadband;
        trial.fluid.h_slope = 1.0;
        trial.fluid.h_sat = 1.0 - deadband;
        return steady_state_speed_rpm(pressure, trial);
    };
    auto sse = [&](double rho, double deadband) {
        double acc = 0.0;
        for (const auto& obs : observations) {
            const double r = model_rpm(rho, deadband, obs.pressure_bar) - obs.speed_rpm;
            acc += r * r;
        }
        return acc;
    };

    const double rho_lo = 1e-6, rho_hi = 1.0;
    const double dead_lo = 0.0, dead_hi = 0.9;
    double rho = 1e-3, deadband = 0.1;
    for (int sweep = 0; sweep < 60; ++sweep) {
        rho = golden_min([&](double r) { return sse(r, deadband); }, rho_lo, rho_hi);
        deadband = golden_min([&](double d) { return sse(rho, d); }, dead_lo, dead_hi);
    }

    TorqueMapCalibration result;
    result.params = motor.fluid;
    result.params.rho_gain = rho;
    result.params.h_deadband = deadband;
    result.params.h_slope = 1.0;
    result.params.h_sat = 1.0 - deadband;
    result.residual_rms_rpm = std::sqrt(sse(rho, deadband) / observations.size());
    return result;
}

}  // namespace teslasim
