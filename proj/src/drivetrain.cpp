#include "teslasim/drivetrain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "teslasim/errors.hpp"
#include "teslasim/turbine.hpp"
#include "teslasim/units.hpp"

namespace teslasim {

void MotorParams::validate() const {
    if (!(inertia > 0.0)) throw ConfigError("motor params: inertia must be > 0");
    if (viscous_friction < 0.0 || coulomb_friction < 0.0)
        throw ConfigError("motor params: friction coefficients must be >= 0");
    if (!(gear_ratio > 0.0)) throw ConfigError("motor params: gear_ratio must be > 0");
    if (!(screw_lead > 0.0)) throw ConfigError("motor params: screw_lead must be > 0");
    if (!(screw_efficiency > 0.0) || screw_efficiency > 1.0)
        throw ConfigError("motor params: screw_efficiency must be in (0, 1]");
    if (slide_static_friction < 0.0)
        throw ConfigError("motor params: slide_static_friction must be >= 0");
    if (!(valve_gain > 0.0)) throw ConfigError("motor params: valve_gain must be > 0");
    geometry.validate();
    fluid.validate();
}

void LoadModel::validate() const {
    if (entry_depth < 0.0) throw ConfigError("load model: entry_depth must be >= 0");
    if (resistive_force < 0.0 || viscous_load < 0.0)
        throw ConfigError("load model: forces must be >= 0");
}

RotorState step_dynamics(const RotorState& state, double tau_drive, double tau_load,
                         const MotorParams& params, double dt) {
    if (!(dt > 0.0)) throw ConfigError("step_dynamics: dt must be > 0");
    if (!std::isfinite(tau_drive) || !std::isfinite(tau_load)) {
        std::ostringstream msg;
        msg << "step_dynamics: non-finite torque (drive = " << tau_drive
            << ", load = " << tau_load << ")";
        throw NumericalError(msg.str());
    }

    const double tau_net = tau_drive + tau_load;
    const double c = params.coulomb_friction;
    RotorState next = state;

    if (state.velocity == 0.0) {
        // At rest: stiction holds unless the applied torque breaks it.
        if (std::abs(tau_net) <= c) {
            return next;  // angle and velocity unchanged
        }
        const double tau_eff = tau_net - std::copysign(c, tau_net);
        next.velocity = state.velocity + dt * tau_eff / params.inertia;
        next.angle = state.angle + dt * next.velocity;
        return next;
    }

    const double sgn = state.velocity > 0.0 ? 1.0 : -1.0;
    const double tau_fric = -params.viscous_friction * state.velocity - sgn * c;
    const double accel = (tau_net + tau_fric) / params.inertia;
    double v_new = state.velocity + dt * accel;

    if (v_new * state.velocity <= 0.0) {
        // Friction brought the rotor to rest within the step.
        if (std::abs(tau_net) <= c) {
            next.velocity = 0.0;
            next.angle = state.angle;  // sub-step creep is below the encoder quantum
            return next;
        }
        // Applied torque re-breaks stiction; restart from rest.
        v_new = dt * (tau_net - std::copysign(c, tau_net)) / params.inertia;
    }

    next.velocity = v_new;
    next.angle = state.angle + dt * v_new;
    return next;
}

double gearbox_out(double omega_in, double gear_ratio) { return omega_in / gear_ratio; }

double backdrive_filter(double tau, const MotorParams& params) {
    if (!params.non_backdrivable) return tau;
    // Worm-style lock: load torque cannot rotate the stopped screw.
    return 0.0;
}

double screw_position(double output_angle, double lead) {
    return output_angle / kTwoPi * lead;
}

double screw_angle(double position, double lead) { return position / lead * kTwoPi; }

double axial_force(double tau_out, double lead, double efficiency) {
    if (!(lead > 0.0)) throw ConfigError("axial_force: lead must be > 0");
    return kTwoPi * efficiency * tau_out / lead;
}

double tissue_load(double position, double speed, const LoadModel& model) {
    if (model.mode == LoadMode::free_space) return 0.0;
    if (position <= model.entry_depth) return 0.0;
    if (speed == 0.0) return 0.0;
    // Coulomb-type resistance plus viscous drag, opposing whichever way the
    // slide moves. Signed with x_dot; the caller subtracts it.
    const double magnitude = model.resistive_force + model.viscous_load * std::abs(speed);
    return std::copysign(magnitude, speed);
}

double stall_force(double pressure_bar, const MotorParams& motor) {
    const double tau_stall = motor.fluid.rho_gain * motor.fluid.h(full_open_flow(pressure_bar));
    const double tau_out = tau_stall * motor.gear_ratio;
    const double f = axial_force(tau_out, motor.screw_lead, motor.screw_efficiency) -
                     motor.slide_static_friction;
    return std::max(f, 0.0);
}

ForceChainFit calibrate_force_chain(const std::vector<ForceObservation>& observations,
                                    const MotorParams& motor) {
    if (observations.size() < 2)
        throw ConfigError("calibrate_force_chain: need at least 2 force observations");

    // Least-squares line F = A*p + B through the observations, then map the
    // slope and intercept back onto (efficiency, static friction). With the
    // ramp map h(p/4) = (p/4 - d) on the linear branch:
    //   F(p) = K*rho*(p/4 - d) - F_s,  K = 2*pi*eta*ratio/lead
    //   A = K*rho/4      -> eta = 4*A*lead / (2*pi*ratio*rho)
    //   B = -K*rho*d - F_s -> F_s = -B - 4*A*d
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(observations.size());
    for (const auto& obs : observations) {
        sx += obs.pressure_bar;
        sy += obs.force_n;
        sxx += obs.pressure_bar * obs.pressure_bar;
        sxy += obs.pressure_bar * obs.force_n;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12)
        throw ConfigError("calibrate_force_chain: observations need distinct pressures");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    if (!(slope > 0.0))
        throw ConfigError("calibrate_force_chain: force must increase with pressure");

    const double rho = motor.fluid.rho_gain;
    const double slope_h = motor.fluid.h_slope;
    ForceChainFit fit;
    fit.screw_efficiency =
        4.0 * slope * motor.screw_lead / (kTwoPi * motor.gear_ratio * rho * slope_h);
    fit.slide_static_friction = -intercept - 4.0 * slope * motor.fluid.h_deadband;
    if (!(fit.screw_efficiency > 0.0) || fit.screw_efficiency > 1.0) {
        std::ostringstream msg;
        msg << "calibrate_force_chain: implied screw efficiency " << fit.screw_efficiency
            << " outside (0, 1]";
        throw ConfigError(msg.str());
    }
    if (fit.slide_static_friction < 0.0)
        throw ConfigError("calibrate_force_chain: implied slide friction is negative");
    return fit;
}

}  // namespace teslasim
