#pragma once

#include <vector>

#include "teslasim/turbine.hpp"

namespace teslasim {

// Everything mechanical about one actuator: rotor, friction, gearbox, power
// screw, valve gain, plus the turbine geometry and calibrated torque map.
struct MotorParams {
    double inertia = 2.0e-5;           // J, kg*m^2, rotor + disk stack
    double viscous_friction = 3.3e-6;  // b, N*m*s/rad
    double coulomb_friction = 5.0e-4;  // c, N*m
    double gear_ratio = 60.0;          // worm reduction, input/output
    double screw_lead = 0.002;         // m of slide travel per output rev
    double screw_efficiency = 0.06;    // gear+screw chain, calibrated
    double slide_static_friction = 4.9;  // N, stall-force offset, calibrated
    bool non_backdrivable = true;      // worm gear self-locking
    double valve_gain = 0.1;           // kappa, flow fraction per volt
    TurbineGeometry geometry;
    FluidTorqueParams fluid;

    void validate() const;
};

struct RotorState {
    double angle = 0.0;     // q, turbine shaft, rad
    double velocity = 0.0;  // q_dot, rad/s
};

enum class LoadMode { free_space, phantom };

// Needle/tissue interaction: Coulomb-type resistance plus viscous drag once
// the slide is past the tissue entry depth.
struct LoadModel {
    LoadMode mode = LoadMode::free_space;
    double entry_depth = 0.0;      // m, where tissue contact begins
    double resistive_force = 2.0;  // N opposing insertion inside tissue
    double viscous_load = 0.0;     // N*s/m

    void validate() const;
};

// One semi-implicit Euler step of the rotor equation
//   J*q_ddot = -b*q_dot - c*sgn(q_dot) + tau_load + tau_drive
// with explicit stiction handling: a rotor at rest stays at rest while the
// net applied torque is within the Coulomb bound, and a moving rotor stops
// (instead of crossing zero) when friction can absorb the net torque at the
// crossing. Velocity is updated before position.
RotorState step_dynamics(const RotorState& state, double tau_drive, double tau_load,
                         const MotorParams& params, double dt);

// Worm reduction, output = input / ratio. Works for any consistent unit.
double gearbox_out(double omega_turbine, double gear_ratio = 60.0);

// Torque arriving at the turbine shaft from the load side. A self-locking
// worm gear transmits nothing backwards.
double backdrive_filter(double tau_from_load_side, const MotorParams& params);

// Slide position of the power screw, (q_out / 2*pi) * lead.
double screw_position(double output_angle, double lead);
double screw_angle(double position, double lead);  // inverse map

// Axial force delivered by the screw: 2*pi * efficiency * tau_out / lead.
double axial_force(double tau_out, double lead, double efficiency);

// Force opposing the slide's motion (sign of x_dot): zero in free space,
// before tissue entry, or at rest.
double tissue_load(double position, double speed, const LoadModel& model);

// Stalled-slide axial force at a supply pressure through the calibrated
// chain: axial_force(ratio * tau_stall(p)) - slide_static_friction, never
// negative.
double stall_force(double pressure_bar, const MotorParams& motor);

struct ForceObservation {
    double pressure_bar = 0.0;
    double force_n = 0.0;
};

struct ForceChainFit {
    double screw_efficiency = 0.0;
    double slide_static_friction = 0.0;  // N
};

// Fits (screw_efficiency, slide_static_friction) to measured stall forces,
// given the already-calibrated torque map in `motor`. The stall chain is
// affine in pressure over the linear region of h, so the fit reduces to a
// least-squares affine fit mapped back to the two chain parameters. All
// observations must fall in the linear region. Requires >= 2 distinct
// pressures.
ForceChainFit calibrate_force_chain(const std::vector<ForceObservation>& observations,
                                    const MotorParams& motor);

}  // namespace teslasim
