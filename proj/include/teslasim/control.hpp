#pragma once

#include <deque>
#include <utility>

#include "teslasim/turbine.hpp"

namespace teslasim {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double u_max = 10.0;          // valve voltage ceiling, V
    double integral_clamp = 3.0;  // max |ki * integral| contribution, V

    void validate() const;
};

struct PidState {
    double integral = 0.0;    // accumulated error*s
    double prev_error = 0.0;
};

struct PidResult {
    double u_signed = 0.0;
    PidState state;
};

// One step of the position regulator
//   u = -kp*e - ki*integral(e) - kd*q_dot,   e = q - q_d.
// The derivative term uses the measured velocity directly (no derivative
// kick). The integral accumulates trapezoidally, is clamped so its
// contribution never exceeds integral_clamp, and freezes whenever it would
// push the output deeper into saturation.
PidResult pid_step(const PidGains& gains, const PidState& state, double q, double q_d,
                   double q_dot, double dt);

struct ActuationLimits {
    double min_effective_pressure = 0.5;  // Bar, below this stiction wins
    double max_pressure = 4.0;            // Bar
    double max_turbine_rpm = 13000.0;     // structural limit, flagged not clamped
    double solenoid_switch_time = 0.02;   // s, direction change dead time
    double tube_delay = 0.03;             // s, 5 m pneumatic line transport lag

    void validate() const;
};

// Splits the signed controller output into proportional-valve voltage and
// solenoid direction. A sign change opens a solenoid_switch_time interval
// with u forced to 0; the new direction takes effect when it elapses. u is
// clamped to [0, u_max] and never negative.
class CommandShaper {
public:
    CommandShaper(const ActuationLimits& limits, double u_max, double kappa);

    ValveCommand shape(double u_signed, double dt);

    int direction() const { return direction_; }

private:
    double u_max_;
    double kappa_;
    double switch_time_;
    int direction_ = +1;
    int pending_direction_ = +1;
    double switch_remaining_ = 0.0;  // > 0 while a direction change is in flight
};

// Pure transport delay for the pneumatic line: a command issued at time t
// takes effect at t + delay. Zero delay is the identity.
class DelayLine {
public:
    explicit DelayLine(double delay);

    void push(double t, const ValveCommand& cmd);

    // Latest command whose effect time is <= t. Before the first arrival the
    // line holds a zero command.
    ValveCommand at(double t);

private:
    double delay_;
    ValveCommand current_{};  // already past its effect time
    std::deque<std::pair<double, ValveCommand>> pending_;
};

}  // namespace teslasim
