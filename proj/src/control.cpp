#include "teslasim/control.hpp"

#include <algorithm>
#include <cmath>

#include "teslasim/errors.hpp"

namespace teslasim {

void PidGains::validate() const {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0) throw ConfigError("pid gains: must be >= 0");
    if (!(u_max > 0.0)) throw ConfigError("pid gains: u_max must be > 0");
    if (integral_clamp < 0.0) throw ConfigError("pid gains: integral_clamp must be >= 0");
}

PidResult pid_step(const PidGains& gains, const PidState& state, double q, double q_d,
                   double q_dot, double dt) {
    if (!(dt > 0.0)) throw ConfigError("pid_step: dt must be > 0");
    if (!std::isfinite(q) || !std::isfinite(q_d) || !std::isfinite(q_dot))
        throw NumericalError("pid_step: non-finite controller input");

    const double e = q - q_d;

    PidResult out;
    out.state = state;
    out.state.integral = state.integral + 0.5 * dt * (e + state.prev_error);
    if (gains.ki > 0.0) {
        const double cap = gains.integral_clamp / gains.ki;
        out.state.integral = std::clamp(out.state.integral, -cap, cap);
    }
    out.state.prev_error = e;

    auto output = [&](double integral) {
        return -gains.kp * e - gains.ki * integral - gains.kd * q_dot;
    };

    double u = output(out.state.integral);
    if (std::abs(u) > gains.u_max) {
        // Anti-windup: keep the previous integral if the fresh one drives the
        // output even deeper past the rail.
        const double u_frozen = output(state.integral);
        if (std::abs(u) > std::abs(u_frozen)) {
            out.state.integral = state.integral;
            u = u_frozen;
        }
    }

    out.u_signed = u;
    return out;
}

void ActuationLimits::validate() const {
    if (!(min_effective_pressure >= 0.0) || !(max_pressure > min_effective_pressure))
        throw ConfigError("actuation limits: need 0 <= min_effective_pressure < max_pressure");
    if (!(max_turbine_rpm > 0.0)) throw ConfigError("actuation limits: max_turbine_rpm must be > 0");
    if (solenoid_switch_time < 0.0 || tube_delay < 0.0)
        throw ConfigError("actuation limits: delays must be >= 0");
}

CommandShaper::CommandShaper(const ActuationLimits& limits, double u_max, double kappa)
    : u_max_(u_max), kappa_(kappa), switch_time_(limits.solenoid_switch_time) {
    limits.validate();
    if (!(u_max_ > 0.0)) throw ConfigError("command shaper: u_max must be > 0");
    if (!(kappa_ > 0.0)) throw ConfigError("command shaper: kappa must be > 0");
}

ValveCommand CommandShaper::shape(double u_signed, double dt) {
    if (!(dt > 0.0)) throw ConfigError("command shaper: dt must be > 0");
    if (!std::isfinite(u_signed)) throw NumericalError("command shaper: non-finite command");

    const int wanted = u_signed < 0.0 ? -1 : +1;
    if (switch_remaining_ > 0.0) {
        switch_remaining_ -= dt;
        if (wanted != pending_direction_) {
            // Changed its mind mid-switch: restart the dead time.
            pending_direction_ = wanted;
            switch_remaining_ = switch_time_;
        }
        if (switch_remaining_ <= 1e-12) {
            switch_remaining_ = 0.0;
            direction_ = pending_direction_;
        } else {
            return ValveCommand{0.0, direction_, kappa_};
        }
    } else if (wanted != direction_ && std::abs(u_signed) > 0.0) {
        pending_direction_ = wanted;
        switch_remaining_ = switch_time_ - dt;
        if (switch_remaining_ <= 1e-12) {
            switch_remaining_ = 0.0;
            direction_ = pending_direction_;
        } else {
            return ValveCommand{0.0, direction_, kappa_};
        }
    }

    const double u = std::clamp(std::abs(u_signed), 0.0, u_max_);
    return ValveCommand{u, direction_, kappa_};
}

DelayLine::DelayLine(double delay) : delay_(delay) {
    if (delay_ < 0.0) throw ConfigError("delay line: delay must be >= 0");
}

void DelayLine::push(double t, const ValveCommand& cmd) {
    if (!pending_.empty() && t + delay_ < pending_.back().first)
        throw ConfigError("delay line: commands must be pushed in time order");
    pending_.emplace_back(t + delay_, cmd);
}

ValveCommand DelayLine::at(double t) {
    while (!pending_.empty() && pending_.front().first <= t + 1e-12) {
        current_ = pending_.front().second;
        pending_.pop_front();
    }
    return current_;
}

}  // namespace teslasim
