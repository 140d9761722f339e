#pragma once

#include <span>

namespace teslasim {

// Fibre-optic rotary encoder on the gearbox output shaft. The turbine shaft
// spins too fast to count reliably, so the encoder always observes the
// post-gearbox angle.
struct EncoderConfig {
    int pulses_per_rev = 360;
    bool quadrature = true;  // two channels resolve direction

    double quantum() const;  // rad per pulse
    void validate() const;
};

struct EncoderState {
    long long count = 0;
    double last_angle = 0.0;  // true angle at the previous sample, rad
    bool primed = false;      // false until the first sample
};

struct EncoderSample {
    EncoderState state;
    double measured_angle = 0.0;  // count * quantum, rad
    bool aliasing = false;        // |delta angle| >= pi between samples
};

// Advances the pulse count to the floor-quantized true angle. In quadrature
// mode the count follows the angle in both directions; in single-channel mode
// pulses accumulate by |increment| signed with direction_hint (the commanded
// solenoid state).
EncoderSample sample_encoder(double true_angle, const EncoderConfig& cfg,
                             const EncoderState& state, int direction_hint = +1);

struct CountSample {
    double t = 0.0;
    long long count = 0;
};

// Backward finite difference of the measured angle: uses the newest sample
// and the newest sample at least `window` older (the oldest available during
// start-up, when the history is still shorter than the window). Zero when no
// pulses were observed. Needs at least two samples (ConfigError otherwise).
// For constant-velocity motion the error is bounded by quantum/window, since
// the difference span is never shorter than the window.
double estimate_velocity(std::span<const CountSample> samples, double window,
                         const EncoderConfig& cfg);

}  // namespace teslasim
