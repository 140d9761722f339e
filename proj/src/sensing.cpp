#include "teslasim/sensing.hpp"

#include <cmath>
#include <cstdlib>

#include "teslasim/errors.hpp"
#include "teslasim/units.hpp"

namespace teslasim {

double EncoderConfig::quantum() const { return kTwoPi / pulses_per_rev; }

void EncoderConfig::validate() const {
    if (pulses_per_rev <= 0) throw ConfigError("encoder: pulses_per_rev must be > 0");
}

EncoderSample sample_encoder(double true_angle, const EncoderConfig& cfg,
                             const EncoderState& state, int direction_hint) {
    cfg.validate();
    if (!std::isfinite(true_angle)) throw NumericalError("encoder: non-finite shaft angle");

    const double q = cfg.quantum();
    const long long raw = static_cast<long long>(std::floor(true_angle / q));

    EncoderSample out;
    out.state = state;

    if (!state.primed) {
        out.state.count = raw;
        out.state.primed = true;
    } else {
        if (cfg.quadrature) {
            out.state.count = raw;
        } else {
            // Single channel counts edge magnitude; sign comes from the
            // commanded direction, so reversals between samples are lost.
            const long long edges = std::llabs(raw - state.count);
            out.state.count += direction_hint < 0 ? -edges : edges;
        }
        out.aliasing = std::abs(true_angle - state.last_angle) >= kPi;
    }

    out.state.last_angle = true_angle;
    out.measured_angle = static_cast<double>(out.state.count) * q;
    return out;
}

double estimate_velocity(std::span<const CountSample> samples, double window,
                         const EncoderConfig& cfg) {
    cfg.validate();
    if (!(window > 0.0)) throw ConfigError("estimate_velocity: window must be > 0");
    if (samples.size() < 2) throw ConfigError("estimate_velocity: need at least two samples");

    const CountSample& newest = samples.back();
    // Newest sample at least `window` old, so the difference span is >= window
    // and the quantization error stays within quantum/window. During start-up,
    // when no sample is that old yet, fall back to the oldest available.
    std::size_t lo = samples.size() - 1;
    while (lo > 0 && newest.t - samples[lo].t < window - 1e-12) --lo;
    const CountSample& oldest = samples[lo];

    const double span = newest.t - oldest.t;
    if (!(span > 0.0)) throw ConfigError("estimate_velocity: samples must advance in time");
    const double dcount = static_cast<double>(newest.count - oldest.count);
    return dcount * cfg.quantum() / span;
}

}  // namespace teslasim
