#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "teslasim/errors.hpp"
#include "teslasim/sensing.hpp"
#include "teslasim/units.hpp"

using namespace teslasim;

namespace {

// Runs one sample through the encoder and returns the updated sample.
EncoderSample advance(EncoderState& st, double angle, const EncoderConfig& cfg,
                      int hint = +1) {
    EncoderSample s = sample_encoder(angle, cfg, st, hint);
    st = s.state;
    return s;
}

}  // namespace

TEST_SUITE("sensing") {

TEST_CASE("quantum is one revolution over the pulse count") {
    EncoderConfig cfg;
    CHECK(cfg.quantum() == kTwoPi / 360.0);
    cfg.pulses_per_rev = 1000;
    CHECK(cfg.quantum() == kTwoPi / 1000.0);

    EncoderConfig bad;
    bad.pulses_per_rev = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.pulses_per_rev = -360;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("count is the floor-quantized angle") {
    EncoderConfig cfg;  // 360 PPR
    const double q = cfg.quantum();

    EncoderState st;
    // Mid-quantum angles keep the expectation robust against the last ulp of
    // the angle/quantum division.
    EncoderSample s = advance(st, 90.5 * q, cfg);
    CHECK(s.state.count == 90);
    CHECK(s.measured_angle == 90.0 * q);

    s = advance(st, 90.9 * q, cfg);  // still inside pulse 90
    CHECK(s.state.count == 90);

    s = advance(st, 91.1 * q, cfg);  // one edge later
    CHECK(s.state.count == 91);

    // Negative angles floor away from zero: -0.5 quanta is already pulse -1.
    EncoderState st2;
    s = advance(st2, -0.5 * q, cfg);
    CHECK(s.state.count == -1);
}

TEST_CASE("one revolution is one pulse count per pulse, both directions") {
    EncoderConfig cfg;
    const double q = cfg.quantum();
    const double theta0 = 10.5 * q;

    EncoderState st;
    EncoderSample s = advance(st, theta0, cfg);
    CHECK(s.state.count == 10);

    s = advance(st, theta0 + kTwoPi, cfg);
    CHECK(s.state.count == 370);
    CHECK(s.aliasing);  // a full turn between samples is far past the Nyquist bound

    s = advance(st, theta0 - kTwoPi, cfg);
    CHECK(s.state.count == -350);
}

TEST_CASE("priming sample adopts the absolute count without aliasing") {
    EncoderConfig cfg;
    const double q = cfg.quantum();
    EncoderState st;
    EncoderSample s = advance(st, 1234.5 * q, cfg);
    CHECK(s.state.count == 1234);
    CHECK(!s.aliasing);
    CHECK(s.state.primed);
}

TEST_CASE("quadrature tracks direction reversals by itself") {
    EncoderConfig cfg;
    const double q = cfg.quantum();
    EncoderState st;
    advance(st, 0.5 * q, cfg);
    advance(st, 5.5 * q, cfg);
    EncoderSample s = advance(st, 2.5 * q, cfg);  // backward motion, hint still +1
    CHECK(s.state.count == 2);
}

TEST_CASE("single channel signs edges with the commanded direction") {
    EncoderConfig cfg;
    cfg.quadrature = false;
    const double q = cfg.quantum();

    EncoderState st;
    advance(st, 0.5 * q, cfg, +1);
    EncoderSample s = advance(st, 5.5 * q, cfg, +1);
    CHECK(s.state.count == 5);

    // Backward motion with a stale +1 hint: the 3 edges are added instead of
    // subtracted and the count diverges from the true angle.
    s = advance(st, 2.5 * q, cfg, +1);
    CHECK(s.state.count == 8);

    // Forward motion with a -1 hint walks the count down.
    EncoderState st2;
    advance(st2, 0.5 * q, cfg, -1);
    s = advance(st2, 4.5 * q, cfg, -1);
    CHECK(s.state.count == -4);
}

TEST_CASE("aliasing flags any half-turn jump between samples") {
    EncoderConfig cfg;
    EncoderState st;
    advance(st, 0.0, cfg);

    EncoderSample s = advance(st, kPi - 1e-6, cfg);
    CHECK(!s.aliasing);

    EncoderState st2;
    advance(st2, 0.0, cfg);
    s = advance(st2, kPi, cfg);
    CHECK(s.aliasing);

    EncoderState st3;
    advance(st3, 0.0, cfg);
    s = advance(st3, -kPi - 0.1, cfg);
    CHECK(s.aliasing);
}

TEST_CASE("sample rejects non-finite angles") {
    EncoderConfig cfg;
    EncoderState st;
    CHECK_THROWS_AS(sample_encoder(std::nan(""), cfg, st), NumericalError);
    CHECK_THROWS_AS(sample_encoder(std::numeric_limits<double>::infinity(), cfg, st),
                    NumericalError);
}

TEST_CASE("velocity estimate needs two samples and a positive window") {
    EncoderConfig cfg;
    std::vector<CountSample> one = {{0.0, 0}};
    CHECK_THROWS_AS(estimate_velocity(one, 0.02, cfg), ConfigError);
    std::vector<CountSample> two = {{0.0, 0}, {0.02, 4}};
    CHECK_THROWS_AS(estimate_velocity(two, 0.0, cfg), ConfigError);
    CHECK_THROWS_AS(estimate_velocity(two, -1.0, cfg), ConfigError);
    CHECK(estimate_velocity(two, 0.02, cfg) == doctest::Approx(4.0 * cfg.quantum() / 0.02));
}

TEST_CASE("velocity of a motionless shaft is exactly zero") {
    EncoderConfig cfg;
    std::vector<CountSample> samples;
    for (int k = 0; k <= 50; ++k) samples.push_back({k * 1e-3, 7});
    CHECK(estimate_velocity(samples, 0.02, cfg) == 0.0);
}

TEST_CASE("difference span never collapses below the window") {
    EncoderConfig cfg;
    // Samples every 1 ms; a 20 ms window must difference against a sample at
    // least 20 ms old, not the newest neighbour.
    std::vector<CountSample> samples;
    for (int k = 0; k <= 40; ++k) samples.push_back({k * 1e-3, k});  // 1 count/ms
    const double est = estimate_velocity(samples, 0.02, cfg);
    CHECK(est == doctest::Approx(20.0 * cfg.quantum() / 0.02).epsilon(1e-9));

    // Start-up fallback: history shorter than the window uses the oldest pair.
    std::vector<CountSample> young = {{0.0, 0}, {1e-3, 1}, {2e-3, 2}};
    const double est2 = estimate_velocity(young, 0.02, cfg);
    CHECK(est2 == doctest::Approx(2.0 * cfg.quantum() / 2e-3).epsilon(1e-9));
}

TEST_CASE("constant-velocity error is bounded by quantum over window") {
    EncoderConfig cfg;
    const double q = cfg.quantum();
    const double dt = 1e-3;
    const double window = 0.02;
    const double bound = q / window;

    std::mt19937_64 rng(20240811ULL);
    std::uniform_real_distribution<double> speed(-50.0, 50.0);  // rad/s, well under pi/dt
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    for (int trial = 0; trial < 100; ++trial) {
        const double omega = speed(rng);
        const double theta0 = phase(rng);

        EncoderState st;
        std::vector<CountSample> samples;
        bool aliased = false;
        for (int k = 0; k <= 60; ++k) {
            const double t = k * dt;
            EncoderSample s = advance(st, theta0 + omega * t, cfg);
            aliased = aliased || s.aliasing;
            samples.push_back({t, s.state.count});
        }
        REQUIRE(!aliased);

        const double est = estimate_velocity(samples, window, cfg);
        CHECK(std::abs(est - omega) <= bound + 1e-9);
    }
}

}  // TEST_SUITE
