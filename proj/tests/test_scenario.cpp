#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "teslasim/config.hpp"
#include "teslasim/errors.hpp"
#include "teslasim/fixture.hpp"
#include "teslasim/scenario.hpp"
#include "teslasim/trace_io.hpp"
#include "teslasim/units.hpp"

using namespace teslasim;

namespace {

namespace fs = std::filesystem;

fs::path fixture(const char* name) { return fs::path(TESLASIM_FIXTURE_DIR) / name; }

// Fresh directory for configs written by the tests themselves.
fs::path temp_config_dir() {
    const fs::path dir = fs::temp_directory_path() / "teslasim_config_tests";
    fs::create_directories(dir);
    return dir;
}

Scenario short_step(double target_mm, double duration_s) {
    Scenario s = lab_scenario();
    s.duration = duration_s;
    s.targets.points = {{0.0, target_mm}};
    s.label = "unit";
    return s;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("step schedule holds home before the first point") {
    TargetSchedule t;
    t.points = {{1.0, 10.0}, {3.0, 25.0}};
    t.validate();
    CHECK(t.at(0.0) == 0.0);
    CHECK(t.at(0.999) == 0.0);
    CHECK(t.at(1.0) == 10.0);
    CHECK(t.at(2.5) == 10.0);
    CHECK(t.at(3.0) == 25.0);
    CHECK(t.at(100.0) == 25.0);
}

TEST_CASE("ramp schedule clamps at both ends and supports retraction") {
    TargetSchedule t;
    t.ramp = RampSpec{1.0, 0.0, 20.0, 2.0};
    t.validate();
    CHECK(t.at(0.0) == 0.0);
    CHECK(t.at(1.0) == 0.0);
    CHECK(t.at(2.0) == doctest::Approx(2.0));
    CHECK(t.at(6.0) == doctest::Approx(10.0));
    CHECK(t.at(11.0) == 20.0);
    CHECK(t.at(50.0) == 20.0);

    TargetSchedule down;
    down.ramp = RampSpec{0.0, 10.0, 4.0, 3.0};
    CHECK(down.at(1.0) == doctest::Approx(7.0));
    CHECK(down.at(2.0) == 4.0);
    CHECK(down.at(9.0) == 4.0);
}

TEST_CASE("schedule validation names the offending part") {
    TargetSchedule both;
    both.points = {{0.0, 1.0}};
    both.ramp = RampSpec{};
    CHECK_THROWS_AS(both.validate(), ConfigError);

    TargetSchedule unsorted;
    unsorted.points = {{1.0, 1.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(unsorted.validate(), ConfigError);

    TargetSchedule bad_rate;
    bad_rate.ramp = RampSpec{0.0, 0.0, 10.0, 0.0};
    CHECK_THROWS_AS(bad_rate.validate(), ConfigError);

    TargetSchedule nan_point;
    nan_point.points = {{0.0, std::nan("")}};
    CHECK_THROWS_AS(nan_point.validate(), ConfigError);
}

TEST_CASE("scenario validation reports the field that is wrong") {
    Scenario s = short_step(5.0, 1.0);
    s.dt = 0.0;
    CHECK_THROWS_WITH_AS(s.validate(), "scenario.dt: must be in (0, 0.01] s", ConfigError);
    s = short_step(5.0, 1.0);
    s.dt = 0.02;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = short_step(5.0, 1.0);
    s.duration = -1.0;
    CHECK_THROWS_WITH_AS(s.validate(), "scenario.duration: must be > 0", ConfigError);
    s = short_step(5.0, 1.0);
    s.supply_pressure_bar = 4.5;
    CHECK_THROWS_WITH_AS(s.validate(), "scenario.supply_pressure_bar: must be in [0, 4]",
                         ConfigError);
    s = short_step(5.0, 1.0);
    s.velocity_window = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = short_step(5.0, 1.0);
    s.targets.points.clear();
    CHECK_THROWS_WITH_AS(s.validate(), "scenario.targets: schedule is empty", ConfigError);
}

TEST_CASE("zero gains leave the actuator parked") {
    Scenario s = short_step(10.0, 0.5);
    s.gains.kp = 0.0;
    s.gains.ki = 0.0;
    s.gains.kd = 0.0;
    s.dt = 1e-3;

    const std::vector<TraceSample> trace = run_scenario(s);
    REQUIRE(trace.size() == 500);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        CHECK(trace[k].t == static_cast<double>(k) * s.dt);
        CHECK(trace[k].position_mm == 0.0);
        CHECK(trace[k].turbine_speed_rpm == 0.0);
        CHECK(trace[k].u == 0.0);
        CHECK(trace[k].encoder_count == 0);
        CHECK(trace[k].tau_drive == 0.0);
        CHECK(!trace[k].flags.speed_limit_exceeded);
        CHECK(!trace[k].flags.aliasing);
    }
    // The target is still reported, so the error column shows the full gap.
    CHECK(trace.back().error_mm == doctest::Approx(-10.0));
}

TEST_CASE("identical scenarios produce bit-identical traces") {
    Scenario s = short_step(5.0, 1.5);
    const std::vector<TraceSample> a = run_scenario(s);
    const std::vector<TraceSample> b = run_scenario(s);
    REQUIRE(a.size() == b.size());
    CHECK(a == b);
    CHECK(trace_to_csv(a) == trace_to_csv(b));
}

TEST_CASE("speed limit flag is set exactly when the limit is exceeded") {
    Scenario s = short_step(1000.0, 5.0);  // unreachable target keeps the valve railed
    s.limits.max_turbine_rpm = 5000.0;

    const std::vector<TraceSample> trace = run_scenario(s);
    bool any = false;
    for (const TraceSample& r : trace) {
        CHECK(r.flags.speed_limit_exceeded == (r.turbine_speed_rpm > 5000.0));
        any = any || r.flags.speed_limit_exceeded;
    }
    CHECK(any);  // full supply pushes the rotor well past 5000 RPM within 5 s

    // The structural limit equals the full-supply steady state, which the
    // rotor approaches from below: the stock limit never trips.
    Scenario stock = short_step(1000.0, 5.0);
    const std::vector<TraceSample> trace2 = run_scenario(stock);
    for (const TraceSample& r : trace2) {
        CHECK(r.turbine_speed_rpm <= kTurbineSpeedLimitRpm + 1e-6);
        CHECK(!r.flags.speed_limit_exceeded);
    }
}

TEST_CASE("trace survives a CSV round trip exactly") {
    Scenario s = short_step(3.0, 0.8);
    const std::vector<TraceSample> trace = run_scenario(s);
    const std::string csv = trace_to_csv(trace);
    const std::vector<TraceSample> back = trace_from_csv(csv);
    REQUIRE(back.size() == trace.size());
    CHECK(back == trace);
    CHECK(trace_to_csv(back) == csv);
}

TEST_CASE("malformed trace CSV is rejected") {
    Scenario s = short_step(1.0, 0.05);
    const std::string csv = trace_to_csv(run_scenario(s));

    std::string bad_header = csv;
    bad_header[0] = 'x';
    CHECK_THROWS_AS(trace_from_csv(bad_header), ConfigError);

    const std::string::size_type header_end = csv.find('\n');
    std::string short_row = csv.substr(0, header_end + 1) + "0.0,1.0,2.0\n";
    CHECK_THROWS_AS(trace_from_csv(short_row), ConfigError);

    std::string garbage = csv.substr(0, header_end + 1) +
                          "a,b,c,d,e,f,g,h,i,j,k,l,m,n\n";
    CHECK_THROWS_AS(trace_from_csv(garbage), ConfigError);

    CHECK(trace_from_csv(csv.substr(0, header_end + 1)).empty());
}

TEST_CASE("pressure sweep reproduces the anchors and stays monotone") {
    const MotorParams m = lab_motor();
    const std::vector<SweepRow> rows = speed_pressure_sweep(m, {0.3, 0.5, 4.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].speed_rpm == 0.0);
    CHECK(rows[1].speed_rpm == 0.0);
    CHECK(rows[2].speed_rpm == doctest::Approx(13000.0).epsilon(1e-6));

    std::vector<double> grid;
    for (double p = 0.0; p <= 4.0 + 1e-9; p += 0.25) grid.push_back(p);
    const std::vector<SweepRow> sweep = speed_pressure_sweep(m, grid);
    for (std::size_t i = 1; i < sweep.size(); ++i)
        CHECK(sweep[i].speed_rpm >= sweep[i - 1].speed_rpm - 1e-9);

    CHECK(speed_pressure_sweep(m, {}).empty());
    CHECK_THROWS_AS(speed_pressure_sweep(m, {4.5}), ConfigError);
    CHECK_THROWS_AS(speed_pressure_sweep(m, {-0.1}), ConfigError);
}

TEST_CASE("force table reproduces the calibration rows") {
    const MotorParams m = lab_motor();
    const std::vector<ForceRow> rows = force_table(m, {0.5, 1.5, 3.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].force_n == 0.0);  // below the flow deadband the slide never breaks away
    CHECK(rows[1].force_n == doctest::Approx(11.49).epsilon(1e-9));
    CHECK(rows[2].force_n == doctest::Approx(36.01).epsilon(1e-9));
    CHECK_THROWS_AS(force_table(m, {5.0}), ConfigError);
}

TEST_CASE("positioning summarizes a step and settles inside the band") {
    Scenario s = short_step(5.0, 15.0);
    const PositioningReport report = positioning_experiment(s, SettleCriterion{0.5, 2.0});
    REQUIRE(report.rows.size() == 1);
    const PositioningRow& row = report.rows[0];
    CHECK(row.target_mm == 5.0);
    CHECK(std::isfinite(row.settle_time_s));
    CHECK(row.settle_time_s > 0.0);
    CHECK(row.settle_time_s < 15.0);
    CHECK(std::abs(row.final_error_mm) <= 0.5);
    CHECK(row.peak_overshoot_mm >= 0.0);
    CHECK(report.trace.size() == static_cast<std::size_t>(std::llround(15.0 / s.dt)));
}

TEST_CASE("a gain too weak to break stiction never settles") {
    Scenario s = short_step(30.0, 3.0);
    s.gains.kp = 0.05;  // max 1.5 V at 30 mm error, below the valve deadband
    s.gains.kd = 0.0;
    const PositioningReport report = positioning_experiment(s, SettleCriterion{0.5, 1.0});
    REQUIRE(report.rows.size() == 1);
    CHECK(std::isinf(report.rows[0].settle_time_s));
    CHECK(report.rows[0].final_error_mm == doctest::Approx(-30.0));
}

TEST_CASE("positioning with an empty schedule reports nothing") {
    Scenario s = lab_scenario();  // no targets attached
    const PositioningReport report = positioning_experiment(s);
    CHECK(report.rows.empty());
    CHECK(report.trace.empty());

    CHECK_THROWS_AS(positioning_experiment(short_step(5.0, 1.0), SettleCriterion{0.0, 1.0}),
                    ConfigError);
    CHECK_THROWS_AS(positioning_experiment(short_step(5.0, 1.0), SettleCriterion{0.5, -1.0}),
                    ConfigError);
}

TEST_CASE("ramp positioning judges settling from the ramp end") {
    Scenario s = lab_scenario();
    s.targets.ramp = RampSpec{1.0, 0.0, 8.0, 1.0};  // moving target parks at t = 9 s
    s.duration = 16.0;
    const PositioningReport report = positioning_experiment(s, SettleCriterion{0.5, 2.0});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].target_mm == 8.0);
    CHECK(std::isfinite(report.rows[0].settle_time_s));
    CHECK(std::abs(report.rows[0].final_error_mm) <= 0.5);
}

TEST_CASE("tissue drag delays the insertion at every depth") {
    // Unreachable target keeps the valve railed forward in both runs, so the
    // loaded trajectory can never pull ahead during an overshoot reversal.
    Scenario free = short_step(1000.0, 6.0);
    Scenario tissue = short_step(1000.0, 6.0);
    tissue.load.mode = LoadMode::phantom;
    tissue.load.resistive_force = 4.0;

    const std::vector<TraceSample> a = run_scenario(free);
    const std::vector<TraceSample> b = run_scenario(tissue);
    REQUIRE(a.size() == b.size());
    bool strictly_behind = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(b[k].position_mm <= a[k].position_mm + 1e-12);
        strictly_behind = strictly_behind || b[k].position_mm < a[k].position_mm - 1e-9;
    }
    CHECK(strictly_behind);
    // The loaded run reports the contact force once the needle is moving.
    bool saw_force = false;
    for (const TraceSample& r : b) saw_force = saw_force || r.force_n > 0.0;
    CHECK(saw_force);
    for (const TraceSample& r : a) CHECK(r.force_n == 0.0);
}

TEST_CASE("a blown-up gain surfaces as a numerical error, not a crash") {
    Scenario s = short_step(1e30, 1.0);
    s.gains.kp = 1e308;
    CHECK_THROWS_AS(run_scenario(s), NumericalError);
}

TEST_CASE("scenario files merge through their include chain") {
    const Scenario s = load_scenario(fixture("step32_phantom.json"));
    CHECK(s.label == "step32_phantom");
    CHECK(s.load.mode == LoadMode::phantom);
    CHECK(s.load.resistive_force == 2.0);  // inherited from the base file
    CHECK(s.gains.kp == 5.0);
    CHECK(s.motor.screw_efficiency == doctest::Approx(0.0607967007733298).epsilon(1e-15));
    REQUIRE(s.targets.points.size() == 1);
    CHECK(s.targets.points[0].x_mm == 32.0);

    // The base file alone carries no schedule, so it parses but cannot run.
    const Scenario base = load_scenario(fixture("lab_base.json"));
    CHECK(base.targets.empty());
    CHECK_THROWS_AS(run_scenario(base), ConfigError);
}

TEST_CASE("config loader rejects unknown fields by qualified name") {
    const fs::path dir = temp_config_dir();
    const fs::path bad = dir / "unknown_field.json";
    write_file_atomic(bad, R"({"motor": {"bogus": 1.0}})");
    CHECK_THROWS_WITH_AS(load_scenario(bad), "scenario.motor: unknown field 'bogus'",
                         ConfigError);

    const fs::path bad_top = dir / "unknown_top.json";
    write_file_atomic(bad_top, R"({"dtt": 0.001})");
    CHECK_THROWS_WITH_AS(load_scenario(bad_top), "scenario: unknown field 'dtt'", ConfigError);
}

TEST_CASE("config loader names type errors and bad modes") {
    const fs::path dir = temp_config_dir();
    const fs::path bad_type = dir / "bad_type.json";
    write_file_atomic(bad_type, R"({"dt": "fast"})");
    CHECK_THROWS_WITH_AS(load_scenario(bad_type), "scenario.dt: expected a number", ConfigError);

    const fs::path bad_mode = dir / "bad_mode.json";
    write_file_atomic(bad_mode, R"({"load": {"mode": "jelly"}})");
    CHECK_THROWS_AS(load_scenario(bad_mode), ConfigError);

    const fs::path bad_seed = dir / "bad_seed.json";
    write_file_atomic(bad_seed, R"({"seed": -3})");
    CHECK_THROWS_AS(load_scenario(bad_seed), ConfigError);

    const fs::path bad_json = dir / "bad_syntax.json";
    write_file_atomic(bad_json, "{ nope");
    CHECK_THROWS_AS(load_scenario(bad_json), ConfigError);

    CHECK_THROWS_AS(load_scenario(dir / "does_not_exist.json"), ConfigError);
}

TEST_CASE("include cycles are detected") {
    const fs::path dir = temp_config_dir();
    write_file_atomic(dir / "cycle_a.json", R"({"include": "cycle_b.json", "dt": 0.001})");
    write_file_atomic(dir / "cycle_b.json", R"({"include": "cycle_a.json"})");
    try {
        load_scenario(dir / "cycle_a.json");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("include cycle") != std::string::npos);
    }
}

TEST_CASE("scenario serialization round-trips through a file") {
    Scenario s = short_step(7.5, 4.0);
    s.seed = 42;
    s.load.mode = LoadMode::phantom;
    const std::string text = scenario_to_json(s);

    const fs::path dir = temp_config_dir();
    const fs::path path = dir / "roundtrip.json";
    write_file_atomic(path, text);
    const Scenario back = load_scenario(path);
    CHECK(scenario_to_json(back) == text);
    CHECK(back.seed == 42);
    CHECK(back.load.mode == LoadMode::phantom);
    CHECK(run_scenario(back) == run_scenario(s));
}

TEST_CASE("motor parameter files load bare or wrapped in a scenario") {
    const MotorParams bare = load_motor_params(fixture("bench_motor.json"));
    const MotorParams wrapped = load_motor_params(fixture("step32_free.json"));
    CHECK(bare.screw_efficiency == wrapped.screw_efficiency);
    CHECK(bare.fluid.rho_gain == wrapped.fluid.rho_gain);
    CHECK(bare.fluid.rho_gain == doctest::Approx(0.005705688565295319).epsilon(1e-15));

    const std::vector<SpeedObservation> obs =
        load_speed_observations(fixture("speed_observations.json"));
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].pressure_bar == 0.5);
    CHECK(obs[0].speed_rpm == 0.0);
    CHECK(obs[1].pressure_bar == 4.0);
    CHECK(obs[1].speed_rpm == 13000.0);
}

}  // TEST_SUITE
