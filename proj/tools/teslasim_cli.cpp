// Command-line harness around the simulation library: runs scenarios, sweeps,
// calibrations, and image metrics, writing CSV/JSON artifacts under --out.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teslasim/config.hpp"
#include "teslasim/errors.hpp"
#include "teslasim/fixture.hpp"
#include "teslasim/metrics.hpp"
#include "teslasim/trace_io.hpp"

namespace fs = std::filesystem;
using namespace teslasim;

namespace {

// --check found a violated postcondition; maps to exit code 4.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sanitize(const std::string& label) {
    std::string out;
    for (char c : label)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out.empty() ? "scenario" : out;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t pos = csv.find(',', start);
        if (pos == std::string::npos) pos = csv.size();
        out.push_back(parse_double(std::string_view(csv).substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

Roi parse_roi(const std::string& text) {
    const std::vector<double> v = parse_list(text);
    if (v.size() != 4) throw ConfigError("roi '" + text + "': expected x,y,w,h");
    for (double d : v)
        if (d != std::floor(d)) throw ConfigError("roi '" + text + "': expected integers");
    return Roi::rect(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                     static_cast<int>(v[3]));
}

void require_csv(const std::string& format) {
    if (format != "csv")
        throw ConfigError("--format '" + format + "' not supported (csv is the only trace format)");
}

void emit(const fs::path& out_dir, const std::string& name, std::string_view content) {
    const fs::path path = out_dir / name;
    write_file_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

void check_trace(const Scenario& s, const std::vector<TraceSample>& trace) {
    if (trace.empty()) throw CheckFailure("trace is empty");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceSample& r = trace[i];
        const bool finite = std::isfinite(r.t) && std::isfinite(r.turbine_angle) &&
                            std::isfinite(r.turbine_speed_rpm) && std::isfinite(r.position_mm) &&
                            std::isfinite(r.u) && std::isfinite(r.tau_drive) &&
                            std::isfinite(r.tau_load) && std::isfinite(r.force_n) &&
                            std::isfinite(r.error_mm);
        if (!finite) throw CheckFailure("non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(trace[i].t > trace[i - 1].t))
            throw CheckFailure("time not strictly increasing at index " + std::to_string(i));
    }
    const std::string csv = trace_to_csv(trace);
    if (trace_from_csv(csv) != trace) throw CheckFailure("CSV round-trip altered the trace");
    if (trace_to_csv(run_scenario(s)) != csv) throw CheckFailure("re-run produced different bytes");
}

struct CommonOpts {
    std::string out_dir = "./out";
    std::string format = "csv";
    bool check = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", opts.format, "trace format")->capture_default_str();
    cmd->add_flag("--check", opts.check, "verify postconditions; exit 4 on violation");
}

void apply_overrides(Scenario& s, const std::optional<double>& dt,
                     const std::optional<std::uint64_t>& seed) {
    if (dt) s.dt = *dt;
    if (seed) s.seed = *seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tesla-turbine servo actuator simulation harness"};
    app.require_subcommand(1);

    std::string scenario_file, params_file, observations_file, image_file;
    std::optional<std::string> ref_file;
    std::optional<double> dt_override;
    std::optional<std::uint64_t> seed_override;
    std::string pressures_arg, roi_arg, noise_roi_arg, homogeneity_arg = "peak_to_peak_ppm";
    double band_mm = 0.5, hold_s = 2.0;

    CommonOpts run_opts, sweep_opts, force_opts, pos_opts, cal_opts, met_opts;

    CLI::App* cmd_run = app.add_subcommand("run", "run a closed-loop scenario, emit the trace");
    cmd_run->add_option("scenario", scenario_file, "scenario file")->required();
    cmd_run->add_option("--dt", dt_override, "timestep override, s");
    cmd_run->add_option("--seed", seed_override, "seed override");
    add_common(cmd_run, run_opts);
    cmd_run->callback([&] {
        require_csv(run_opts.format);
        Scenario s = load_scenario(scenario_file);
        apply_overrides(s, dt_override, seed_override);
        const std::vector<TraceSample> trace = run_scenario(s);
        if (run_opts.check) check_trace(s, trace);
        emit(run_opts.out_dir, sanitize(s.label) + "_trace.csv", trace_to_csv(trace));
        const TraceSample& last = trace.back();
        std::cout << "final position " << format_double(last.position_mm) << " mm, error "
                  << format_double(last.error_mm) << " mm over " << trace.size() << " samples\n";
    });

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "steady-state speed per supply pressure");
    cmd_sweep->add_option("params", params_file, "motor parameter file")->required();
    cmd_sweep->add_option("--pressures", pressures_arg, "comma-separated list, Bar")->required();
    add_common(cmd_sweep, sweep_opts);
    cmd_sweep->callback([&] {
        require_csv(sweep_opts.format);
        const MotorParams m = load_motor_params(params_file);
        const std::vector<SweepRow> rows = speed_pressure_sweep(m, parse_list(pressures_arg));
        if (sweep_opts.check) {
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (rows[i].pressure_bar >= rows[i - 1].pressure_bar &&
                    rows[i].speed_rpm < rows[i - 1].speed_rpm)
                    throw CheckFailure("speed not monotone in pressure");
        }
        emit(sweep_opts.out_dir, "sweep.csv", sweep_to_csv(rows));
    });

    CLI::App* cmd_force = app.add_subcommand("force-table", "stalled-slide force per pressure");
    cmd_force->add_option("params", params_file, "motor parameter file")->required();
    cmd_force->add_option("--pressures", pressures_arg, "comma-separated list, Bar");
    add_common(cmd_force, force_opts);
    cmd_force->callback([&] {
        require_csv(force_opts.format);
        const MotorParams m = load_motor_params(params_file);
        const std::vector<double> pressures = pressures_arg.empty()
                                                  ? std::vector<double>{1.5, 2.0, 2.5, 3.0}
                                                  : parse_list(pressures_arg);
        const std::vector<ForceRow> rows = force_table(m, pressures);
        if (force_opts.check) {
            for (const ForceRow& r : rows)
                if (r.force_n < 0.0) throw CheckFailure("negative force in table");
        }
        emit(force_opts.out_dir, "force_table.csv", force_table_to_csv(rows));
    });

    CLI::App* cmd_pos = app.add_subcommand("position", "per-target positioning summary");
    cmd_pos->add_option("scenario", scenario_file, "scenario file")->required();
    cmd_pos->add_option("--dt", dt_override, "timestep override, s");
    cmd_pos->add_option("--seed", seed_override, "seed override");
    cmd_pos->add_option("--band", band_mm, "settle band, mm")->capture_default_str();
    cmd_pos->add_option("--hold", hold_s, "settle hold time, s")->capture_default_str();
    add_common(cmd_pos, pos_opts);
    cmd_pos->callback([&] {
        require_csv(pos_opts.format);
        Scenario s = load_scenario(scenario_file);
        apply_overrides(s, dt_override, seed_override);
        const PositioningReport report = positioning_experiment(s, {band_mm, hold_s});
        if (pos_opts.check) {
            const std::size_t expected = s.targets.ramp ? 1 : s.targets.points.size();
            if (report.rows.size() != expected)
                throw CheckFailure("expected one summary row per target");
            check_trace(s, report.trace);
        }
        emit(pos_opts.out_dir, sanitize(s.label) + "_positioning.csv",
             positioning_to_csv(report.rows));
        emit(pos_opts.out_dir, sanitize(s.label) + "_trace.csv", trace_to_csv(report.trace));
    });

    CLI::App* cmd_cal = app.add_subcommand("calibrate", "fit the torque map to speed observations");
    cmd_cal->add_option("observations", observations_file, "speed observations file")->required();
    cmd_cal->add_option("--params", params_file, "base motor parameter file (default: lab fixture)");
    add_common(cmd_cal, cal_opts);
    cmd_cal->callback([&] {
        const MotorParams base = params_file.empty() ? lab_motor() : load_motor_params(params_file);
        const TorqueMapCalibration cal =
            calibrate_torque_map(load_speed_observations(observations_file), base);
        if (cal_opts.check && !(cal.residual_rms_rpm < 1.0))
            throw CheckFailure("calibration residual " + format_double(cal.residual_rms_rpm) +
                               " RPM >= 1 RPM");
        emit(cal_opts.out_dir, "torque_map.json", torque_map_calibration_to_json(cal));
        std::cout << "residual rms " << format_double(cal.residual_rms_rpm) << " RPM\n";
    });

    CLI::App* cmd_met = app.add_subcommand("metrics", "image-quality metrics for a PGM scan");
    cmd_met->add_option("image", image_file, "16-bit PGM image")->required();
    cmd_met->add_option("--ref", ref_file, "reference image for subtraction");
    cmd_met->add_option("--roi", roi_arg, "signal ROI, x,y,w,h")->required();
    cmd_met->add_option("--noise-roi", noise_roi_arg, "noise ROI, x,y,w,h (enables SNR)");
    cmd_met->add_option("--homogeneity-def", homogeneity_arg,
                        "peak_to_peak_ppm | fractional_range")
        ->capture_default_str();
    add_common(cmd_met, met_opts);
    cmd_met->callback([&] {
        const GrayImage img = read_pgm(image_file);
        const Roi signal = parse_roi(roi_arg);

        MetricsReport report;
        report.image_label = image_file;
        report.signal_roi = signal.describe();
        report.homogeneity_def = homogeneity_def_from_string(homogeneity_arg);
        if (!noise_roi_arg.empty()) {
            const Roi noise = parse_roi(noise_roi_arg);
            report.noise_roi = noise.describe();
            report.snr = snr(img, signal, noise);
        }
        report.piu = piu(img, signal);
        report.homogeneity = homogeneity(img, signal, report.homogeneity_def);
        if (ref_file) {
            const GrayImage ref = read_pgm(*ref_file);
            const GrayImage diff = subtract(img, ref);
            long long nonzero = 0;
            int peak = 0;
            for (std::uint16_t px : diff.pixels) {
                if (px != 0) ++nonzero;
                peak = std::max(peak, int(px));
            }
            report.ref_label = *ref_file;
            report.subtract_nonzero = nonzero;
            report.subtract_max = peak;
        }
        if (met_opts.check) {
            if (!(report.piu <= 100.0 + 1e-9)) throw CheckFailure("PIU above 100");
            if (!std::isfinite(report.homogeneity)) throw CheckFailure("non-finite homogeneity");
        }
        const std::string text = report.format();
        emit(met_opts.out_dir, "metrics_report.txt", text);
        std::cout << text;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
