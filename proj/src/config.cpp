#include "teslasim/config.hpp"

#include <algorithm>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "teslasim/errors.hpp"
#include "teslasim/trace_io.hpp"

namespace teslasim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Overlay wins; objects merge key by key.
json deep_merge(json base, const json& overlay) {
    if (!base.is_object() || !overlay.is_object()) return overlay;
    for (const auto& [key, value] : overlay.items()) {
        if (base.contains(key))
            base[key] = deep_merge(base[key], value);
        else
            base[key] = value;
    }
    return base;
}

json load_json_tree(const fs::path& path, std::vector<fs::path>& stack) {
    std::error_code ec;
    fs::path canon = fs::weakly_canonical(path, ec);
    if (ec) canon = path;
    if (std::find(stack.begin(), stack.end(), canon) != stack.end())
        throw ConfigError("config: include cycle through '" + path.string() + "'");
    stack.push_back(canon);

    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config '" + path.string() + "': top level must be an object");

    if (j.contains("include")) {
        if (!j.at("include").is_string())
            throw ConfigError("config '" + path.string() + "': include must be a path string");
        const fs::path base_path = path.parent_path() / j.at("include").get<std::string>();
        json base = load_json_tree(base_path, stack);
        j.erase("include");
        j = deep_merge(std::move(base), j);
    }
    stack.pop_back();
    return j;
}

json load_json(const fs::path& path) {
    std::vector<fs::path> stack;
    return load_json_tree(path, stack);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown field '" + key + "'");
    }
}

const json& section(const json& obj, const std::string& where, const char* key, const json& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_object()) throw ConfigError(where + "." + key + ": expected an object");
    return v;
}

double get_num(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& where, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true/false");
    return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& where, const char* key,
                    const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

const json kEmpty = json::object();

MotorParams parse_motor(const json& obj, const std::string& where) {
    MotorParams m;
    reject_unknown(obj, where,
                   {"inertia", "viscous_friction", "coulomb_friction", "gear_ratio", "screw_lead",
                    "screw_efficiency", "slide_static_friction", "non_backdrivable", "valve_gain",
                    "geometry", "fluid"});
    m.inertia = get_num(obj, where, "inertia", m.inertia);
    m.viscous_friction = get_num(obj, where, "viscous_friction", m.viscous_friction);
    m.coulomb_friction = get_num(obj, where, "coulomb_friction", m.coulomb_friction);
    m.gear_ratio = get_num(obj, where, "gear_ratio", m.gear_ratio);
    m.screw_lead = get_num(obj, where, "screw_lead", m.screw_lead);
    m.screw_efficiency = get_num(obj, where, "screw_efficiency", m.screw_efficiency);
    m.slide_static_friction = get_num(obj, where, "slide_static_friction", m.slide_static_friction);
    m.non_backdrivable = get_bool(obj, where, "non_backdrivable", m.non_backdrivable);
    m.valve_gain = get_num(obj, where, "valve_gain", m.valve_gain);

    const json& geo = section(obj, where, "geometry", kEmpty);
    const std::string geo_where = where + ".geometry";
    reject_unknown(geo, geo_where, {"disk_count", "inner_radius", "outer_radius", "half_gap"});
    m.geometry.disk_count = get_int(geo, geo_where, "disk_count", m.geometry.disk_count);
    m.geometry.inner_radius = get_num(geo, geo_where, "inner_radius", m.geometry.inner_radius);
    m.geometry.outer_radius = get_num(geo, geo_where, "outer_radius", m.geometry.outer_radius);
    m.geometry.half_gap = get_num(geo, geo_where, "half_gap", m.geometry.half_gap);

    const json& fl = section(obj, where, "fluid", kEmpty);
    const std::string fl_where = where + ".fluid";
    reject_unknown(fl, fl_where, {"mu", "rho_gain", "h_deadband", "h_slope", "h_sat"});
    m.fluid.mu = get_num(fl, fl_where, "mu", m.fluid.mu);
    m.fluid.rho_gain = get_num(fl, fl_where, "rho_gain", m.fluid.rho_gain);
    m.fluid.h_deadband = get_num(fl, fl_where, "h_deadband", m.fluid.h_deadband);
    m.fluid.h_slope = get_num(fl, fl_where, "h_slope", m.fluid.h_slope);
    m.fluid.h_sat = get_num(fl, fl_where, "h_sat", m.fluid.h_sat);
    return m;
}

TargetSchedule parse_targets(const json& obj, const std::string& where) {
    TargetSchedule t;
    reject_unknown(obj, where, {"points", "ramp"});
    if (obj.contains("points")) {
        const json& pts = obj.at("points");
        if (!pts.is_array()) throw ConfigError(where + ".points: expected an array");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string pt_where = where + ".points[" + std::to_string(i) + "]";
            if (!pts[i].is_object()) throw ConfigError(pt_where + ": expected an object");
            reject_unknown(pts[i], pt_where, {"t", "x_mm"});
            TargetPoint p;
            p.t = get_num(pts[i], pt_where, "t", 0.0);
            p.x_mm = get_num(pts[i], pt_where, "x_mm", 0.0);
            t.points.push_back(p);
        }
    }
    if (obj.contains("ramp")) {
        const json& rj = section(obj, where, "ramp", kEmpty);
        const std::string r_where = where + ".ramp";
        reject_unknown(rj, r_where, {"t0", "x0_mm", "x1_mm", "rate_mm_s"});
        RampSpec r;
        r.t0 = get_num(rj, r_where, "t0", 0.0);
        r.x0_mm = get_num(rj, r_where, "x0_mm", 0.0);
        r.x1_mm = get_num(rj, r_where, "x1_mm", 0.0);
        r.rate_mm_s = get_num(rj, r_where, "rate_mm_s", 1.0);
        t.ramp = r;
    }
    return t;
}

Scenario parse_scenario(const json& j) {
    Scenario s;
    reject_unknown(j, "scenario",
                   {"label", "dt", "duration", "supply_pressure_bar", "velocity_window", "seed",
                    "motor", "gains", "limits", "encoder", "load", "targets"});
    s.label = get_str(j, "scenario", "label", s.label);
    s.dt = get_num(j, "scenario", "dt", s.dt);
    s.duration = get_num(j, "scenario", "duration", s.duration);
    s.supply_pressure_bar = get_num(j, "scenario", "supply_pressure_bar", s.supply_pressure_bar);
    s.velocity_window = get_num(j, "scenario", "velocity_window", s.velocity_window);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw ConfigError("scenario.seed: expected a non-negative integer");
        const auto raw = j.at("seed").get<long long>();
        if (raw < 0) throw ConfigError("scenario.seed: expected a non-negative integer");
        s.seed = static_cast<std::uint64_t>(raw);
    }

    s.motor = parse_motor(section(j, "scenario", "motor", kEmpty), "scenario.motor");

    const json& g = section(j, "scenario", "gains", kEmpty);
    reject_unknown(g, "scenario.gains", {"kp", "ki", "kd", "u_max", "integral_clamp"});
    s.gains.kp = get_num(g, "scenario.gains", "kp", s.gains.kp);
    s.gains.ki = get_num(g, "scenario.gains", "ki", s.gains.ki);
    s.gains.kd = get_num(g, "scenario.gains", "kd", s.gains.kd);
    s.gains.u_max = get_num(g, "scenario.gains", "u_max", s.gains.u_max);
    s.gains.integral_clamp = get_num(g, "scenario.gains", "integral_clamp", s.gains.integral_clamp);

    const json& l = section(j, "scenario", "limits", kEmpty);
    reject_unknown(l, "scenario.limits",
                   {"min_effective_pressure", "max_pressure", "max_turbine_rpm",
                    "solenoid_switch_time", "tube_delay"});
    s.limits.min_effective_pressure =
        get_num(l, "scenario.limits", "min_effective_pressure", s.limits.min_effective_pressure);
    s.limits.max_pressure = get_num(l, "scenario.limits", "max_pressure", s.limits.max_pressure);
    s.limits.max_turbine_rpm =
        get_num(l, "scenario.limits", "max_turbine_rpm", s.limits.max_turbine_rpm);
    s.limits.solenoid_switch_time =
        get_num(l, "scenario.limits", "solenoid_switch_time", s.limits.solenoid_switch_time);
    s.limits.tube_delay = get_num(l, "scenario.limits", "tube_delay", s.limits.tube_delay);

    const json& e = section(j, "scenario", "encoder", kEmpty);
    reject_unknown(e, "scenario.encoder", {"pulses_per_rev", "quadrature"});
    s.encoder.pulses_per_rev = get_int(e, "scenario.encoder", "pulses_per_rev", s.encoder.pulses_per_rev);
    s.encoder.quadrature = get_bool(e, "scenario.encoder", "quadrature", s.encoder.quadrature);

    const json& ld = section(j, "scenario", "load", kEmpty);
    reject_unknown(ld, "scenario.load", {"mode", "entry_depth", "resistive_force", "viscous_load"});
    const std::string mode = get_str(ld, "scenario.load", "mode", "free_space");
    if (mode == "free_space")
        s.load.mode = LoadMode::free_space;
    else if (mode == "phantom")
        s.load.mode = LoadMode::phantom;
    else
        throw ConfigError("scenario.load.mode: unknown mode '" + mode +
                          "' (free_space | phantom)");
    s.load.entry_depth = get_num(ld, "scenario.load", "entry_depth", s.load.entry_depth);
    s.load.resistive_force = get_num(ld, "scenario.load", "resistive_force", s.load.resistive_force);
    s.load.viscous_load = get_num(ld, "scenario.load", "viscous_load", s.load.viscous_load);

    s.targets = parse_targets(section(j, "scenario", "targets", kEmpty), "scenario.targets");
    return s;
}

json motor_to_json(const MotorParams& m) {
    json j;
    j["inertia"] = m.inertia;
    j["viscous_friction"] = m.viscous_friction;
    j["coulomb_friction"] = m.coulomb_friction;
    j["gear_ratio"] = m.gear_ratio;
    j["screw_lead"] = m.screw_lead;
    j["screw_efficiency"] = m.screw_efficiency;
    j["slide_static_friction"] = m.slide_static_friction;
    j["non_backdrivable"] = m.non_backdrivable;
    j["valve_gain"] = m.valve_gain;
    j["geometry"] = {{"disk_count", m.geometry.disk_count},
                     {"inner_radius", m.geometry.inner_radius},
                     {"outer_radius", m.geometry.outer_radius},
                     {"half_gap", m.geometry.half_gap}};
    j["fluid"] = {{"mu", m.fluid.mu},
                  {"rho_gain", m.fluid.rho_gain},
                  {"h_deadband", m.fluid.h_deadband},
                  {"h_slope", m.fluid.h_slope},
                  {"h_sat", m.fluid.h_sat}};
    return j;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(load_json(path));
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["label"] = s.label;
    j["dt"] = s.dt;
    j["duration"] = s.duration;
    j["supply_pressure_bar"] = s.supply_pressure_bar;
    j["velocity_window"] = s.velocity_window;
    j["seed"] = s.seed;
    j["motor"] = motor_to_json(s.motor);
    j["gains"] = {{"kp", s.gains.kp},
                  {"ki", s.gains.ki},
                  {"kd", s.gains.kd},
                  {"u_max", s.gains.u_max},
                  {"integral_clamp", s.gains.integral_clamp}};
    j["limits"] = {{"min_effective_pressure", s.limits.min_effective_pressure},
                   {"max_pressure", s.limits.max_pressure},
                   {"max_turbine_rpm", s.limits.max_turbine_rpm},
                   {"solenoid_switch_time", s.limits.solenoid_switch_time},
                   {"tube_delay", s.limits.tube_delay}};
    j["encoder"] = {{"pulses_per_rev", s.encoder.pulses_per_rev},
                    {"quadrature", s.encoder.quadrature}};
    j["load"] = {{"mode", s.load.mode == LoadMode::phantom ? "phantom" : "free_space"},
                 {"entry_depth", s.load.entry_depth},
                 {"resistive_force", s.load.resistive_force},
                 {"viscous_load", s.load.viscous_load}};
    json targets = json::object();
    if (!s.targets.points.empty()) {
        json pts = json::array();
        for (const auto& p : s.targets.points) pts.push_back({{"t", p.t}, {"x_mm", p.x_mm}});
        targets["points"] = pts;
    }
    if (s.targets.ramp) {
        targets["ramp"] = {{"t0", s.targets.ramp->t0},
                           {"x0_mm", s.targets.ramp->x0_mm},
                           {"x1_mm", s.targets.ramp->x1_mm},
                           {"rate_mm_s", s.targets.ramp->rate_mm_s}};
    }
    j["targets"] = targets;
    return j.dump(2) + "\n";
}

MotorParams load_motor_params(const std::filesystem::path& path) {
    const json j = load_json(path);
    if (j.contains("motor")) return parse_scenario(j).motor;
    return parse_motor(j, "motor");
}

std::string motor_params_to_json(const MotorParams& m) { return motor_to_json(m).dump(2) + "\n"; }

std::vector<SpeedObservation> load_speed_observations(const std::filesystem::path& path) {
    const json j = load_json(path);
    reject_unknown(j, "observations file", {"observations"});
    if (!j.contains("observations") || !j.at("observations").is_array())
        throw ConfigError("observations file: expected an 'observations' array");
    std::vector<SpeedObservation> out;
    const json& arr = j.at("observations");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "observations[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) throw ConfigError(where + ": expected an object");
        reject_unknown(arr[i], where, {"pressure_bar", "speed_rpm"});
        SpeedObservation obs;
        obs.pressure_bar = get_num(arr[i], where, "pressure_bar", 0.0);
        obs.speed_rpm = get_num(arr[i], where, "speed_rpm", 0.0);
        out.push_back(obs);
    }
    return out;
}

std::string torque_map_calibration_to_json(const TorqueMapCalibration& cal) {
    json j;
    j["fluid"] = {{"mu", cal.params.mu},
                  {"rho_gain", cal.params.rho_gain},
                  {"h_deadband", cal.params.h_deadband},
                  {"h_slope", cal.params.h_slope},
                  {"h_sat", cal.params.h_sat}};
    j["residual_rms_rpm"] = cal.residual_rms_rpm;
    return j.dump(2) + "\n";
}

}  // namespace teslasim
