#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "teslasim/scenario.hpp"

namespace teslasim {

// Scenario files are JSON with nested sections mirroring the domain types. A
// top-level "include" key names a base file (relative to the including file)
// whose contents are loaded first and deep-merged under the current file.
// Includes may nest; cycles are a ConfigError.
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);

// Motor parameter files hold either the bare motor object or a full scenario
// file, in which case its "motor" section is used.
MotorParams load_motor_params(const std::filesystem::path& path);
std::string motor_params_to_json(const MotorParams& m);

// Calibration inputs: {"observations": [{"pressure_bar": .., "speed_rpm": ..}, ..]}
std::vector<SpeedObservation> load_speed_observations(const std::filesystem::path& path);

std::string torque_map_calibration_to_json(const TorqueMapCalibration& cal);

}  // namespace teslasim
