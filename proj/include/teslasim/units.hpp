#pragma once

#include <numbers>

namespace teslasim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Operating envelope of the actuator. Supply pressure above 4 Bar is out of
// range (the rotor deforms past 13000 RPM), so 4 Bar doubles as the
// full-open-flow reference pressure.
inline constexpr double kMaxSupplyPressureBar = 4.0;
inline constexpr double kTurbineSpeedLimitRpm = 13000.0;

inline constexpr double rpm_to_rad_s(double rpm) { return rpm * kPi / 30.0; }
inline constexpr double rad_s_to_rpm(double rad_s) { return rad_s * 30.0 / kPi; }

inline constexpr double mm_to_m(double mm) { return mm * 1e-3; }
inline constexpr double m_to_mm(double m) { return m * 1e3; }

}  // namespace teslasim
