#pragma once

#include "teslasim/scenario.hpp"

namespace teslasim {

// The lab hardware as built: six-disk 55 mm rotor, 1:60 worm reduction, 2 mm
// lead screw, 360 PPR quadrature encoder. The torque map is calibrated so the
// speed-pressure curve starts at 0.5 Bar and reaches 13000 RPM at 4 Bar; the
// force chain is calibrated to the measured 1.5 and 3.0 Bar stall forces.
MotorParams lab_motor();

// lab_motor plus tuned position-loop gains, actuation limits, and encoder
// config. The gains are a working tune, not a measured quantity.
Scenario lab_scenario();

// Stall-force measurements used to calibrate the force chain (Bar, N).
const std::vector<ForceObservation>& lab_force_rows();

// Speed anchors used to calibrate the torque map (Bar, RPM).
const std::vector<SpeedObservation>& lab_speed_anchors();

}  // namespace teslasim
