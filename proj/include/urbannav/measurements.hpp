#pragma once

#include <cstdint>

namespace urbannav {

/// Incremental encoder counts since the previous reading.
struct OdometryMeasurement {
    std::int64_t ticks_left = 0;
    std::int64_t ticks_right = 0;
};

struct CompassMeasurement {
    double z_theta = 0.0; // rad, wrapped
    double sigma = 0.0;   // rad, 1-sigma
};

struct LandmarkFix {
    int landmark_id = -1;
    double z_x = 0.0;
    double z_y = 0.0;
    double sigma_pos = 0.0; // m, 1-sigma, isotropic
};

} // namespace urbannav
