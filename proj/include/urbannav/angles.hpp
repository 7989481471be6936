#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace urbannav {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    double r = std::remainder(theta, kTwoPi);
    if (r <= -kPi) {
        r += kTwoPi;
    }
    return r;
}

/// Smallest absolute difference between two angles, in [0, pi].
inline double angular_distance(double a, double b) {
    return std::abs(wrap_angle(a - b));
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

} // namespace urbannav
