#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "urbannav/angles.hpp"

namespace urbannav {

/// Rear-axle pose and speed of the simulated vehicle.
struct VehicleState {
    double x = 0.0;     // m
    double y = 0.0;     // m
    double theta = 0.0; // rad, wrapped to (-pi, pi]
    double v = 0.0;     // m/s, never negative
};

struct ControlInput {
    double accel = 0.0; // m/s^2
    double steer = 0.0; // rad, front-wheel steering angle
};

struct DynamicsParams {
    double wheelbase_m = 2.85; // axle-to-axle length
    double dt_s = 0.1;         // prediction time step

    bool valid() const { return wheelbase_m > 0.0 && dt_s > 0.0; }
};

// Actuator limits applied by the controllers.
inline constexpr double kMaxSteerRad = 0.55;
inline constexpr double kMaxAccelMps2 = 3.0;

// Below this steering angle the arc formulas degenerate (turn radius
// l/steer blows up); switch to the series expansion in the displacement.
inline constexpr double kSteerEpsilonRad = 1e-6;

struct Displacement {
    double dx = 0.0;     // m, along the pre-step heading
    double dy = 0.0;     // m, lateral
    double dtheta = 0.0; // rad
};

/// Body-frame displacement over one step of the bicycle model.
///
/// Exact circular-arc form: rho = l / steer, dtheta = d / rho,
/// dx = rho * sin(dtheta), dy = rho * (1 - cos(dtheta)), with
/// d = 0.5 * a * dt^2 + v * dt the arc length driven this step.
inline Displacement displacement_terms(double v, const ControlInput& ctrl,
                                       const DynamicsParams& params) {
    if (!params.valid()) {
        throw std::invalid_argument("displacement_terms: invalid dynamics params");
    }
    const double d = 0.5 * ctrl.accel * params.dt_s * params.dt_s + v * params.dt_s;

    Displacement out;
    if (std::abs(ctrl.steer) < kSteerEpsilonRad) {
        // dtheta = d * steer / l stays well defined; expand sin/cos so the
        // branch is continuous with the exact form at the threshold.
        const double dtheta = d * ctrl.steer / params.wheelbase_m;
        out.dtheta = dtheta;
        out.dx = d * (1.0 - dtheta * dtheta / 6.0);
        out.dy = d * dtheta * 0.5;
    } else {
        const double rho = params.wheelbase_m / ctrl.steer;
        const double dtheta = d / rho;
        out.dtheta = dtheta;
        out.dx = rho * std::sin(dtheta);
        out.dy = rho * (1.0 - std::cos(dtheta));
    }
    return out;
}

/// One step of the four-state bicycle model (position, heading, speed).
inline VehicleState step(const VehicleState& state, const ControlInput& ctrl,
                         const DynamicsParams& params) {
    const Displacement d = displacement_terms(state.v, ctrl, params);
    const double c = std::cos(state.theta);
    const double s = std::sin(state.theta);

    VehicleState next;
    next.x = state.x + d.dx * c - d.dy * s;
    next.y = state.y + d.dx * s + d.dy * c;
    next.theta = wrap_angle(state.theta + d.dtheta);
    next.v = std::max(0.0, state.v + ctrl.accel * params.dt_s);
    return next;
}

} // namespace urbannav
