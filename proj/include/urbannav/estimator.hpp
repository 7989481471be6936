#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "urbannav/angles.hpp"
#include "urbannav/measurements.hpp"

namespace urbannav {

/// Pose mean (x, y, theta) with full 3x3 covariance.
struct PoseEstimate {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();

    double x() const { return mean(0); }
    double y() const { return mean(1); }
    double theta() const { return mean(2); }
};

/// Dead-reckoning process noise, parameterized by distance traveled:
/// sigma_d is fractional along-track noise, sigma_dtheta a heading random
/// walk per sqrt(meter).
struct ProcessNoiseParams {
    double sigma_d = 0.01;
    double sigma_dtheta = 0.02;

    bool valid() const { return sigma_d >= 0.0 && sigma_dtheta >= 0.0; }
};

struct PredictJacobians {
    Eigen::Matrix3d F;             // d(next mean) / d(state)
    Eigen::Matrix<double, 3, 2> G; // d(next mean) / d(dd, dtheta)
};

inline PredictJacobians predict_jacobians(const PoseEstimate& est, double dd, double dtheta) {
    const double th_mid = est.theta() + 0.5 * dtheta;
    const double c = std::cos(th_mid);
    const double s = std::sin(th_mid);

    PredictJacobians j;
    j.F = Eigen::Matrix3d::Identity();
    j.F(0, 2) = -dd * s;
    j.F(1, 2) = dd * c;
    j.G << c, -0.5 * dd * s,
           s, 0.5 * dd * c,
           0.0, 1.0;
    return j;
}

/// Propagates the estimate by a decoded odometry increment (dd, dtheta).
/// Mean uses the midpoint heading; covariance is F P F^T + G Q G^T with
/// F, G the Jacobians w.r.t. state and increment.
inline PoseEstimate predict(const PoseEstimate& est, double dd, double dtheta,
                            const ProcessNoiseParams& q) {
    const double th_mid = est.theta() + 0.5 * dtheta;

    PoseEstimate out;
    out.mean(0) = est.x() + dd * std::cos(th_mid);
    out.mean(1) = est.y() + dd * std::sin(th_mid);
    out.mean(2) = wrap_angle(est.theta() + dtheta);

    const PredictJacobians j = predict_jacobians(est, dd, dtheta);

    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(0, 0) = (q.sigma_d * dd) * (q.sigma_d * dd);
    Q(1, 1) = q.sigma_dtheta * q.sigma_dtheta * std::abs(dd);

    out.cov = j.F * est.cov * j.F.transpose() + j.G * Q * j.G.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

/// Scalar heading update. The innovation is wrapped before the gain is
/// applied; Joseph form keeps the covariance PSD.
inline PoseEstimate update_compass(const PoseEstimate& est, const CompassMeasurement& z) {
    const double R = z.sigma * z.sigma;
    const double S = est.cov(2, 2) + R;
    const Eigen::Vector3d K = est.cov.col(2) / S;
    const double innovation = wrap_angle(z.z_theta - est.theta());

    PoseEstimate out;
    out.mean = est.mean + K * innovation;
    out.mean(2) = wrap_angle(out.mean(2));

    Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity();
    IKH.col(2) -= K;
    out.cov = IKH * est.cov * IKH.transpose() + (K * R) * K.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

/// Direct position update from a landmark fix, R = sigma_pos^2 * I2.
inline PoseEstimate update_landmark(const PoseEstimate& est, const LandmarkFix& fix) {
    Eigen::Matrix<double, 2, 3> H = Eigen::Matrix<double, 2, 3>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;

    const double r = fix.sigma_pos * fix.sigma_pos;
    const Eigen::Matrix2d R = r * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d S = est.cov.topLeftCorner<2, 2>() + R;
    const Eigen::Matrix<double, 3, 2> K = est.cov.leftCols<2>() * S.inverse();

    const Eigen::Vector2d innovation(fix.z_x - est.x(), fix.z_y - est.y());

    PoseEstimate out;
    out.mean = est.mean + K * innovation;
    out.mean(2) = wrap_angle(out.mean(2));

    const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;
    out.cov = IKH * est.cov * IKH.transpose() + K * R * K.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

/// Larger eigenvalue of the 2x2 position covariance block.
inline double position_lambda_max(const PoseEstimate& est) {
    const double a = est.cov(0, 0);
    const double b = est.cov(0, 1);
    const double d = est.cov(1, 1);
    const double half_trace = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - (a * d - b * b)));
    return std::max(0.0, half_trace + disc);
}

/// Full major-axis length of the 2-sigma position uncertainty ellipse.
inline double position_ellipse_major_axis(const PoseEstimate& est) {
    return 4.0 * std::sqrt(position_lambda_max(est));
}

/// Lost once the 2-sigma major axis strictly exceeds the threshold.
inline bool is_lost(const PoseEstimate& est, double threshold_m) {
    return position_ellipse_major_axis(est) > threshold_m;
}

} // namespace urbannav
