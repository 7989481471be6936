#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "urbannav/angles.hpp"
#include "urbannav/city.hpp"
#include "urbannav/estimator.hpp"
#include "urbannav/measurements.hpp"
#include "urbannav/rng.hpp"

namespace urbannav {

struct OdometryParams {
    double ticks_per_rev = 100.0;
    double wheel_radius_m = 0.3;
    double track_width_m = 1.6;
    double slip_sigma = 0.01; // fractional, per wheel per step

    bool valid() const {
        return ticks_per_rev > 0.0 && wheel_radius_m > 0.0 && track_width_m > 0.0 &&
               slip_sigma >= 0.0;
    }
    /// Arc length represented by one encoder tick.
    double tick_arc_m() const { return kTwoPi * wheel_radius_m / ticks_per_rev; }
};

struct DetectionParams {
    double detection_rate = 1.0; // probability a radius entry yields a fix
    double detection_radius_m = 30.0;

    bool valid() const {
        return detection_rate >= 0.0 && detection_rate <= 1.0 && detection_radius_m > 0.0;
    }
};

/// Differential wheel-encoder simulator. Wheel angles accumulate as
/// continuous tick counts and are emitted as integer increments, so the
/// cumulative quantization error never exceeds half a tick per wheel.
class OdometrySimulator {
  public:
    explicit OdometrySimulator(const OdometryParams& params) : params_(params) {}

    OdometryMeasurement simulate(double true_dd, double true_dtheta, RngEngine& rng) {
        const double half_track = 0.5 * params_.track_width_m;
        double arc_left = true_dd - half_track * true_dtheta;
        double arc_right = true_dd + half_track * true_dtheta;
        if (params_.slip_sigma > 0.0) {
            std::normal_distribution<double> slip(0.0, params_.slip_sigma);
            arc_left *= 1.0 + slip(rng);
            arc_right *= 1.0 + slip(rng);
        }
        const double c = params_.tick_arc_m();
        acc_left_ += arc_left / c;
        acc_right_ += arc_right / c;

        OdometryMeasurement m;
        m.ticks_left = std::llround(acc_left_) - emitted_left_;
        m.ticks_right = std::llround(acc_right_) - emitted_right_;
        emitted_left_ += m.ticks_left;
        emitted_right_ += m.ticks_right;
        return m;
    }

  private:
    OdometryParams params_;
    double acc_left_ = 0.0;
    double acc_right_ = 0.0;
    std::int64_t emitted_left_ = 0;
    std::int64_t emitted_right_ = 0;
};

struct OdometryDecoded {
    double dd = 0.0;
    double dtheta = 0.0;
};

inline OdometryDecoded decode_odometry(const OdometryMeasurement& m, const OdometryParams& params) {
    const double c = params.tick_arc_m();
    OdometryDecoded out;
    out.dd = c * static_cast<double>(m.ticks_left + m.ticks_right) * 0.5;
    out.dtheta = c * static_cast<double>(m.ticks_right - m.ticks_left) / params.track_width_m;
    return out;
}

inline CompassMeasurement simulate_compass(double true_theta, double sigma, RngEngine& rng) {
    double z = true_theta;
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        z += noise(rng);
    }
    return CompassMeasurement{wrap_angle(z), sigma};
}

/// Range-triggered landmark detector. Each landmark gets one Bernoulli draw
/// per entry into the detection radius; leaving and re-entering re-arms it.
/// The nearest in-radius landmark with a successful pending draw yields the
/// fix: its true position plus isotropic Gaussian noise.
class LandmarkDetector {
  public:
    explicit LandmarkDetector(const DetectionParams& params) : params_(params) {}

    std::optional<LandmarkFix> observe(double true_x, double true_y,
                                       const std::vector<const Landmark*>& candidates,
                                       double sigma_pos, RngEngine& rng) {
        std::unordered_set<int> now_inside;
        const Landmark* best = nullptr;
        double best_dist = params_.detection_radius_m;
        for (const Landmark* lm : candidates) {
            const double dist = std::hypot(lm->x - true_x, lm->y - true_y);
            if (dist > params_.detection_radius_m) continue;
            now_inside.insert(lm->id);
            if (!pending_.count(lm->id) && !inside_.count(lm->id)) {
                std::bernoulli_distribution arm(params_.detection_rate);
                pending_[lm->id] = arm(rng);
            }
            auto it = pending_.find(lm->id);
            if (it != pending_.end() && it->second && dist <= best_dist) {
                best_dist = dist;
                best = lm;
            }
        }
        // Drop state for landmarks that left the radius.
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (!now_inside.count(it->first)) {
                it = pending_.erase(it);
            } else {
                ++it;
            }
        }
        inside_ = std::move(now_inside);

        if (best == nullptr) return std::nullopt;
        pending_[best->id] = false; // consumed until the next radius entry

        LandmarkFix fix;
        fix.landmark_id = best->id;
        fix.z_x = best->x;
        fix.z_y = best->y;
        if (sigma_pos > 0.0) {
            std::normal_distribution<double> noise(0.0, sigma_pos);
            fix.z_x += noise(rng);
            fix.z_y += noise(rng);
        }
        fix.sigma_pos = sigma_pos;
        return fix;
    }

  private:
    DetectionParams params_;
    std::unordered_set<int> inside_;
    std::unordered_map<int, bool> pending_;
};

/// True if the landmark lies inside the vehicle's 2-sigma position ellipse
/// inflated by the detection radius (closed boundary).
inline bool inside_gate(const PoseEstimate& est, double lm_x, double lm_y,
                        double detection_radius_m) {
    const double a = est.cov(0, 0);
    const double b = est.cov(0, 1);
    const double d = est.cov(1, 1);
    const double half_trace = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - (a * d - b * b)));
    const double lam1 = std::max(0.0, half_trace + disc);
    const double lam2 = std::max(0.0, half_trace - disc);
    const double angle = 0.5 * std::atan2(2.0 * b, a - d);

    const double axis1 = 2.0 * std::sqrt(lam1) + detection_radius_m;
    const double axis2 = 2.0 * std::sqrt(lam2) + detection_radius_m;

    const double px = lm_x - est.x();
    const double py = lm_y - est.y();
    const double u = std::cos(angle) * px + std::sin(angle) * py;
    const double v = -std::sin(angle) * px + std::cos(angle) * py;
    return (u / axis1) * (u / axis1) + (v / axis2) * (v / axis2) <= 1.0;
}

/// The 2-sigma gating mask: landmarks the estimator should even consider.
inline std::vector<Landmark> gate_landmarks(const PoseEstimate& est,
                                            const std::vector<Landmark>& landmarks,
                                            double detection_radius_m) {
    std::vector<Landmark> kept;
    for (const Landmark& lm : landmarks) {
        if (inside_gate(est, lm.x, lm.y, detection_radius_m)) {
            kept.push_back(lm);
        }
    }
    return kept;
}

/// Uniform-bucket spatial index over landmarks for radius queries.
class LandmarkGrid {
  public:
    LandmarkGrid() = default;

    LandmarkGrid(const std::vector<Landmark>& landmarks, double cell_m)
        : landmarks_(&landmarks), cell_m_(cell_m) {
        for (const Landmark& lm : landmarks) {
            buckets_[key(lm.x, lm.y)].push_back(lm.id);
        }
    }

    std::vector<const Landmark*> near(double x, double y, double radius) const {
        std::vector<const Landmark*> out;
        if (landmarks_ == nullptr || landmarks_->empty()) return out;
        const int r = static_cast<int>(std::ceil(radius / cell_m_)) + 1;
        const int cx = static_cast<int>(std::floor(x / cell_m_));
        const int cy = static_cast<int>(std::floor(y / cell_m_));
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                auto it = buckets_.find(pack(cx + dx, cy + dy));
                if (it == buckets_.end()) continue;
                for (int id : it->second) {
                    const Landmark& lm = (*landmarks_)[static_cast<std::size_t>(id)];
                    if (std::hypot(lm.x - x, lm.y - y) <= radius) {
                        out.push_back(&lm);
                    }
                }
            }
        }
        return out;
    }

  private:
    static std::int64_t pack(int cx, int cy) {
        return (static_cast<std::int64_t>(cx) << 32) ^ (static_cast<std::int64_t>(cy) & 0xffffffffLL);
    }
    std::int64_t key(double x, double y) const {
        return pack(static_cast<int>(std::floor(x / cell_m_)), static_cast<int>(std::floor(y / cell_m_)));
    }

    const std::vector<Landmark>* landmarks_ = nullptr;
    double cell_m_ = 50.0;
    std::unordered_map<std::int64_t, std::vector<int>> buckets_;
};

} // namespace urbannav
