#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "urbannav/angles.hpp"
#include "urbannav/city.hpp"
#include "urbannav/estimator.hpp"

namespace urbannav {

enum class NavStrategy { StraightToGoal, LandmarkToLandmark, Hybrid };

struct NavConfig {
    NavStrategy strategy = NavStrategy::StraightToGoal;
    double hybrid_threshold_m = 50.0;  // 2-sigma major axis that flips hybrid to landmark seeking
    double penalty_increment_rad = kPi / 3.0;
    double visit_match_radius_m = 50.0;
    double goal_radius_m = 50.0;
    double intersection_radius_m = 15.0; // decision trigger and exit-point offset

    bool valid() const {
        return hybrid_threshold_m > 0.0 && penalty_increment_rad > 0.0 &&
               visit_match_radius_m > 0.0 && goal_radius_m > 0.0 && intersection_radius_m >= 0.0;
    }
};

/// One remembered intersection visit, keyed by the pose estimate at
/// detection time (so memory degrades with the estimate, as intended).
struct VisitRecord {
    double est_x = 0.0;
    double est_y = 0.0;
    int approach_quadrant = 0;
    std::map<int, int> decisions_taken; // option index -> times chosen
};

using VisitMemory = std::vector<VisitRecord>;

/// Cardinal bin of a heading: 0=E, 1=N, 2=W, 3=S.
inline int approach_quadrant(double heading) {
    const double h = wrap_angle(heading);
    if (h > -kPi / 4.0 && h <= kPi / 4.0) return 0;
    if (h > kPi / 4.0 && h <= 3.0 * kPi / 4.0) return 1;
    if (h > -3.0 * kPi / 4.0 && h <= -kPi / 4.0) return 3;
    return 2;
}

/// Nearest stored record within the match radius and with the same
/// approach quadrant; nullptr when none qualifies.
inline const VisitRecord* match_visited(const VisitMemory& memory, const PoseEstimate& est,
                                        int quadrant, const NavConfig& cfg) {
    const VisitRecord* best = nullptr;
    double best_dist = cfg.visit_match_radius_m;
    for (const VisitRecord& rec : memory) {
        if (rec.approach_quadrant != quadrant) continue;
        const double dist = std::hypot(rec.est_x - est.x(), rec.est_y - est.y());
        if (dist <= best_dist) {
            best_dist = dist;
            best = &rec;
        }
    }
    return best;
}

/// Records a decision into memory: increments the matched record's count
/// or starts a new record at the current estimated position.
inline void record_decision(VisitMemory& memory, const PoseEstimate& est, int quadrant,
                            int option_index, const NavConfig& cfg) {
    VisitRecord* best = nullptr;
    double best_dist = cfg.visit_match_radius_m;
    for (VisitRecord& rec : memory) {
        if (rec.approach_quadrant != quadrant) continue;
        const double dist = std::hypot(rec.est_x - est.x(), rec.est_y - est.y());
        if (dist <= best_dist) {
            best_dist = dist;
            best = &rec;
        }
    }
    if (best != nullptr) {
        best->decisions_taken[option_index] += 1;
    } else {
        VisitRecord rec;
        rec.est_x = est.x();
        rec.est_y = est.y();
        rec.approach_quadrant = quadrant;
        rec.decisions_taken[option_index] = 1;
        memory.push_back(rec);
    }
}

struct Decision {
    int index = 0;
    double cost = 0.0;    // winning |theta_plus - goal bearing| + penalty
    double penalty = 0.0; // penalty component of the winning cost
};

/// The intersection decision rule: over options i, minimize
/// |theta_i_plus - phi_i| + gamma_i, where phi_i is the bearing from the
/// post-intersection exit point to the target and gamma_i the revisit
/// penalty. Ties break to the lowest option index.
inline Decision decide_intersection(const std::vector<IntersectionOption>& options,
                                    const PoseEstimate& est, double target_x, double target_y,
                                    const VisitMemory& memory, const NavConfig& cfg) {
    if (options.empty()) {
        throw std::invalid_argument("decide_intersection: no options");
    }
    const int quadrant = approach_quadrant(est.theta());
    const VisitRecord* visited = match_visited(memory, est, quadrant, cfg);

    Decision best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const IntersectionOption& opt : options) {
        const double exit_x = est.x() + cfg.intersection_radius_m * std::cos(opt.theta_plus);
        const double exit_y = est.y() + cfg.intersection_radius_m * std::sin(opt.theta_plus);
        const double bearing = std::atan2(target_y - exit_y, target_x - exit_x);

        double penalty = 0.0;
        if (visited != nullptr) {
            auto it = visited->decisions_taken.find(opt.index);
            if (it != visited->decisions_taken.end()) {
                penalty = cfg.penalty_increment_rad * it->second;
            }
        }
        const double cost = angular_distance(opt.theta_plus, bearing) + penalty;
        if (cost < best_cost) {
            best_cost = cost;
            best = Decision{opt.index, cost, penalty};
        }
    }
    return best;
}

struct TargetPoint {
    double x = 0.0;
    double y = 0.0;
    std::optional<int> landmark_id; // set when the target is a landmark
};

/// Strategy rule for the current navigation target.
///   straight-to-goal: always the goal.
///   landmark-to-landmark: nearest landmark that is closer to the goal
///   than the vehicle is; the goal when none qualifies.
///   hybrid: the goal while the 2-sigma major axis stays below the
///   threshold, otherwise the landmark rule.
inline TargetPoint select_target(const NavConfig& cfg, const PoseEstimate& est,
                                 double goal_x, double goal_y,
                                 const std::vector<Landmark>& landmarks,
                                 const std::set<int>& exclude = {}) {
    const TargetPoint goal{goal_x, goal_y, std::nullopt};
    if (cfg.strategy == NavStrategy::StraightToGoal) return goal;
    if (cfg.strategy == NavStrategy::Hybrid &&
        position_ellipse_major_axis(est) < cfg.hybrid_threshold_m) {
        return goal;
    }

    const double dist_to_goal = std::hypot(goal_x - est.x(), goal_y - est.y());
    const Landmark* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const Landmark& lm : landmarks) {
        if (exclude.count(lm.id)) continue;
        if (std::hypot(lm.x - goal_x, lm.y - goal_y) >= dist_to_goal) continue;
        const double dist = std::hypot(lm.x - est.x(), lm.y - est.y());
        if (dist < best_dist) {
            best_dist = dist;
            best = &lm;
        }
    }
    if (best == nullptr) return goal;
    return TargetPoint{best->x, best->y, best->id};
}

/// Keeps the selected landmark sticky while it is being sought. The pursuit
/// ends when its fix arrives, its vicinity is reached, or the travel budget
/// (three times the initial crow distance) runs out — bearing-following can
/// orbit a mid-block target indefinitely otherwise.
class TargetTracker {
  public:
    TargetPoint current(const NavConfig& cfg, const PoseEstimate& est, double goal_x,
                        double goal_y, const std::vector<Landmark>& landmarks,
                        double traveled_m = 0.0) {
        if (sought_.has_value()) {
            const Landmark* lm = find(landmarks, *sought_);
            const bool arrived =
                lm != nullptr && std::hypot(lm->x - est.x(), lm->y - est.y()) <= cfg.goal_radius_m;
            const bool budget_spent = traveled_m - sought_start_m_ > sought_budget_m_;
            if (lm == nullptr || arrived || budget_spent) {
                spent_.insert(*sought_);
                sought_.reset();
            } else if (cfg.strategy == NavStrategy::Hybrid &&
                       position_ellipse_major_axis(est) < cfg.hybrid_threshold_m) {
                sought_.reset(); // uncertainty recovered; go back to the goal
            } else {
                return TargetPoint{lm->x, lm->y, *sought_};
            }
        }
        const TargetPoint pick = select_target(cfg, est, goal_x, goal_y, landmarks, spent_);
        if (pick.landmark_id.has_value()) {
            sought_ = pick.landmark_id;
            sought_start_m_ = traveled_m;
            const double dist = std::hypot(pick.x - est.x(), pick.y - est.y());
            sought_budget_m_ = std::max(3.0 * dist, 500.0);
        }
        return pick;
    }

    void on_fix(int landmark_id) {
        if (sought_.has_value() && *sought_ == landmark_id) {
            spent_.insert(landmark_id);
            sought_.reset();
        }
    }

    void on_new_goal() {
        sought_.reset();
        spent_.clear();
    }

  private:
    static const Landmark* find(const std::vector<Landmark>& landmarks, int id) {
        for (const Landmark& lm : landmarks) {
            if (lm.id == id) return &lm;
        }
        return nullptr;
    }

    std::optional<int> sought_;
    std::set<int> spent_;
    double sought_start_m_ = 0.0;
    double sought_budget_m_ = 0.0;
};

/// Goal test on the estimated position (closed ball).
inline bool goal_reached(const PoseEstimate& est, double goal_x, double goal_y,
                         const NavConfig& cfg) {
    return std::hypot(goal_x - est.x(), goal_y - est.y()) <= cfg.goal_radius_m;
}

struct SteerGains {
    double kp_cross_track = 0.06; // rad per m
    double kp_heading = 0.8;
    double ki = 0.01;
    double kd = 0.0;
};

struct SpeedGains {
    double kp = 1.0;
    double ki = 0.1;
    double kd = 0.0;
};

/// Steering PID on cross-track and heading error. The integral term is
/// clamped to half the steering authority.
class SteerPid {
  public:
    SteerPid(const SteerGains& gains, double max_steer_rad)
        : gains_(gains), max_steer_(max_steer_rad) {}

    double control(double cross_track_err, double heading_err, double dt) {
        integral_ += cross_track_err * dt;
        double i_term = gains_.ki * integral_;
        const double i_max = 0.5 * max_steer_;
        i_term = std::clamp(i_term, -i_max, i_max);

        double d_term = 0.0;
        if (has_prev_ && dt > 0.0) {
            d_term = gains_.kd * (cross_track_err - prev_err_) / dt;
        }
        prev_err_ = cross_track_err;
        has_prev_ = true;

        const double raw = gains_.kp_cross_track * cross_track_err +
                           gains_.kp_heading * heading_err + i_term + d_term;
        return std::clamp(raw, -max_steer_, max_steer_);
    }

    void reset() {
        integral_ = 0.0;
        prev_err_ = 0.0;
        has_prev_ = false;
    }

  private:
    SteerGains gains_;
    double max_steer_;
    double integral_ = 0.0;
    double prev_err_ = 0.0;
    bool has_prev_ = false;
};

class SpeedPid {
  public:
    SpeedPid(const SpeedGains& gains, double max_accel_mps2)
        : gains_(gains), max_accel_(max_accel_mps2) {}

    double control(double v, double v_ref, double dt) {
        const double err = v_ref - v;
        integral_ += err * dt;
        double i_term = gains_.ki * integral_;
        const double i_max = 0.5 * max_accel_;
        i_term = std::clamp(i_term, -i_max, i_max);

        double d_term = 0.0;
        if (has_prev_ && dt > 0.0) {
            d_term = gains_.kd * (err - prev_err_) / dt;
        }
        prev_err_ = err;
        has_prev_ = true;

        return std::clamp(gains_.kp * err + i_term + d_term, -max_accel_, max_accel_);
    }

    void reset() {
        integral_ = 0.0;
        prev_err_ = 0.0;
        has_prev_ = false;
    }

  private:
    SpeedGains gains_;
    double max_accel_;
    double integral_ = 0.0;
    double prev_err_ = 0.0;
    bool has_prev_ = false;
};

} // namespace urbannav
