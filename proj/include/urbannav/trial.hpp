#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "urbannav/citygen.hpp"
#include "urbannav/dynamics.hpp"
#include "urbannav/estimator.hpp"
#include "urbannav/navigation.hpp"
#include "urbannav/sensors.hpp"

namespace urbannav {

struct TrialConfig {
    CityGenParams city;
    DynamicsParams dynamics;
    OdometryParams odometry;
    double compass_sigma_rad = deg_to_rad(15.0); // 1-sigma; 0 disables the compass
    double compass_period_s = 0.2;
    DetectionParams detection;
    double fix_sigma_m = 5.0;
    NavConfig nav;
    ProcessNoiseParams process_noise;
    double init_sigma_xy_m = 1.0;
    double init_sigma_theta_rad = 0.02;
    double lost_threshold_m = 100.0;
    double max_sim_time_s = 0.0; // 0: auto, 5 * euclid / v_ref
    double v_ref_mps = 10.0;
    double goal_min_euclid_m = 2000.0;
    double goal_max_euclid_m = 8000.0;
    // Chained-goal protocol: respawn the goal on arrival until the
    // cumulative Euclidean progression (or the travel cap) is hit.
    bool chain_goals = false;
    double chain_target_euclid_m = 0.0; // 0: unbounded
    double manhattan_cap_m = 0.0;       // 0: no cap
    std::uint64_t seed = 1;
    std::uint64_t scenario_seed = 0; // 0: reuse seed; set for scenario-matched studies

    void validate() const {
        if (!city.valid()) throw std::invalid_argument("config: invalid city params");
        if (!dynamics.valid()) throw std::invalid_argument("config: invalid dynamics params");
        if (!odometry.valid()) throw std::invalid_argument("config: invalid odometry params");
        if (compass_sigma_rad < 0.0) throw std::invalid_argument("config: negative compass sigma");
        if (compass_period_s <= 0.0) throw std::invalid_argument("config: compass period must be > 0");
        if (!detection.valid()) throw std::invalid_argument("config: invalid detection params");
        if (fix_sigma_m <= 0.0) throw std::invalid_argument("config: fix sigma must be > 0");
        if (!nav.valid() || nav.intersection_radius_m <= 0.0)
            throw std::invalid_argument("config: invalid nav params");
        if (!process_noise.valid()) throw std::invalid_argument("config: invalid process noise");
        if (init_sigma_xy_m < 0.0 || init_sigma_theta_rad < 0.0)
            throw std::invalid_argument("config: negative initial sigma");
        if (lost_threshold_m <= 0.0) throw std::invalid_argument("config: lost threshold must be > 0");
        if (max_sim_time_s < 0.0) throw std::invalid_argument("config: negative max sim time");
        if (v_ref_mps <= 0.0) throw std::invalid_argument("config: v_ref must be > 0");
        if (goal_min_euclid_m < 0.0 || goal_max_euclid_m < goal_min_euclid_m)
            throw std::invalid_argument("config: bad goal distance band");
        if (chain_target_euclid_m < 0.0 || manhattan_cap_m < 0.0)
            throw std::invalid_argument("config: negative cap");
    }
};

enum class TrialOutcome { Reached, Lost, Timeout, Stuck };

inline const char* to_string(TrialOutcome o) {
    switch (o) {
        case TrialOutcome::Reached: return "reached";
        case TrialOutcome::Lost: return "lost";
        case TrialOutcome::Timeout: return "timeout";
        case TrialOutcome::Stuck: return "stuck";
    }
    return "?";
}

struct TrialResult {
    TrialOutcome outcome = TrialOutcome::Timeout;
    double manhattan_distance_m = 0.0;      // odometric path length at termination
    double euclidean_start_goal_m = 0.0;    // first goal leg
    double cumulative_euclid_m = 0.0;       // sum over completed goal legs
    double final_axis_m = 0.0;
    int n_landmark_fixes = 0;
    int n_intersections = 0;
    int goals_reached = 0;
    std::string wall_events; // decision-log path when tracing

    bool operator==(const TrialResult&) const = default;
};

/// Optional CSV sinks for a traced run.
struct TraceSinks {
    std::ostream* estimate = nullptr;  // t,x,y,theta,axis_m,event
    std::ostream* decisions = nullptr; // t,intersection_x_est,intersection_y_est,n_options,chosen_index,cost_chosen,penalty_applied
};

namespace detail {

struct Leg {
    double from_x = 0.0, from_y = 0.0;
    double to_x = 0.0, to_y = 0.0;
    double heading = 0.0;
    double length = 0.0;
    int end_node = -1;    // -1 for cap legs
    int segment_id = -1;
    bool to_cap = false;

    void set(double fx, double fy, double tx, double ty, int node, int seg, bool cap) {
        from_x = fx;
        from_y = fy;
        to_x = tx;
        to_y = ty;
        heading = std::atan2(ty - fy, tx - fx);
        length = std::hypot(tx - fx, ty - fy);
        end_node = node;
        segment_id = seg;
        to_cap = cap;
    }
};

} // namespace detail

/// Runs one closed-loop trial. Deterministic in the config: every random
/// draw comes from generators derived from cfg.seed / cfg.scenario_seed.
class TrialRunner {
  public:
    explicit TrialRunner(const TrialConfig& cfg, TraceSinks sinks = {})
        : cfg_(cfg), sinks_(sinks) {
        cfg_.validate();
    }

    TrialResult run() {
        setup_scenario();
        setup_state();

        const double dt = cfg_.dynamics.dt_s;
        const int compass_every = std::max(1, static_cast<int>(std::lround(cfg_.compass_period_s / dt)));
        const double max_time = cfg_.max_sim_time_s > 0.0
                                    ? cfg_.max_sim_time_s
                                    : 5.0 * result_.euclidean_start_goal_m / cfg_.v_ref_mps;

        double t = 0.0;
        int step_count = 0;
        double progress_mark_x = truth_.x;
        double progress_mark_y = truth_.y;
        double progress_mark_t = 0.0;

        while (true) {
            // Inner loop: true-state path tracking (the high-level layer
            // below only ever sees the estimate).
            const double ux = std::cos(leg_.heading);
            const double uy = std::sin(leg_.heading);
            const double wx = truth_.x - leg_.from_x;
            const double wy = truth_.y - leg_.from_y;
            const double lateral_left = ux * wy - uy * wx;
            const double cross_track = -lateral_left;
            const double heading_err = wrap_angle(leg_.heading - truth_.theta);

            ControlInput ctrl;
            ctrl.steer = steer_pid_.control(cross_track, heading_err, dt);
            ctrl.accel = speed_pid_.control(truth_.v, cfg_.v_ref_mps, dt);

            const Displacement disp = displacement_terms(truth_.v, ctrl, cfg_.dynamics);
            const double arc = 0.5 * ctrl.accel * dt * dt + truth_.v * dt;
            truth_ = step(truth_, ctrl, cfg_.dynamics);
            manhattan_m_ += std::abs(arc);

            apply_odometry(arc, disp.dtheta);
            t += dt;
            ++step_count;
            trace_estimate(t, "predict");

            if (cfg_.compass_sigma_rad > 0.0 && step_count % compass_every == 0) {
                const CompassMeasurement z =
                    simulate_compass(truth_.theta, cfg_.compass_sigma_rad, compass_rng_);
                est_ = update_compass(est_, z);
                trace_estimate(t, "compass");
            }

            observe_landmarks(t);

            if (is_lost(est_, cfg_.lost_threshold_m)) {
                return finish(TrialOutcome::Lost);
            }

            if (goal_reached(est_, goal_x_, goal_y_, cfg_.nav)) {
                result_.goals_reached += 1;
                result_.cumulative_euclid_m += leg_euclid_m_;
                if (!cfg_.chain_goals) {
                    return finish(TrialOutcome::Reached);
                }
                if (cfg_.chain_target_euclid_m > 0.0 &&
                    result_.cumulative_euclid_m >= cfg_.chain_target_euclid_m) {
                    return finish(TrialOutcome::Reached);
                }
                if (!spawn_next_goal()) {
                    return finish(TrialOutcome::Stuck);
                }
            }

            if (!handle_leg_transitions(t)) {
                return finish(TrialOutcome::Stuck);
            }

            if (cfg_.manhattan_cap_m > 0.0 && manhattan_m_ >= cfg_.manhattan_cap_m) {
                return finish(TrialOutcome::Timeout);
            }
            if (t >= max_time) {
                return finish(TrialOutcome::Timeout);
            }

            // Stuck alarm: essentially no displacement over a trailing minute.
            if (t - progress_mark_t > 60.0) {
                const double moved = std::hypot(truth_.x - progress_mark_x, truth_.y - progress_mark_y);
                if (moved < 20.0) {
                    return finish(TrialOutcome::Stuck);
                }
                progress_mark_x = truth_.x;
                progress_mark_y = truth_.y;
                progress_mark_t = t;
            }
        }
    }

    const Scenario& scenario() const { return scenario_; }

  private:
    void setup_scenario() {
        const std::uint64_t sseed = cfg_.scenario_seed != 0 ? cfg_.scenario_seed : cfg_.seed;
        std::string last_error = "no attempt";
        for (int attempt = 0; attempt < 20; ++attempt) {
            CityGenParams city = cfg_.city;
            city.seed = mix_seed({sseed, 0xC171u, static_cast<std::uint64_t>(attempt)});
            const CityMap map = generate_city(city);
            try {
                scenario_ = sample_start_goal(map, cfg_.goal_min_euclid_m, cfg_.goal_max_euclid_m,
                                              mix_seed({sseed, 0x60A1u, static_cast<std::uint64_t>(attempt)}));
                result_.euclidean_start_goal_m = scenario_.euclidean_start_goal_m;
                return;
            } catch (const std::runtime_error& e) {
                last_error = e.what();
            }
        }
        throw std::runtime_error("run_trial: could not build a feasible scenario: " + last_error);
    }

    void setup_state() {
        truth_.x = scenario_.start_x;
        truth_.y = scenario_.start_y;
        truth_.theta = scenario_.start_theta;
        truth_.v = 0.0;

        est_.mean = Eigen::Vector3d(scenario_.start_x, scenario_.start_y, scenario_.start_theta);
        est_.cov = Eigen::Matrix3d::Zero();
        est_.cov(0, 0) = cfg_.init_sigma_xy_m * cfg_.init_sigma_xy_m;
        est_.cov(1, 1) = cfg_.init_sigma_xy_m * cfg_.init_sigma_xy_m;
        est_.cov(2, 2) = cfg_.init_sigma_theta_rad * cfg_.init_sigma_theta_rad;

        goal_x_ = scenario_.goal_x;
        goal_y_ = scenario_.goal_y;
        leg_euclid_m_ = scenario_.euclidean_start_goal_m;

        odo_rng_ = make_engine({cfg_.seed, stream::kOdometry});
        compass_rng_ = make_engine({cfg_.seed, stream::kCompass});
        det_rng_ = make_engine({cfg_.seed, stream::kDetection});
        chain_rng_ = make_engine({cfg_.seed, stream::kGoalChain});

        odo_.emplace(cfg_.odometry);
        detector_.emplace(cfg_.detection);
        grid_ = LandmarkGrid(scenario_.map.landmarks,
                             std::max(10.0, cfg_.detection.detection_radius_m));

        // First leg: the start segment's centerline toward the exit node.
        const CityMap& map = scenario_.map;
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(scenario_.start_segment_id)];
        const double head_ab = map.segment_heading_from(seg, seg.a);
        const bool toward_b = angular_distance(scenario_.start_theta, head_ab) < kPi / 2.0;
        const int behind = toward_b ? seg.a : seg.b;
        const int ahead = toward_b ? seg.b : seg.a;
        leg_.set(map.node(behind).x, map.node(behind).y, map.node(ahead).x, map.node(ahead).y,
                 ahead, seg.id, false);
    }

    void apply_odometry(double true_dd, double true_dtheta) {
        const OdometryMeasurement m = odo_->simulate(true_dd, true_dtheta, odo_rng_);
        const OdometryDecoded dec = decode_odometry(m, cfg_.odometry);
        est_ = predict(est_, dec.dd, dec.dtheta, cfg_.process_noise);
    }

    void observe_landmarks(double t) {
        if (scenario_.map.landmarks.empty()) return;
        const auto near = grid_.near(truth_.x, truth_.y, cfg_.detection.detection_radius_m);
        if (near.empty()) return;
        const auto fix = detector_->observe(truth_.x, truth_.y, near, cfg_.fix_sigma_m, det_rng_);
        if (!fix.has_value()) return;

        // The 2-sigma mask: a detection of a landmark the estimator would
        // not have considered is discarded.
        const Landmark& lm = scenario_.map.landmarks[static_cast<std::size_t>(fix->landmark_id)];
        if (!inside_gate(est_, lm.x, lm.y, cfg_.detection.detection_radius_m)) return;

        est_ = update_landmark(est_, *fix);
        result_.n_landmark_fixes += 1;
        tracker_.on_fix(fix->landmark_id);
        trace_estimate(t, "landmark");
    }

    bool spawn_next_goal() {
        const int from_node = leg_.end_node >= 0
                                  ? leg_.end_node
                                  : scenario_.map.nearest_node(truth_.x, truth_.y);
        double lo = cfg_.goal_min_euclid_m;
        double hi = cfg_.goal_max_euclid_m;
        for (int widen = 0; widen < 3; ++widen) {
            const auto goal = sample_goal_from_node(scenario_.map, from_node, truth_.x, truth_.y,
                                                    lo, hi, chain_rng_);
            if (goal.has_value()) {
                goal_x_ = goal->x;
                goal_y_ = goal->y;
                leg_euclid_m_ = std::hypot(goal->x - truth_.x, goal->y - truth_.y);
                tracker_.on_new_goal();
                return true;
            }
            lo = std::max(0.0, lo * 0.5);
            hi *= 2.0;
        }
        return false;
    }

    // Intersection decisions and dead-end caps. Returns false when the
    // vehicle has no legal continuation.
    bool handle_leg_transitions(double t) {
        const CityMap& map = scenario_.map;

        if (leg_.to_cap) {
            const double remaining = std::hypot(leg_.to_x - truth_.x, leg_.to_y - truth_.y);
            const double along = (truth_.x - leg_.from_x) * std::cos(leg_.heading) +
                                 (truth_.y - leg_.from_y) * std::sin(leg_.heading);
            if (remaining < 3.0 || along >= leg_.length) {
                reverse_in_place(t);
                const RoadSegment& seg = map.segments[static_cast<std::size_t>(leg_.segment_id)];
                const int back_node = entered_cap_from_;
                leg_.set(leg_.to_x, leg_.to_y, map.node(back_node).x, map.node(back_node).y,
                         back_node, seg.id, false);
                decided_ = false;
                steer_pid_.reset();
            }
            return true;
        }

        if (decided_ || leg_.end_node < 0) return true;
        const double dist_to_node =
            std::hypot(leg_.to_x - truth_.x, leg_.to_y - truth_.y);
        if (dist_to_node > cfg_.nav.intersection_radius_m) return true;

        std::vector<IntersectionOption> options;
        try {
            options = intersection_options(map, leg_.end_node, leg_.heading);
        } catch (const std::exception&) {
            return false;
        }

        const TargetPoint target =
            tracker_.current(cfg_.nav, est_, goal_x_, goal_y_, map.landmarks, manhattan_m_);
        const Decision decision =
            decide_intersection(options, est_, target.x, target.y, memory_, cfg_.nav);
        const int quadrant = approach_quadrant(est_.theta());
        record_decision(memory_, est_, quadrant, decision.index, cfg_.nav);
        result_.n_intersections += 1;
        trace_estimate(t, "intersection");
        if (sinks_.decisions != nullptr) {
            char buf[192];
            std::snprintf(buf, sizeof(buf), "%.1f,%.3f,%.3f,%zu,%d,%.6f,%.6f\n", t, est_.x(),
                          est_.y(), options.size(), decision.index, decision.cost,
                          decision.penalty);
            *sinks_.decisions << buf;
        }

        const IntersectionOption& chosen = options[static_cast<std::size_t>(decision.index)];
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(chosen.exit_segment_id)];
        const int node = leg_.end_node;
        const double nx = map.node(node).x;
        const double ny = map.node(node).y;

        const bool u_turn = angular_distance(chosen.theta_plus, leg_.heading) > 3.0 * kPi / 4.0;
        if (u_turn) {
            reverse_in_place(t);
        }

        if (seg.dir == SegmentDir::Blocked) {
            // Dead-end street: the leg runs to the mid-segment cap.
            const int far = CityMap::other_end(seg, node);
            const double cx = 0.5 * (nx + map.node(far).x);
            const double cy = 0.5 * (ny + map.node(far).y);
            entered_cap_from_ = node;
            leg_.set(nx, ny, cx, cy, -1, seg.id, true);
        } else {
            const int far = CityMap::other_end(seg, node);
            leg_.set(nx, ny, map.node(far).x, map.node(far).y, far, seg.id, false);
        }
        // The new leg ends a full block away, so the trigger re-arms safely.
        decided_ = false;
        steer_pid_.reset();
        return true;
    }

    /// Abstracted U-turn maneuver: heading flips in place and the filter
    /// sees the matching odometry increment.
    void reverse_in_place(double t) {
        truth_.theta = wrap_angle(truth_.theta + kPi);
        apply_odometry(0.0, kPi);
        trace_estimate(t, "predict");
    }

    TrialResult finish(TrialOutcome outcome) {
        result_.outcome = outcome;
        result_.manhattan_distance_m = manhattan_m_;
        result_.final_axis_m = position_ellipse_major_axis(est_);
        return result_;
    }

    void trace_estimate(double t, const char* event) {
        if (sinks_.estimate == nullptr) return;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.1f,%.3f,%.3f,%.6f,%.3f,%s\n", t, est_.x(), est_.y(),
                      est_.theta(), position_ellipse_major_axis(est_), event);
        *sinks_.estimate << buf;
    }

    TrialConfig cfg_;
    TraceSinks sinks_;
    Scenario scenario_;
    TrialResult result_;

    VehicleState truth_;
    PoseEstimate est_;
    double goal_x_ = 0.0;
    double goal_y_ = 0.0;
    double leg_euclid_m_ = 0.0;
    double manhattan_m_ = 0.0;

    RngEngine odo_rng_, compass_rng_, det_rng_, chain_rng_;
    std::optional<OdometrySimulator> odo_;
    std::optional<LandmarkDetector> detector_;
    LandmarkGrid grid_;

    VisitMemory memory_;
    TargetTracker tracker_;
    SteerPid steer_pid_{SteerGains{}, kMaxSteerRad};
    SpeedPid speed_pid_{SpeedGains{}, kMaxAccelMps2};

    detail::Leg leg_;
    bool decided_ = false;
    int entered_cap_from_ = -1;
};

inline TrialResult run_trial(const TrialConfig& cfg, TraceSinks sinks = {}) {
    TrialRunner runner(cfg, sinks);
    return runner.run();
}

} // namespace urbannav
