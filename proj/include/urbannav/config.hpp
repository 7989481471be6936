#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbannav/harness.hpp"
#include "urbannav/version.hpp"

namespace urbannav {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parsed run configuration: the base trial settings plus the sweep grid.
/// Single-trial runs take the first value of every sweep axis.
struct RunConfig {
    int version = 0;
    TrialConfig base;
    SweepAxes axes{{NavStrategy::StraightToGoal}, {0.0}, {1.0}, {30.0}};
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r\n");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r\n");
    return s.substr(from, to - from + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

struct KeyContext {
    const std::string* path;
    int line;
    const std::string* key;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(*path + ":" + std::to_string(line) + ": key '" + *key + "': " + what);
    }

    double number(const std::string& value) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) fail("trailing characters after number '" + value + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("expected a number, got '" + value + "'");
        }
    }

    std::uint64_t integer(const std::string& value) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            fail("expected an unsigned integer, got '" + value + "'");
        }
        return v;
    }

    bool boolean(const std::string& value) const {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        fail("expected true/false, got '" + value + "'");
    }

    NavStrategy strategy(const std::string& value) const {
        if (value == "straight") return NavStrategy::StraightToGoal;
        if (value == "l2l") return NavStrategy::LandmarkToLandmark;
        if (value == "hybrid") return NavStrategy::Hybrid;
        fail("unknown strategy '" + value + "' (expected straight|l2l|hybrid)");
    }

    /// Compass axis entry: degrees of 2-sigma uncertainty, or "none".
    double compass(const std::string& value) const {
        if (value == "none") return -1.0;
        return number(value);
    }
};

} // namespace detail

/// Loads a `key = value` config with an explicit schema version. Unknown
/// keys and malformed values fail with a file:line diagnostic.
inline RunConfig parse_config(std::istream& is, const std::string& path_label) {
    RunConfig run;
    bool saw_version = false;
    std::string line;
    int line_no = 0;

    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path_label + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const detail::KeyContext ctx{&path_label, line_no, &key};
        if (value.empty()) ctx.fail("empty value");

        TrialConfig& b = run.base;
        if (key == "version") {
            run.version = static_cast<int>(ctx.integer(value));
            saw_version = true;
            if (run.version != kConfigVersion) {
                ctx.fail("unsupported config version " + value + " (tool supports " +
                         std::to_string(kConfigVersion) + ")");
            }
        } else if (key == "city.side_m") b.city.side_m = ctx.number(value);
        else if (key == "city.block_m") b.city.block_m = ctx.number(value);
        else if (key == "city.dead_end_fraction") b.city.dead_end_fraction = ctx.number(value);
        else if (key == "city.one_way_fraction") b.city.one_way_fraction = ctx.number(value);
        else if (key == "dyn.wheelbase_m") b.dynamics.wheelbase_m = ctx.number(value);
        else if (key == "dyn.dt_s") b.dynamics.dt_s = ctx.number(value);
        else if (key == "odo.ticks_per_rev") b.odometry.ticks_per_rev = ctx.number(value);
        else if (key == "odo.wheel_radius_m") b.odometry.wheel_radius_m = ctx.number(value);
        else if (key == "odo.track_width_m") b.odometry.track_width_m = ctx.number(value);
        else if (key == "odo.slip_sigma") b.odometry.slip_sigma = ctx.number(value);
        else if (key == "compass.period_s") b.compass_period_s = ctx.number(value);
        else if (key == "det.radius_m") b.detection.detection_radius_m = ctx.number(value);
        else if (key == "fix.sigma_m") b.fix_sigma_m = ctx.number(value);
        else if (key == "nav.hybrid_threshold_m") b.nav.hybrid_threshold_m = ctx.number(value);
        else if (key == "nav.penalty_increment_deg") b.nav.penalty_increment_rad = deg_to_rad(ctx.number(value));
        else if (key == "nav.visit_match_radius_m") b.nav.visit_match_radius_m = ctx.number(value);
        else if (key == "nav.goal_radius_m") b.nav.goal_radius_m = ctx.number(value);
        else if (key == "nav.intersection_radius_m") b.nav.intersection_radius_m = ctx.number(value);
        else if (key == "q.sigma_d") b.process_noise.sigma_d = ctx.number(value);
        else if (key == "q.sigma_dtheta") b.process_noise.sigma_dtheta = ctx.number(value);
        else if (key == "est.init_sigma_xy_m") b.init_sigma_xy_m = ctx.number(value);
        else if (key == "est.init_sigma_theta_rad") b.init_sigma_theta_rad = ctx.number(value);
        else if (key == "trial.lost_threshold_m") b.lost_threshold_m = ctx.number(value);
        else if (key == "trial.max_sim_time_s") b.max_sim_time_s = ctx.number(value);
        else if (key == "trial.v_ref_mps") b.v_ref_mps = ctx.number(value);
        else if (key == "trial.goal_min_euclid_m") b.goal_min_euclid_m = ctx.number(value);
        else if (key == "trial.goal_max_euclid_m") b.goal_max_euclid_m = ctx.number(value);
        else if (key == "trial.chain_goals") b.chain_goals = ctx.boolean(value);
        else if (key == "trial.chain_target_euclid_m") b.chain_target_euclid_m = ctx.number(value);
        else if (key == "trial.manhattan_cap_m") b.manhattan_cap_m = ctx.number(value);
        else if (key == "trial.seed") b.seed = ctx.integer(value);
        else if (key == "trial.scenario_seed") b.scenario_seed = ctx.integer(value);
        else if (key == "sweep.strategies") {
            run.axes.strategies.clear();
            for (const std::string& v : detail::split_list(value)) {
                run.axes.strategies.push_back(ctx.strategy(v));
            }
        } else if (key == "sweep.densities_per_km2") {
            run.axes.densities_per_km2.clear();
            for (const std::string& v : detail::split_list(value)) {
                run.axes.densities_per_km2.push_back(ctx.number(v));
            }
        } else if (key == "sweep.detection_rates") {
            run.axes.detection_rates.clear();
            for (const std::string& v : detail::split_list(value)) {
                run.axes.detection_rates.push_back(ctx.number(v));
            }
        } else if (key == "sweep.compass_two_sigma_deg") {
            run.axes.compass_two_sigma_deg.clear();
            for (const std::string& v : detail::split_list(value)) {
                run.axes.compass_two_sigma_deg.push_back(ctx.compass(v));
            }
        } else {
            ctx.fail("unknown key");
        }
    }

    if (!saw_version) {
        throw ConfigError(path_label + ": missing required 'version' key");
    }
    if (!run.axes.valid()) {
        throw ConfigError(path_label + ": sweep axes must all be non-empty");
    }
    return run;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    return parse_config(in, path);
}

/// Base config with the first value of every sweep axis applied; this is
/// what single-trial runs execute.
inline TrialConfig first_cell_config(const RunConfig& run) {
    TrialConfig cfg = run.base;
    cfg.nav.strategy = run.axes.strategies.front();
    cfg.city.landmark_density_per_km2 = run.axes.densities_per_km2.front();
    cfg.detection.detection_rate = run.axes.detection_rates.front();
    const double compass = run.axes.compass_two_sigma_deg.front();
    cfg.compass_sigma_rad = compass < 0.0 ? 0.0 : deg_to_rad(compass) * 0.5;
    return cfg;
}

} // namespace urbannav
