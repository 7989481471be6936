#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "urbannav/trial.hpp"

namespace urbannav {

inline const char* to_string(NavStrategy s) {
    switch (s) {
        case NavStrategy::StraightToGoal: return "straight";
        case NavStrategy::LandmarkToLandmark: return "l2l";
        case NavStrategy::Hybrid: return "hybrid";
    }
    return "?";
}

/// Sweep grid: strategy x landmark density x detection rate x compass.
/// A negative compass value means "no compass".
struct SweepAxes {
    std::vector<NavStrategy> strategies;
    std::vector<double> densities_per_km2;
    std::vector<double> detection_rates;
    std::vector<double> compass_two_sigma_deg;

    std::size_t cell_count() const {
        return strategies.size() * densities_per_km2.size() * detection_rates.size() *
               compass_two_sigma_deg.size();
    }
    bool valid() const { return cell_count() > 0; }
};

struct SweepCell {
    int cell_id = 0;
    NavStrategy strategy = NavStrategy::StraightToGoal;
    double density_per_km2 = 0.0;
    double detection_rate = 1.0;
    double compass_two_sigma_deg = -1.0;
    std::vector<TrialResult> trials;
    std::vector<std::uint64_t> trial_seeds;
};

struct SweepResult {
    SweepAxes axes;
    int trials_per_cell = 0;
    std::uint64_t base_seed = 0;
    std::vector<SweepCell> cells;
};

/// Applies one sweep cell onto a base trial config.
inline TrialConfig cell_config(TrialConfig base, const SweepCell& cell, int trial_index,
                               std::uint64_t base_seed) {
    base.nav.strategy = cell.strategy;
    base.city.landmark_density_per_km2 = cell.density_per_km2;
    base.detection.detection_rate = cell.detection_rate;
    base.compass_sigma_rad = cell.compass_two_sigma_deg < 0.0
                                 ? 0.0
                                 : deg_to_rad(cell.compass_two_sigma_deg) * 0.5;
    // Noise streams differ per cell; the scenario stream depends only on
    // the trial index, so cells see matched maps and start/goal pairs.
    base.seed = mix_seed({base_seed, static_cast<std::uint64_t>(cell.cell_id) + 1,
                          static_cast<std::uint64_t>(trial_index) + 1});
    base.scenario_seed = mix_seed({base_seed, 0x5CE9A610u, static_cast<std::uint64_t>(trial_index) + 1});
    return base;
}

/// Runs the full grid, trials_per_cell trials in each cell. Work items are
/// independent and land in preallocated slots, so any worker count gives
/// identical results.
inline SweepResult run_sweep(const TrialConfig& base, const SweepAxes& axes, int trials_per_cell,
                             std::uint64_t base_seed, int workers = 1) {
    if (!axes.valid()) throw std::invalid_argument("run_sweep: empty axes");
    if (trials_per_cell < 1) throw std::invalid_argument("run_sweep: trials_per_cell < 1");

    SweepResult result;
    result.axes = axes;
    result.trials_per_cell = trials_per_cell;
    result.base_seed = base_seed;

    for (NavStrategy s : axes.strategies) {
        for (double den : axes.densities_per_km2) {
            for (double rate : axes.detection_rates) {
                for (double compass : axes.compass_two_sigma_deg) {
                    SweepCell cell;
                    cell.cell_id = static_cast<int>(result.cells.size());
                    cell.strategy = s;
                    cell.density_per_km2 = den;
                    cell.detection_rate = rate;
                    cell.compass_two_sigma_deg = compass;
                    cell.trials.resize(static_cast<std::size_t>(trials_per_cell));
                    cell.trial_seeds.resize(static_cast<std::size_t>(trials_per_cell));
                    result.cells.push_back(std::move(cell));
                }
            }
        }
    }

    const std::size_t n_tasks = result.cells.size() * static_cast<std::size_t>(trials_per_cell);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const std::size_t c = task / static_cast<std::size_t>(trials_per_cell);
            const int k = static_cast<int>(task % static_cast<std::size_t>(trials_per_cell));
            SweepCell& cell = result.cells[c];
            const TrialConfig cfg = cell_config(base, cell, k, base_seed);
            cell.trial_seeds[static_cast<std::size_t>(k)] = cfg.seed;
            cell.trials[static_cast<std::size_t>(k)] = run_trial(cfg);
        }
    };

    const int n_workers = std::max(1, workers);
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    return result;
}

struct CurveBin {
    double center_m = 0.0;
    double rate = 0.0;
    int count = 0;
};

/// Success rate binned over the start-goal Euclidean distance. Success is
/// outcome == reached; empty bins are omitted.
inline std::vector<CurveBin> success_rate_by_distance(const std::vector<TrialResult>& results,
                                                      double bin_width_m) {
    if (bin_width_m <= 0.0) throw std::invalid_argument("success_rate_by_distance: bad bin width");
    std::vector<int> total;
    std::vector<int> reached;
    for (const TrialResult& r : results) {
        const auto bin = static_cast<std::size_t>(r.euclidean_start_goal_m / bin_width_m);
        if (bin >= total.size()) {
            total.resize(bin + 1, 0);
            reached.resize(bin + 1, 0);
        }
        total[bin] += 1;
        if (r.outcome == TrialOutcome::Reached) reached[bin] += 1;
    }
    std::vector<CurveBin> curve;
    for (std::size_t i = 0; i < total.size(); ++i) {
        if (total[i] == 0) continue;
        curve.push_back({(static_cast<double>(i) + 0.5) * bin_width_m,
                         static_cast<double>(reached[i]) / total[i], total[i]});
    }
    return curve;
}

/// Largest bin center d such that every non-empty bin at distance <= d
/// meets the target rate (prefix rule); 0 when the first bin misses.
inline double range_at_success(const std::vector<CurveBin>& curve, double target_rate) {
    if (target_rate <= 0.0 || target_rate > 1.0) {
        throw std::invalid_argument("range_at_success: target rate outside (0, 1]");
    }
    double range = 0.0;
    for (const CurveBin& bin : curve) {
        if (bin.rate >= target_rate) {
            range = bin.center_m;
        } else {
            break;
        }
    }
    return range;
}

/// Mean Manhattan distance at the moment the lost criterion fired.
inline std::optional<double> average_lost_distance(const std::vector<TrialResult>& results) {
    double sum = 0.0;
    int n = 0;
    for (const TrialResult& r : results) {
        if (r.outcome == TrialOutcome::Lost) {
            sum += r.manhattan_distance_m;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

/// Mean extra distance of `a` over `b` on scenario-matched trials where
/// both reached the goal. Result sets pair by index.
inline std::optional<double> distance_overhead(const std::vector<TrialResult>& results_a,
                                               const std::vector<TrialResult>& results_b) {
    if (results_a.size() != results_b.size()) {
        throw std::invalid_argument("distance_overhead: result sets are not matched");
    }
    double sum_a = 0.0;
    double sum_b = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < results_a.size(); ++i) {
        if (results_a[i].outcome == TrialOutcome::Reached &&
            results_b[i].outcome == TrialOutcome::Reached) {
            sum_a += results_a[i].manhattan_distance_m;
            sum_b += results_b[i].manhattan_distance_m;
            ++n;
        }
    }
    if (n == 0 || sum_b <= 0.0) return std::nullopt;
    return (sum_a - sum_b) / sum_b;
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// variable is constant.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("spearman: need two equal-length samples");
    }
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(xs);
    const std::vector<double> ry = ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cov += (rx[i] - mean) * (ry[i] - mean);
        var_x += (rx[i] - mean) * (rx[i] - mean);
        var_y += (ry[i] - mean) * (ry[i] - mean);
    }
    if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
    return cov / std::sqrt(var_x * var_y);
}

} // namespace urbannav
