#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbannav/harness.hpp"
#include "urbannav/version.hpp"

namespace urbannav {

inline std::string cell_label(const SweepCell& cell) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s d=%g r=%g c=%g", to_string(cell.strategy),
                  cell.density_per_km2, cell.detection_rate, cell.compass_two_sigma_deg);
    return buf;
}

/// One row per trial, rows in (cell_id, trial index) order.
inline void write_results_csv(std::ostream& os, const SweepResult& sweep) {
    os << kResultsSchema << "\n";
    os << "cell_id,strategy,density,det_rate,compass_2sigma_deg,seed,outcome,manhattan_m,"
          "euclid_m,final_axis_m,n_fixes,n_intersections\n";
    char buf[320];
    for (const SweepCell& cell : sweep.cells) {
        for (std::size_t k = 0; k < cell.trials.size(); ++k) {
            const TrialResult& r = cell.trials[k];
            const double euclid = r.cumulative_euclid_m > r.euclidean_start_goal_m
                                      ? r.cumulative_euclid_m
                                      : r.euclidean_start_goal_m;
            std::snprintf(buf, sizeof(buf), "%d,%s,%g,%g,%g,%llu,%s,%.3f,%.3f,%.3f,%d,%d\n",
                          cell.cell_id, to_string(cell.strategy), cell.density_per_km2,
                          cell.detection_rate, cell.compass_two_sigma_deg,
                          static_cast<unsigned long long>(cell.trial_seeds[k]), to_string(r.outcome),
                          r.manhattan_distance_m, euclid, r.final_axis_m, r.n_landmark_fixes,
                          r.n_intersections);
            os << buf;
        }
    }
}

/// One row per cell with the headline statistics.
inline void write_summary_csv(std::ostream& os, const SweepResult& sweep, double bin_width_m,
                              double target_rate) {
    os << kSummarySchema << "\n";
    os << "cell_id,strategy,density,det_rate,compass_2sigma_deg,n_trials,success_rate,"
          "range_at_80_m,mean_lost_manhattan_m\n";
    char buf[256];
    for (const SweepCell& cell : sweep.cells) {
        int reached = 0;
        for (const TrialResult& r : cell.trials) {
            if (r.outcome == TrialOutcome::Reached) ++reached;
        }
        const double rate = cell.trials.empty() ? 0.0
                                                : static_cast<double>(reached) /
                                                      static_cast<double>(cell.trials.size());
        const auto curve = success_rate_by_distance(cell.trials, bin_width_m);
        const double range = range_at_success(curve, target_rate);
        const auto lost = average_lost_distance(cell.trials);
        std::snprintf(buf, sizeof(buf), "%d,%s,%g,%g,%g,%zu,%.4f,%.1f,%.1f\n", cell.cell_id,
                      to_string(cell.strategy), cell.density_per_km2, cell.detection_rate,
                      cell.compass_two_sigma_deg, cell.trials.size(), rate, range,
                      lost.value_or(std::nan("")));
        os << buf;
    }
}

/// Per-cell success curves for external plotting: series, x_m, y.
inline void write_curves_csv(std::ostream& os, const SweepResult& sweep, double bin_width_m) {
    os << kCurvesSchema << "\n";
    os << "series,x_m,y\n";
    char buf[192];
    for (const SweepCell& cell : sweep.cells) {
        const auto curve = success_rate_by_distance(cell.trials, bin_width_m);
        for (const CurveBin& bin : curve) {
            std::snprintf(buf, sizeof(buf), "\"%s\",%.1f,%.4f\n", cell_label(cell).c_str(),
                          bin.center_m, bin.rate);
            os << buf;
        }
    }
}

/// Commits a file atomically: write to a sibling temp path, then rename.
template <typename WriteFn>
inline void write_file_atomic(const std::filesystem::path& path, WriteFn&& fn) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        fn(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct ResultRow {
    int cell_id = 0;
    std::string strategy;
    double density = 0.0;
    double det_rate = 0.0;
    double compass_2sigma_deg = 0.0;
    std::uint64_t seed = 0;
    TrialResult trial;
};

/// Reads results.csv back, refusing a mismatched schema tag.
inline std::vector<ResultRow> read_results_csv(std::istream& is, const std::string& path_label) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsSchema) {
        throw std::runtime_error(path_label + ": schema mismatch (expected '" +
                                 std::string(kResultsSchema) + "')");
    }
    if (!std::getline(is, line)) {
        throw std::runtime_error(path_label + ": missing header row");
    }

    std::vector<ResultRow> rows;
    int line_no = 2;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 12) {
            throw std::runtime_error(path_label + ":" + std::to_string(line_no) +
                                     ": expected 12 fields, got " + std::to_string(fields.size()));
        }
        try {
            ResultRow row;
            row.cell_id = std::stoi(fields[0]);
            row.strategy = fields[1];
            row.density = std::stod(fields[2]);
            row.det_rate = std::stod(fields[3]);
            row.compass_2sigma_deg = std::stod(fields[4]);
            row.seed = std::stoull(fields[5]);
            const std::string& outcome = fields[6];
            if (outcome == "reached") row.trial.outcome = TrialOutcome::Reached;
            else if (outcome == "lost") row.trial.outcome = TrialOutcome::Lost;
            else if (outcome == "timeout") row.trial.outcome = TrialOutcome::Timeout;
            else if (outcome == "stuck") row.trial.outcome = TrialOutcome::Stuck;
            else throw std::invalid_argument("unknown outcome '" + outcome + "'");
            row.trial.manhattan_distance_m = std::stod(fields[7]);
            row.trial.euclidean_start_goal_m = std::stod(fields[8]);
            row.trial.final_axis_m = std::stod(fields[9]);
            row.trial.n_landmark_fixes = std::stoi(fields[10]);
            row.trial.n_intersections = std::stoi(fields[11]);
            rows.push_back(std::move(row));
        } catch (const std::logic_error& e) {
            throw std::runtime_error(path_label + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

} // namespace urbannav
