// urbannav: seeded urban-navigation simulation runner.
//
// Subcommands: trial (one closed-loop run), sweep (Monte Carlo grid),
// report (statistics from a results file), citymap (dump a generated map).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "urbannav/config.hpp"
#include "urbannav/csv.hpp"
#include "urbannav/harness.hpp"
#include "urbannav/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

namespace fs = std::filesystem;
using namespace urbannav;

int cmd_trial(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
              bool trace, const std::string& out_dir) {
    const RunConfig run = load_config(config_path);
    TrialConfig cfg = first_cell_config(run);
    if (has_seed) {
        cfg.seed = seed_override;
        cfg.scenario_seed = 0;
    }

    TraceSinks sinks;
    std::ofstream est_csv, dec_csv;
    fs::path dec_path;
    if (trace) {
        fs::create_directories(out_dir);
        const fs::path est_path = fs::path(out_dir) / "trial_estimate.csv";
        dec_path = fs::path(out_dir) / "trial_decisions.csv";
        est_csv.open(est_path);
        dec_csv.open(dec_path);
        if (!est_csv || !dec_csv) {
            std::cerr << "error: cannot open trace files under " << out_dir << "\n";
            return kExitIo;
        }
        est_csv << "t,x,y,theta,axis_m,event\n";
        dec_csv << "t,intersection_x_est,intersection_y_est,n_options,chosen_index,"
                   "cost_chosen,penalty_applied\n";
        sinks.estimate = &est_csv;
        sinks.decisions = &dec_csv;
    }

    TrialResult r = run_trial(cfg, sinks);
    if (trace) r.wall_events = dec_path.string();

    std::printf("outcome=%s manhattan_m=%.1f final_axis_m=%.2f\n", to_string(r.outcome),
                r.manhattan_distance_m, r.final_axis_m);
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, int trials, const std::string& out_dir, int workers) {
    const RunConfig run = load_config(config_path);

    const SweepResult sweep = run_sweep(run.base, run.axes, trials, run.base.seed, workers);

    fs::create_directories(out_dir);
    const double bin_width_m = 1000.0;
    const double target_rate = 0.8;
    write_file_atomic(fs::path(out_dir) / "results.csv",
                      [&](std::ostream& os) { write_results_csv(os, sweep); });
    write_file_atomic(fs::path(out_dir) / "summary.csv", [&](std::ostream& os) {
        write_summary_csv(os, sweep, bin_width_m, target_rate);
    });
    write_file_atomic(fs::path(out_dir) / "curves.csv",
                      [&](std::ostream& os) { write_curves_csv(os, sweep, bin_width_m); });

    nlohmann::json manifest;
    manifest["config_version"] = run.version;
    manifest["tool_version"] = kToolVersion;
    manifest["config_path"] = config_path;
    manifest["output_dir"] = out_dir;
    manifest["trials_per_cell"] = trials;
    manifest["workers"] = workers;
    manifest["base_seed"] = run.base.seed;
    manifest["cells"] = sweep.cells.size();
    manifest["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    write_file_atomic(fs::path(out_dir) / "manifest.json",
                      [&](std::ostream& os) { os << manifest.dump(2) << "\n"; });

    std::printf("sweep: %zu cells x %d trials -> %s\n", sweep.cells.size(), trials,
                out_dir.c_str());
    return kExitOk;
}

int cmd_report(const std::string& results_path, double target_rate) {
    std::ifstream in(results_path);
    if (!in) {
        std::cerr << "error: cannot open " << results_path << "\n";
        return kExitConfig;
    }
    const std::vector<ResultRow> rows = read_results_csv(in, results_path);
    if (rows.empty()) {
        std::cerr << "error: " << results_path << ": no result rows\n";
        return kExitConfig;
    }

    std::map<int, std::vector<const ResultRow*>> by_cell;
    for (const ResultRow& row : rows) by_cell[row.cell_id].push_back(&row);

    std::printf("%-8s %-10s %8s %8s %12s %8s %10s %14s %16s\n", "cell_id", "strategy", "density",
                "det_rate", "compass2s_deg", "trials", "success", "range_m@rate", "mean_lost_m");
    for (const auto& [cell_id, cell_rows] : by_cell) {
        std::vector<TrialResult> trials;
        trials.reserve(cell_rows.size());
        int reached = 0;
        for (const ResultRow* r : cell_rows) {
            trials.push_back(r->trial);
            if (r->trial.outcome == TrialOutcome::Reached) ++reached;
        }
        const auto curve = success_rate_by_distance(trials, 1000.0);
        const double range = range_at_success(curve, target_rate);
        const auto lost = average_lost_distance(trials);
        const ResultRow* first = cell_rows.front();
        std::printf("%-8d %-10s %8g %8g %12g %8zu %10.3f %14.1f %16.1f\n", cell_id,
                    first->strategy.c_str(), first->density, first->det_rate,
                    first->compass_2sigma_deg, cell_rows.size(),
                    static_cast<double>(reached) / static_cast<double>(cell_rows.size()), range,
                    lost.value_or(std::nan("")));
    }
    return kExitOk;
}

int cmd_citymap(const std::string& config_path, const std::string& out_path) {
    const RunConfig run = load_config(config_path);
    TrialConfig cfg = first_cell_config(run);
    CityGenParams city = cfg.city;
    city.seed = cfg.seed;
    const CityMap map = generate_city(city);
    if (out_path.empty() || out_path == "-") {
        write_city(std::cout, map);
    } else {
        write_file_atomic(out_path, [&](std::ostream& os) { write_city(os, map); });
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seed-reproducible urban navigation simulation suite"};
    app.set_version_flag("--version", urbannav::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string results_path;
    std::uint64_t seed = 0;
    bool trace = false;
    int trials = 100;
    int workers = 1;
    double target_rate = 0.8;
    std::string map_out;

    CLI::App* trial = app.add_subcommand("trial", "Run a single trial");
    trial->add_option("--config", config_path, "Config file")->required();
    CLI::Option* seed_opt = trial->add_option("--seed", seed, "Override the trial seed");
    trial->add_flag("--trace", trace, "Write estimator and decision CSV logs");
    trial->add_option("--out", out_dir, "Directory for trace logs");

    CLI::App* sweep = app.add_subcommand("sweep", "Run the Monte Carlo sweep grid");
    sweep->add_option("--config", config_path, "Config file")->required();
    sweep->add_option("--trials", trials, "Trials per cell");
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--workers", workers, "Worker threads");

    CLI::App* report = app.add_subcommand("report", "Summarize a results.csv");
    report->add_option("--results", results_path, "results.csv path")->required();
    report->add_option("--target-rate", target_rate, "Success-rate target");

    CLI::App* citymap = app.add_subcommand("citymap", "Generate and dump a city map");
    citymap->add_option("--config", config_path, "Config file")->required();
    citymap->add_option("--out", map_out, "Output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (trial->parsed()) {
            return cmd_trial(config_path, seed, seed_opt->count() > 0, trace, out_dir);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config_path, trials, out_dir, workers);
        }
        if (report->parsed()) {
            return cmd_report(results_path, target_rate);
        }
        if (citymap->parsed()) {
            return cmd_citymap(config_path, map_out);
        }
    } catch (const urbannav::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        // Schema mismatches from readers are config errors; the rest is I/O.
        const std::string what = e.what();
        if (what.find("schema") != std::string::npos || what.find("expected") != std::string::npos) {
            std::cerr << "config error: " << what << "\n";
            return kExitConfig;
        }
        std::cerr << "error: " << what << "\n";
        return kExitIo;
    }
    return kExitOk;
}
