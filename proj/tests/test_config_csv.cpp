#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "urbannav/config.hpp"
#include "urbannav/csv.hpp"

using namespace urbannav;
using Catch::Approx;

namespace {

RunConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

SweepResult fabricate_sweep() {
    SweepResult sweep;
    sweep.trials_per_cell = 2;
    sweep.base_seed = 7;
    SweepCell cell;
    cell.cell_id = 0;
    cell.strategy = NavStrategy::Hybrid;
    cell.density_per_km2 = 1.0;
    cell.detection_rate = 0.6;
    cell.compass_two_sigma_deg = 30.0;
    TrialResult a;
    a.outcome = TrialOutcome::Reached;
    a.manhattan_distance_m = 5432.1;
    a.euclidean_start_goal_m = 4100.0;
    a.final_axis_m = 42.5;
    a.n_landmark_fixes = 3;
    a.n_intersections = 27;
    TrialResult b = a;
    b.outcome = TrialOutcome::Lost;
    b.manhattan_distance_m = 9100.0;
    cell.trials = {a, b};
    cell.trial_seeds = {111, 222};
    sweep.cells.push_back(cell);
    return sweep;
}

} // namespace

TEST_CASE("config: defaults plus overrides") {
    const RunConfig run = parse_text(R"(
version = 1
city.side_m = 2000
city.block_m = 250
compass.period_s = 0.5
nav.penalty_increment_deg = 90
trial.seed = 77
sweep.strategies = l2l, hybrid
sweep.densities_per_km2 = 0.5, 1
sweep.detection_rates = 0.4
sweep.compass_two_sigma_deg = 10, none
)");
    CHECK(run.version == 1);
    CHECK(run.base.city.side_m == 2000.0);
    CHECK(run.base.city.block_m == 250.0);
    CHECK(run.base.compass_period_s == 0.5);
    CHECK(run.base.nav.penalty_increment_rad == Approx(kPi / 2.0));
    CHECK(run.base.seed == 77);
    REQUIRE(run.axes.strategies.size() == 2);
    CHECK(run.axes.strategies[0] == NavStrategy::LandmarkToLandmark);
    CHECK(run.axes.densities_per_km2 == std::vector<double>{0.5, 1.0});
    REQUIRE(run.axes.compass_two_sigma_deg.size() == 2);
    CHECK(run.axes.compass_two_sigma_deg[1] == -1.0);

    const TrialConfig cfg = first_cell_config(run);
    CHECK(cfg.nav.strategy == NavStrategy::LandmarkToLandmark);
    CHECK(cfg.city.landmark_density_per_km2 == 0.5);
    CHECK(cfg.detection.detection_rate == 0.4);
    CHECK(cfg.compass_sigma_rad == Approx(deg_to_rad(10.0) / 2.0));
}

TEST_CASE("config: 'none' compass disables the sensor") {
    const RunConfig run = parse_text("version = 1\nsweep.compass_two_sigma_deg = none\n");
    const TrialConfig cfg = first_cell_config(run);
    CHECK(cfg.compass_sigma_rad == 0.0);
}

TEST_CASE("config: diagnostics carry file and line") {
    try {
        parse_text("version = 1\ncity.side_m = abc\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("test.cfg:2") != std::string::npos);
        CHECK(what.find("city.side_m") != std::string::npos);
    }

    try {
        parse_text("version = 1\nnot.a.key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_text("city.side_m = 100\n"), ConfigError);   // missing version
    CHECK_THROWS_AS(parse_text("version = 99\n"), ConfigError);        // unsupported version
    CHECK_THROWS_AS(parse_text("version = 1\nfoo\n"), ConfigError);    // not key = value
    CHECK_THROWS_AS(parse_text("version = 1\ntrial.seed = -3\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("results CSV: write then read back") {
    const SweepResult sweep = fabricate_sweep();
    std::ostringstream os;
    write_results_csv(os, sweep);
    const std::string text = os.str();
    CHECK(text.rfind(kResultsSchema, 0) == 0);

    std::istringstream in(text);
    const auto rows = read_results_csv(in, "results.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].cell_id == 0);
    CHECK(rows[0].strategy == "hybrid");
    CHECK(rows[0].seed == 111);
    CHECK(rows[0].trial.outcome == TrialOutcome::Reached);
    CHECK(rows[0].trial.manhattan_distance_m == Approx(5432.1));
    CHECK(rows[1].trial.outcome == TrialOutcome::Lost);
    CHECK(rows[1].trial.euclidean_start_goal_m == Approx(4100.0));
}

TEST_CASE("results CSV: schema mismatch is refused") {
    std::istringstream wrong("# some-other-file v9\nheader\n");
    CHECK_THROWS_WITH(read_results_csv(wrong, "x.csv"),
                      Catch::Matchers::ContainsSubstring("schema"));

    std::istringstream short_row(std::string(kResultsSchema) + "\nheader\n1,2,3\n");
    CHECK_THROWS_AS(read_results_csv(short_row, "x.csv"), std::runtime_error);
}

TEST_CASE("summary and curves CSVs are schema-stamped") {
    const SweepResult sweep = fabricate_sweep();
    std::ostringstream summary;
    write_summary_csv(summary, sweep, 1000.0, 0.8);
    CHECK(summary.str().rfind(kSummarySchema, 0) == 0);
    CHECK(summary.str().find("hybrid") != std::string::npos);

    std::ostringstream curves;
    write_curves_csv(curves, sweep, 1000.0);
    CHECK(curves.str().rfind(kCurvesSchema, 0) == 0);
    CHECK(curves.str().find("4500.0") != std::string::npos); // bin center of 4.1 km
}
