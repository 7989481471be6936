// Runs one seeded trial with landmarks and a mid-grade compass, printing
// the outcome record.

#include <cstdio>

#include "urbannav/trial.hpp"

int main() {
    using namespace urbannav;

    TrialConfig cfg;
    cfg.city.side_m = 2000.0;
    cfg.city.block_m = 150.0;
    cfg.city.landmark_density_per_km2 = 3.0;
    cfg.compass_sigma_rad = deg_to_rad(20.0) / 2.0;
    cfg.detection.detection_rate = 0.8;
    cfg.nav.strategy = NavStrategy::Hybrid;
    cfg.goal_min_euclid_m = 800.0;
    cfg.goal_max_euclid_m = 1600.0;
    cfg.seed = 2024;

    const TrialResult r = run_trial(cfg);
    std::printf("outcome:            %s\n", to_string(r.outcome));
    std::printf("euclid start-goal:  %.1f m\n", r.euclidean_start_goal_m);
    std::printf("manhattan traveled: %.1f m\n", r.manhattan_distance_m);
    std::printf("final 2-sigma axis: %.1f m\n", r.final_axis_m);
    std::printf("landmark fixes:     %d\n", r.n_landmark_fixes);
    std::printf("intersections:      %d\n", r.n_intersections);
    return 0;
}
