#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "urbannav/city.hpp"
#include "urbannav/rng.hpp"

namespace urbannav {

struct CityGenParams {
    double side_m = 10000.0;
    double block_m = 150.0;
    double dead_end_fraction = 0.05;
    double one_way_fraction = 0.05;
    double landmark_density_per_km2 = 0.0;
    std::uint64_t seed = 1;

    bool valid() const {
        return side_m > 0.0 && block_m > 0.0 && side_m / block_m >= 2.0 &&
               dead_end_fraction >= 0.0 && dead_end_fraction <= 1.0 &&
               one_way_fraction >= 0.0 && one_way_fraction <= 1.0 &&
               landmark_density_per_km2 >= 0.0;
    }
};

struct Scenario {
    CityMap map;
    double start_x = 0.0;
    double start_y = 0.0;
    double start_theta = 0.0;
    int start_segment_id = 0;
    double goal_x = 0.0;
    double goal_y = 0.0;
    int goal_segment_id = 0;
    double euclidean_start_goal_m = 0.0;
};

inline CityMap place_landmarks(CityMap map, double density_per_km2, std::uint64_t seed);

/// Node reachability over the directed road graph (dead ends carry nothing).
inline std::vector<char> reachable_nodes(const CityMap& map, int from_node) {
    std::vector<char> seen(map.intersections.size(), 0);
    std::deque<int> queue;
    seen[static_cast<std::size_t>(from_node)] = 1;
    queue.push_back(from_node);
    while (!queue.empty()) {
        const int n = queue.front();
        queue.pop_front();
        for (int sid : map.incident(n)) {
            const RoadSegment& seg = map.segments[static_cast<std::size_t>(sid)];
            if (!CityMap::passes_through(seg, n)) continue;
            const int m = CityMap::other_end(seg, n);
            if (!seen[static_cast<std::size_t>(m)]) {
                seen[static_cast<std::size_t>(m)] = 1;
                queue.push_back(m);
            }
        }
    }
    return seen;
}

/// Builds the gridded road network: a (round(side/block), min 2) square
/// lattice of two-way streets, then converts a fraction of the interior
/// segments to dead ends and a fraction of the remainder to one-ways.
/// Deterministic in the params, seed included.
inline CityMap generate_city(const CityGenParams& params) {
    if (!params.valid()) {
        throw std::invalid_argument("generate_city: invalid params");
    }
    CityMap map;
    map.side_m = params.side_m;
    map.block_m = params.block_m;
    map.blocks = std::max(2, static_cast<int>(std::llround(params.side_m / params.block_m)));

    const int n = map.nodes_per_edge();
    map.intersections.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            map.intersections.push_back({map.node_id(r, c), c * map.block_m, r * map.block_m});
        }
    }

    // Horizontal segments first (row by row), then vertical. A segment is
    // interior when the lattice line it lies on is not the outer ring.
    std::vector<int> interior;
    int next_id = 0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n - 1; ++c) {
            map.segments.push_back({next_id, map.node_id(r, c), map.node_id(r, c + 1), SegmentDir::TwoWay});
            if (r > 0 && r < n - 1) interior.push_back(next_id);
            ++next_id;
        }
    }
    for (int r = 0; r < n - 1; ++r) {
        for (int c = 0; c < n; ++c) {
            map.segments.push_back({next_id, map.node_id(r, c), map.node_id(r + 1, c), SegmentDir::TwoWay});
            if (c > 0 && c < n - 1) interior.push_back(next_id);
            ++next_id;
        }
    }

    RngEngine rng = make_engine({params.seed, stream::kCityLayout});

    const auto n_dead = static_cast<std::size_t>(
        std::llround(params.dead_end_fraction * static_cast<double>(interior.size())));
    std::shuffle(interior.begin(), interior.end(), rng);
    for (std::size_t i = 0; i < n_dead && i < interior.size(); ++i) {
        map.segments[static_cast<std::size_t>(interior[i])].dir = SegmentDir::Blocked;
    }

    std::vector<int> open_ids;
    for (const RoadSegment& s : map.segments) {
        if (s.dir == SegmentDir::TwoWay) open_ids.push_back(s.id);
    }
    const auto n_oneway = static_cast<std::size_t>(
        std::llround(params.one_way_fraction * static_cast<double>(open_ids.size())));
    std::shuffle(open_ids.begin(), open_ids.end(), rng);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < n_oneway && i < open_ids.size(); ++i) {
        map.segments[static_cast<std::size_t>(open_ids[i])].dir =
            coin(rng) ? SegmentDir::OneWayAB : SegmentDir::OneWayBA;
    }

    // Every intersection must keep at least one through exit; reopen the
    // lowest-id incident segment where the random annotations removed all.
    for (const Intersection& node : map.intersections) {
        bool has_exit = false;
        for (int sid : map.incident(node.id)) {
            if (CityMap::passes_through(map.segments[static_cast<std::size_t>(sid)], node.id)) {
                has_exit = true;
                break;
            }
        }
        if (!has_exit) {
            const std::vector<int>& inc = map.incident(node.id);
            const int sid = *std::min_element(inc.begin(), inc.end());
            map.segments[static_cast<std::size_t>(sid)].dir = SegmentDir::TwoWay;
        }
    }
    map.invalidate_index();

    if (params.landmark_density_per_km2 > 0.0) {
        map = place_landmarks(std::move(map), params.landmark_density_per_km2,
                              mix_seed({params.seed, stream::kLandmarks}));
    }
    return map;
}

/// Scatters round(density * area) landmarks uniformly and snaps each to the
/// nearest road line, so detections can occur on the driven path.
inline CityMap place_landmarks(CityMap map, double density_per_km2, std::uint64_t seed) {
    if (density_per_km2 < 0.0) {
        throw std::invalid_argument("place_landmarks: negative density");
    }
    map.landmarks.clear();
    const auto count = static_cast<int>(std::llround(density_per_km2 * map.area_km2()));
    RngEngine rng = make_engine(seed);
    std::uniform_real_distribution<double> uni(0.0, map.bounds_m());
    map.landmarks.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double x = uni(rng);
        double y = uni(rng);
        // Full grid: the nearest road is the nearest lattice line.
        const double col_line = std::lround(x / map.block_m) * map.block_m;
        const double row_line = std::lround(y / map.block_m) * map.block_m;
        if (std::abs(x - col_line) < std::abs(y - row_line)) {
            x = col_line;
        } else {
            y = row_line;
        }
        map.landmarks.push_back({i, x, y});
    }
    return map;
}

namespace detail {

struct SegmentPoint {
    int segment_id = 0;
    double x = 0.0;
    double y = 0.0;
    double t = 0.0; // fraction from endpoint a
};

inline SegmentPoint random_point_on_segment(const CityMap& map, const RoadSegment& seg,
                                            RngEngine& rng, double t_lo, double t_hi) {
    std::uniform_real_distribution<double> uni(t_lo, t_hi);
    const double t = uni(rng);
    const Intersection& a = map.node(seg.a);
    const Intersection& b = map.node(seg.b);
    return {seg.id, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), t};
}

inline bool goal_segment_reachable(const RoadSegment& seg, const std::vector<char>& reach) {
    if (seg.dir == SegmentDir::Blocked) return false;
    const bool via_a = CityMap::passes_through(seg, seg.a) && reach[static_cast<std::size_t>(seg.a)];
    const bool via_b = CityMap::passes_through(seg, seg.b) && reach[static_cast<std::size_t>(seg.b)];
    return via_a || via_b;
}

} // namespace detail

/// Samples a start pose and goal with Euclidean separation inside
/// [min_euclid_m, max_euclid_m] and a directed road path between them.
/// Fails after a bounded number of rejection rounds.
inline Scenario sample_start_goal(const CityMap& map, double min_euclid_m, double max_euclid_m,
                                  std::uint64_t seed, int max_attempts = 1000) {
    RngEngine rng = make_engine({seed, stream::kStartGoal});
    std::uniform_int_distribution<int> pick_seg(0, static_cast<int>(map.segments.size()) - 1);

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const RoadSegment& s_start = map.segments[static_cast<std::size_t>(pick_seg(rng))];
        const RoadSegment& s_goal = map.segments[static_cast<std::size_t>(pick_seg(rng))];
        if (s_start.dir == SegmentDir::Blocked || s_goal.dir == SegmentDir::Blocked) continue;

        const detail::SegmentPoint start = detail::random_point_on_segment(map, s_start, rng, 0.2, 0.8);
        const detail::SegmentPoint goal = detail::random_point_on_segment(map, s_goal, rng, 0.2, 0.8);

        const double euclid = std::hypot(goal.x - start.x, goal.y - start.y);
        if (euclid < min_euclid_m || euclid > max_euclid_m) continue;

        // Legal start headings along the segment; a two-way tie breaks
        // toward the goal bearing.
        const double head_ab = map.segment_heading_from(s_start, s_start.a);
        double theta;
        int exit_node;
        if (s_start.dir == SegmentDir::OneWayAB) {
            theta = head_ab;
            exit_node = s_start.b;
        } else if (s_start.dir == SegmentDir::OneWayBA) {
            theta = wrap_angle(head_ab + kPi);
            exit_node = s_start.a;
        } else {
            const double bearing = std::atan2(goal.y - start.y, goal.x - start.x);
            if (angular_distance(head_ab, bearing) <= angular_distance(head_ab + kPi, bearing)) {
                theta = head_ab;
                exit_node = s_start.b;
            } else {
                theta = wrap_angle(head_ab + kPi);
                exit_node = s_start.a;
            }
        }

        const std::vector<char> reach = reachable_nodes(map, exit_node);
        if (!detail::goal_segment_reachable(s_goal, reach)) continue;

        Scenario sc;
        sc.map = map;
        sc.start_x = start.x;
        sc.start_y = start.y;
        sc.start_theta = theta;
        sc.start_segment_id = s_start.id;
        sc.goal_x = goal.x;
        sc.goal_y = goal.y;
        sc.goal_segment_id = s_goal.id;
        sc.euclidean_start_goal_m = euclid;
        return sc;
    }
    throw std::runtime_error("sample_start_goal: no feasible scenario within retry budget");
}

struct GoalPoint {
    double x = 0.0;
    double y = 0.0;
    int segment_id = 0;
};

/// Next goal for chained-goal runs: reachable from `from_node`, with
/// Euclidean separation from (from_x, from_y) inside the band.
inline std::optional<GoalPoint> sample_goal_from_node(const CityMap& map, int from_node,
                                                      double from_x, double from_y,
                                                      double min_euclid_m, double max_euclid_m,
                                                      RngEngine& rng, int max_attempts = 200) {
    const std::vector<char> reach = reachable_nodes(map, from_node);
    std::uniform_int_distribution<int> pick_seg(0, static_cast<int>(map.segments.size()) - 1);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(pick_seg(rng))];
        if (seg.dir == SegmentDir::Blocked) continue;
        if (!detail::goal_segment_reachable(seg, reach)) continue;
        const detail::SegmentPoint pt = detail::random_point_on_segment(map, seg, rng, 0.2, 0.8);
        const double euclid = std::hypot(pt.x - from_x, pt.y - from_y);
        if (euclid < min_euclid_m || euclid > max_euclid_m) continue;
        return GoalPoint{pt.x, pt.y, seg.id};
    }
    return std::nullopt;
}

/// Turning options at an intersection for a vehicle arriving along
/// `approach_heading`. U-turns are offered only when nothing else is
/// traversable. Options are ordered by turn sharpness, left before right.
inline std::vector<IntersectionOption> intersection_options(const CityMap& map, int intersection_id,
                                                            double approach_heading) {
    if (intersection_id < 0 || static_cast<std::size_t>(intersection_id) >= map.intersections.size()) {
        throw std::invalid_argument("intersection_options: no such intersection");
    }

    const std::vector<int>& inc = map.incident(intersection_id);
    int arrival_sid = -1;
    double best_align = deg_to_rad(45.0) + 1e-9;
    for (int sid : inc) {
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(sid)];
        const int far = CityMap::other_end(seg, intersection_id);
        if (!CityMap::enterable_from(seg, far)) continue; // cannot have arrived on it
        const double inbound = map.segment_heading_from(seg, far);
        const double align = angular_distance(inbound, approach_heading);
        if (align < best_align) {
            best_align = align;
            arrival_sid = sid;
        }
    }
    if (arrival_sid < 0) {
        throw std::invalid_argument("intersection_options: approach heading matches no incoming segment");
    }

    struct Candidate {
        double theta_plus;
        double turn_abs;
        double turn_signed;
        int segment_id;
    };
    std::vector<Candidate> cands;
    for (int sid : inc) {
        if (sid == arrival_sid) continue;
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(sid)];
        if (!CityMap::enterable_from(seg, intersection_id)) continue;
        const double theta_plus = map.segment_heading_from(seg, intersection_id);
        const double turn = wrap_angle(theta_plus - approach_heading);
        cands.push_back({theta_plus, std::abs(turn), turn, sid});
    }

    if (cands.empty()) {
        const RoadSegment& seg = map.segments[static_cast<std::size_t>(arrival_sid)];
        if (!CityMap::enterable_from(seg, intersection_id)) {
            throw std::runtime_error("intersection_options: intersection has no traversable exit");
        }
        const double theta_plus = map.segment_heading_from(seg, intersection_id);
        return {IntersectionOption{0, theta_plus, arrival_sid}};
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
        if (l.turn_abs != r.turn_abs) return l.turn_abs < r.turn_abs;
        if (l.turn_signed != r.turn_signed) return l.turn_signed > r.turn_signed;
        return l.segment_id < r.segment_id;
    });

    std::vector<IntersectionOption> options;
    options.reserve(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        options.push_back({static_cast<int>(i), cands[i].theta_plus, cands[i].segment_id});
    }
    return options;
}

} // namespace urbannav
