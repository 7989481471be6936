#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbannav/angles.hpp"

namespace urbannav {

/// Traversability of a road segment between its two endpoint intersections.
/// Blocked marks a dead-end street: enterable from either endpoint but
/// capped mid-segment, so it never carries through traffic.
enum class SegmentDir { TwoWay, OneWayAB, OneWayBA, Blocked };

struct Intersection {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct RoadSegment {
    int id = 0;
    int a = 0;
    int b = 0;
    SegmentDir dir = SegmentDir::TwoWay;
};

struct Landmark {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

/// A turning option at an intersection: the travel direction after taking
/// exit i, and the segment that exit leads onto.
struct IntersectionOption {
    int index = 0;
    double theta_plus = 0.0; // rad, post-intersection travel direction
    int exit_segment_id = 0;
};

/// Regular grid road network with per-segment directionality annotations
/// and a sparse landmark list.
struct CityMap {
    double side_m = 0.0;  // requested edge length
    double block_m = 0.0; // block edge length
    int blocks = 0;       // blocks per edge; lattice is (blocks+1)^2 nodes
    std::vector<Intersection> intersections;
    std::vector<RoadSegment> segments;
    std::vector<Landmark> landmarks;

    int nodes_per_edge() const { return blocks + 1; }
    double bounds_m() const { return blocks * block_m; }
    double area_km2() const { return bounds_m() * bounds_m() * 1e-6; }

    int node_id(int row, int col) const { return row * nodes_per_edge() + col; }

    const Intersection& node(int id) const { return intersections.at(static_cast<std::size_t>(id)); }

    int nearest_node(double x, double y) const {
        const int n = nodes_per_edge();
        int col = static_cast<int>(std::lround(x / block_m));
        int row = static_cast<int>(std::lround(y / block_m));
        col = std::max(0, std::min(n - 1, col));
        row = std::max(0, std::min(n - 1, row));
        return node_id(row, col);
    }

    /// Segment ids incident to a node. Rebuilt lazily after edits.
    const std::vector<int>& incident(int node_id) const {
        if (incident_.size() != intersections.size()) {
            rebuild_incident();
        }
        return incident_.at(static_cast<std::size_t>(node_id));
    }

    void invalidate_index() { incident_.clear(); }

    static int other_end(const RoadSegment& seg, int from_node) {
        return seg.a == from_node ? seg.b : seg.a;
    }

    /// True if a vehicle at `from_node` may drive onto the segment.
    /// Blocked (dead-end) segments are enterable; they just terminate.
    static bool enterable_from(const RoadSegment& seg, int from_node) {
        switch (seg.dir) {
            case SegmentDir::TwoWay: return true;
            case SegmentDir::OneWayAB: return from_node == seg.a;
            case SegmentDir::OneWayBA: return from_node == seg.b;
            case SegmentDir::Blocked: return true;
        }
        return false;
    }

    /// True if the segment carries traffic from `from_node` through to the
    /// far intersection (used for reachability).
    static bool passes_through(const RoadSegment& seg, int from_node) {
        return seg.dir != SegmentDir::Blocked && enterable_from(seg, from_node);
    }

    /// Travel heading when leaving `from_node` along the segment.
    double segment_heading_from(const RoadSegment& seg, int from_node) const {
        const Intersection& p = node(from_node);
        const Intersection& q = node(other_end(seg, from_node));
        return std::atan2(q.y - p.y, q.x - p.x);
    }

  private:
    mutable std::vector<std::vector<int>> incident_;

    void rebuild_incident() const {
        incident_.assign(intersections.size(), {});
        for (const RoadSegment& s : segments) {
            incident_[static_cast<std::size_t>(s.a)].push_back(s.id);
            incident_[static_cast<std::size_t>(s.b)].push_back(s.id);
        }
    }
};

inline const char* to_string(SegmentDir dir) {
    switch (dir) {
        case SegmentDir::TwoWay: return "2W";
        case SegmentDir::OneWayAB: return "AB";
        case SegmentDir::OneWayBA: return "BA";
        case SegmentDir::Blocked: return "DE";
    }
    return "?";
}

/// Writes the versioned text form: header `cityv1 <side_m> <block_m>`,
/// then I/S/L lines. Coordinates carry 3 decimals.
inline void write_city(std::ostream& os, const CityMap& map) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "cityv1 %.3f %.3f\n", map.side_m, map.block_m);
    os << buf;
    for (const Intersection& n : map.intersections) {
        std::snprintf(buf, sizeof(buf), "I %d %.3f %.3f\n", n.id, n.x, n.y);
        os << buf;
    }
    for (const RoadSegment& s : map.segments) {
        std::snprintf(buf, sizeof(buf), "S %d %d %d %s\n", s.id, s.a, s.b, to_string(s.dir));
        os << buf;
    }
    for (const Landmark& l : map.landmarks) {
        std::snprintf(buf, sizeof(buf), "L %d %.3f %.3f\n", l.id, l.x, l.y);
        os << buf;
    }
}

inline CityMap read_city(std::istream& is) {
    CityMap map;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("citymap line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(is, line)) fail("missing header");
    line_no = 1;
    {
        char tag[16];
        if (std::sscanf(line.c_str(), "%15s %lf %lf", tag, &map.side_m, &map.block_m) != 3 ||
            std::string(tag) != "cityv1") {
            fail("expected 'cityv1 <side_m> <block_m>'");
        }
    }

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        char kind = line[0];
        if (kind == 'I') {
            Intersection n;
            if (std::sscanf(line.c_str(), "I %d %lf %lf", &n.id, &n.x, &n.y) != 3) fail("bad I line");
            map.intersections.push_back(n);
        } else if (kind == 'S') {
            RoadSegment s;
            char dir[8];
            if (std::sscanf(line.c_str(), "S %d %d %d %7s", &s.id, &s.a, &s.b, dir) != 4) fail("bad S line");
            const std::string d(dir);
            if (d == "2W") s.dir = SegmentDir::TwoWay;
            else if (d == "AB") s.dir = SegmentDir::OneWayAB;
            else if (d == "BA") s.dir = SegmentDir::OneWayBA;
            else if (d == "DE") s.dir = SegmentDir::Blocked;
            else fail("unknown segment dir '" + d + "'");
            map.segments.push_back(s);
        } else if (kind == 'L') {
            Landmark l;
            if (std::sscanf(line.c_str(), "L %d %lf %lf", &l.id, &l.x, &l.y) != 3) fail("bad L line");
            map.landmarks.push_back(l);
        } else {
            fail("unknown record kind");
        }
    }

    // Recover the lattice dimensions from the node count.
    const auto n_nodes = map.intersections.size();
    const int per_edge = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_nodes))));
    if (per_edge < 2 || static_cast<std::size_t>(per_edge) * per_edge != n_nodes) {
        throw std::runtime_error("citymap: node count is not a square lattice");
    }
    map.blocks = per_edge - 1;
    return map;
}

} // namespace urbannav
