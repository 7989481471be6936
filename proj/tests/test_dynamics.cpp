#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "urbannav/angles.hpp"
#include "urbannav/dynamics.hpp"

using namespace urbannav;
using Catch::Approx;

TEST_CASE("wrap_angle maps onto (-pi, pi]") {
    CHECK(wrap_angle(3.0 * kPi / 2.0) == Approx(-kPi / 2.0));
    CHECK(wrap_angle(kPi) == Approx(kPi));
    CHECK(wrap_angle(-kPi) == Approx(kPi));
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(7.0 * kPi) == Approx(kPi));
    CHECK_THROWS_AS(wrap_angle(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(wrap_angle(INFINITY), std::invalid_argument);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const double th = uni(rng);
        const double w = wrap_angle(th);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::remainder(th - w, kTwoPi) == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("displacement terms: straight-line limits") {
    DynamicsParams p{2.85, 0.1};

    const Displacement a = displacement_terms(10.0, {0.0, 0.0}, p);
    CHECK(a.dx == Approx(1.0));
    CHECK(a.dy == 0.0);
    CHECK(a.dtheta == 0.0);

    // d = 0.5 * 2 * 1^2 = 1 from standstill
    DynamicsParams p1{2.85, 1.0};
    const Displacement b = displacement_terms(0.0, {2.0, 0.0}, p1);
    CHECK(b.dx == Approx(1.0));
    CHECK(b.dy == 0.0);
    CHECK(b.dtheta == 0.0);
}

TEST_CASE("displacement terms: curved step against the arc formulas") {
    // Independent evaluation of rho = l/steer, dtheta = d/rho,
    // dx = rho sin, dy = rho (1 - cos), frozen reference values included.
    const double l = 2.85, dt = 0.1, v = 10.0, steer = 0.1;
    const double d = v * dt;
    const double rho = l / steer;
    const double dtheta = d / rho;

    const Displacement out = displacement_terms(v, {0.0, steer}, {l, dt});
    CHECK(out.dtheta == Approx(dtheta).epsilon(1e-12));
    CHECK(out.dx == Approx(rho * std::sin(dtheta)).epsilon(1e-12));
    CHECK(out.dy == Approx(rho * (1.0 - std::cos(dtheta))).epsilon(1e-12));

    CHECK(out.dtheta == Approx(0.0350877).margin(1e-7));
    CHECK(out.dx == Approx(0.9997946).margin(1e-7));
    CHECK(out.dy == Approx(0.0175420).margin(1e-7));
}

TEST_CASE("step examples") {
    DynamicsParams p{2.85, 0.1};

    VehicleState s0{0.0, 0.0, 0.0, 10.0};
    VehicleState s1 = step(s0, {0.0, 0.0}, p);
    CHECK(s1.x == Approx(1.0));
    CHECK(s1.y == Approx(0.0).margin(1e-15));
    CHECK(s1.theta == 0.0);
    CHECK(s1.v == Approx(10.0));

    VehicleState n0{0.0, 0.0, kPi / 2.0, 10.0};
    VehicleState n1 = step(n0, {0.0, 0.0}, p);
    CHECK(n1.x == Approx(0.0).margin(1e-12));
    CHECK(n1.y == Approx(1.0));
    CHECK(n1.theta == Approx(kPi / 2.0));

    VehicleState c1 = step(s0, {0.0, 0.1}, p);
    CHECK(c1.x == Approx(0.9997946).margin(1e-7));
    CHECK(c1.y == Approx(0.0175420).margin(1e-7));
    CHECK(c1.theta == Approx(0.0350877).margin(1e-7));
    CHECK(c1.v == Approx(10.0));
}

TEST_CASE("speed never goes negative") {
    DynamicsParams p{2.85, 0.1};
    VehicleState s{0.0, 0.0, 0.0, 0.1};
    for (int i = 0; i < 10; ++i) {
        s = step(s, {-3.0, 0.0}, p);
        CHECK(s.v >= 0.0);
    }
    CHECK(s.v == 0.0);
}

TEST_CASE("straight fallback is continuous at the switch") {
    DynamicsParams p{2.85, 0.1};
    const double v = 12.0;
    // Just below the threshold takes the series branch, at it the exact one.
    const double below = kSteerEpsilonRad * (1.0 - 1e-9);
    const Displacement lo = displacement_terms(v, {0.5, below}, p);
    const Displacement hi = displacement_terms(v, {0.5, kSteerEpsilonRad}, p);
    CHECK(std::abs(lo.dx - hi.dx) < 1e-9);
    CHECK(std::abs(lo.dy - hi.dy) < 1e-9);
    CHECK(std::abs(lo.dtheta - hi.dtheta) < 1e-12);

    VehicleState s{3.0, -2.0, 0.7, v};
    const VehicleState a = step(s, {0.5, below}, p);
    const VehicleState b = step(s, {0.5, kSteerEpsilonRad}, p);
    CHECK(std::abs(a.x - b.x) < 1e-9);
    CHECK(std::abs(a.y - b.y) < 1e-9);
}

TEST_CASE("arc length per step equals v*dt for a=0, any steering") {
    DynamicsParams p{2.85, 0.1};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> steer(-kMaxSteerRad, kMaxSteerRad);
    std::uniform_real_distribution<double> speed(0.1, 30.0);
    for (int i = 0; i < 500; ++i) {
        const double v = speed(rng);
        const double phi = steer(rng);
        const Displacement d = displacement_terms(v, {0.0, phi}, p);
        // Reconstruct arc length from the chord and the subtended angle.
        const double chord = std::hypot(d.dx, d.dy);
        const double half = 0.5 * d.dtheta;
        const double arc = std::abs(half) > 1e-9 ? chord * half / std::sin(half) : chord;
        CHECK(std::abs(arc - v * p.dt_s) < 1e-9);
    }
}

TEST_CASE("rotation equivariance of the step") {
    DynamicsParams p{2.85, 0.1};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        VehicleState s{uni(rng) * 100.0, uni(rng) * 100.0, uni(rng) * 3.0, 5.0 + 10.0 * std::abs(uni(rng))};
        const ControlInput ctrl{uni(rng) * 2.0, uni(rng) * 0.4};
        const double alpha = uni(rng) * 3.0;
        const double c = std::cos(alpha), sn = std::sin(alpha);

        VehicleState rotated{c * s.x - sn * s.y, sn * s.x + c * s.y, wrap_angle(s.theta + alpha), s.v};
        const VehicleState lhs = step(rotated, ctrl, p);
        const VehicleState base = step(s, ctrl, p);
        const VehicleState rhs{c * base.x - sn * base.y, sn * base.x + c * base.y,
                               wrap_angle(base.theta + alpha), base.v};

        const double scale = std::max(1.0, std::hypot(rhs.x, rhs.y));
        CHECK(std::abs(lhs.x - rhs.x) / scale < 1e-12);
        CHECK(std::abs(lhs.y - rhs.y) / scale < 1e-12);
        CHECK(angular_distance(lhs.theta, rhs.theta) < 1e-12);
        CHECK(lhs.v == Approx(rhs.v));
    }
}

TEST_CASE("theta output stays wrapped") {
    DynamicsParams p{2.85, 0.1};
    VehicleState s{0.0, 0.0, 3.1, 10.0};
    for (int i = 0; i < 200; ++i) {
        s = step(s, {0.0, 0.5}, p);
        CHECK(s.theta > -kPi);
        CHECK(s.theta <= kPi);
    }
}
