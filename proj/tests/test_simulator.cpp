#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conical/simulator.hpp"
#include "fixtures.hpp"

using namespace conical;
using std::numbers::pi;

namespace {

const auto kF = CombustionNonlinearity::quadratic(0.3);

}  // namespace

TEST_CASE("flat front on the plane travels at the planar speed") {
    EvolveOptions o;
    o.grid = PlaneGrid{2.0, 12.0, 16, 384};
    o.alpha = pi / 2;
    o.c_frame = 0.5;
    o.t_max = 300.0;
    auto flow = ShearFlow::zero(1.0);
    auto u0 = fixtures::conical_field(o.grid, pi / 2);
    auto r = evolve(u0, flow, kF, o);
    CHECK(r.converged);
    CHECK(std::abs(r.speed.c - fixtures::kPlanarSpeed) < 1e-3);
    CHECK(std::abs(r.shift_speed - r.speed.c) < 1e-3);
    CHECK(r.clipped == 0);
    CHECK(r.level_wait == 0.0);
}

TEST_CASE("monotone scheme preserves ordering of data") {
    EvolveOptions o;
    o.grid = PlaneGrid{4.0, 8.0, 64, 128};
    o.alpha = pi / 3;
    o.c_frame = 0.55;
    o.scheme = TimeScheme::lod_monotone;
    auto flow = ShearFlow::cosine(0.5, 1.0);
    auto lo = fixtures::conical_field(o.grid, pi / 3, -0.6);
    auto hi = fixtures::conical_field(o.grid, pi / 3, 0.0);
    PlaneEvolver a(lo, flow, kF, o), b(hi, flow, kF, o);
    for (int n = 0; n < 200; ++n) {
        a.step();
        b.step();
    }
    double worst = -1.0;
    const auto& ua = a.state().u;
    const auto& ub = b.state().u;
    for (size_t k = 0; k < ua.v.size(); ++k) worst = std::max(worst, ua.v[k] - ub.v[k]);
    CHECK(worst <= 1e-12);
    for (double v : ua.v) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("evolution is deterministic") {
    EvolveOptions o;
    o.grid = PlaneGrid{4.0, 8.0, 32, 128};
    o.alpha = pi / 3;
    auto flow = ShearFlow::cosine(0.5, 1.0);
    auto u0 = fixtures::conical_field(o.grid, pi / 3);
    PlaneEvolver a(u0, flow, kF, o), b(u0, flow, kF, o);
    for (int n = 0; n < 50; ++n) a.step(), b.step();
    CHECK(a.state().u.v == b.state().u.v);
}

TEST_CASE("level position and whole-cell shifts") {
    EvolveOptions o;
    o.grid = PlaneGrid{2.0, 12.0, 16, 384};
    o.alpha = pi / 2;
    auto u0 = fixtures::conical_field(o.grid, pi / 2);
    PlaneEvolver ev(u0, ShearFlow::zero(1.0), kF, o);
    CHECK(ev.level_position() == doctest::Approx(fixtures::kLevelHalf).epsilon(1e-5));
    ev.shift_cells(8);
    CHECK(ev.level_position() == doctest::Approx(fixtures::kLevelHalf - 8 * o.grid.dy()).epsilon(1e-5));
    // the top row is held at 1, so a flat field below 1/2 crosses only in the last cell
    auto flat = o.grid.make_field(0.1);
    PlaneEvolver none(flat, ShearFlow::zero(1.0), kF, o);
    CHECK(none.column_level(8) > o.grid.y_max - o.grid.dy());
}

TEST_CASE("speed fit of a noisy trace") {
    std::mt19937 rng(20261019);
    std::normal_distribution<double> noise(0.0, 1e-4);
    SpeedTrace tr;
    for (int k = 0; k < 400; ++k) {
        double t = 0.5 * k;
        tr.times.push_back(t);
        tr.level_positions.push_back(2.0 - 0.6 * t + noise(rng));
    }
    auto s = measure_speed(tr);
    CHECK(s.c == doctest::Approx(0.6).epsilon(1e-5));
    CHECK(s.bracket < 1e-5);

    SpeedTrace curved;
    for (int k = 0; k < 400; ++k) curved.times.push_back(k), curved.level_positions.push_back(std::sqrt(k + 1.0) * 5);
    CHECK_THROWS_AS(measure_speed(curved), ConvergenceError);
    CHECK_THROWS_AS(measure_speed(SpeedTrace{}), std::invalid_argument);
}

TEST_CASE("speed formula comparison") {
    SpeedEstimate cA;
    cA.c = 0.5;
    SpeedEstimate m;
    m.c = 0.5 / std::sin(pi / 3) * (1 + 1e-3);
    auto r = compare_speed_formula(m, cA, pi / 3, 0.02);
    CHECK(r.pass);
    CHECK(r.rel_error == doctest::Approx(1e-3).epsilon(1e-6));
    m.c = 0.5;
    CHECK_FALSE(compare_speed_formula(m, cA, pi / 3, 0.02).pass);
}

TEST_CASE("configuration errors") {
    EvolveOptions o;
    o.grid = PlaneGrid{2.0, 12.0, 16, 384};
    auto flow = ShearFlow::zero(1.0);
    CHECK_THROWS_AS(PlaneEvolver(PlaneGrid{2.0, 12.0, 16, 256}.make_field(), flow, kF, o), std::invalid_argument);
    o.dt = 0.0;
    CHECK_THROWS_AS(PlaneEvolver(o.grid.make_field(), flow, kF, o), ConfigError);
    CHECK_THROWS_AS(parse_time_scheme("euler"), ConfigError);
    CHECK_THROWS_AS(parse_lateral_bc("dirichlet"), ConfigError);
    CHECK(parse_lateral_bc(to_string(LateralBC::arm_periodic)) == LateralBC::arm_periodic);
}
