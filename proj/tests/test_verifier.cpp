#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conical/verifier.hpp"
#include "fixtures.hpp"

using namespace conical;
using std::numbers::pi;

namespace {

const PlaneGrid kGrid{8.0, 12.0, 128, 512};

}  // namespace

TEST_CASE("monotonicity in y") {
    auto u = fixtures::conical_field(kGrid, pi / 3);
    auto r = check_monotone_y(u, kGrid, 1e-12);
    CHECK(r.pass);
    CHECK(r.worst_violation <= 0.0);
    u(40, 200) += 0.01;
    r = check_monotone_y(u, kGrid, 1e-12);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_violation == doctest::Approx(0.01).epsilon(0.5));
    CHECK(r.x == doctest::Approx(kGrid.x(40)));
    CHECK(r.y == doctest::Approx(kGrid.y(200)));
    CHECK(to_json(r)["failed"] == "forward y-difference");
}

TEST_CASE("cone limits") {
    auto u = fixtures::conical_field(kGrid, pi / 3);
    auto r = check_cone_limits(u, kGrid, pi / 3);
    CHECK(r.pass);
    CHECK(r.details["levels"].size() == 5);
    auto flat = kGrid.make_field(0.5);
    CHECK_FALSE(check_cone_limits(flat, kGrid, pi / 3).pass);
    ConeLimitOptions o;
    o.levels = {100.0};
    CHECK_THROWS_AS(check_cone_limits(u, kGrid, pi / 3, o), VerificationError);
}

TEST_CASE("ordering of a triple") {
    auto sub = fixtures::conical_field(kGrid, pi / 3, -1.0);
    auto mid = fixtures::conical_field(kGrid, pi / 3);
    auto super = fixtures::conical_field(kGrid, pi / 3, 1.0);
    CHECK(check_ordering(sub, mid, super, kGrid, 1e-12).pass);
    auto r = check_ordering(super, mid, sub, kGrid, 1e-12);
    CHECK_FALSE(r.pass);
    CHECK(r.failed == "sub <= mid");
    auto neg = kGrid.make_field(-0.5);
    auto r2 = check_ordering(sub, mid, neg, kGrid, 1e-12);
    CHECK(r2.failed == "mid <= min(super, 1)");
}

TEST_CASE("comparison on cones") {
    auto lo = fixtures::conical_field(kGrid, pi / 3, -0.5);
    auto hi = fixtures::conical_field(kGrid, pi / 3);
    ConeRegion up{pi / 3, 6.0, ConeSide::upper};
    auto r = check_comparison_on_cone(lo, hi, kGrid, up, default_rho(0.3), 1e-12);
    CHECK(r.pass);
    CHECK(r.details["interior_bound"]["pass"] == true);
    CHECK(default_rho(0.3) == doctest::Approx(0.35));

    auto bad = check_comparison_on_cone(hi, lo, kGrid, up, default_rho(0.3), 1e-12);
    CHECK_FALSE(bad.pass);
    CHECK(bad.failed == "boundary_ordering");

    // hypothesis violated: the upper function is not close to 1 on a cone that reaches the front
    ConeRegion low_up{pi / 3, -6.0, ConeSide::upper};
    auto hyp = check_comparison_on_cone(lo, hi, kGrid, low_up, default_rho(0.3), 1e-12);
    CHECK(hyp.failed.rfind("interior_bound", 0) == 0);

    ConeRegion down{pi / 3, -6.0, ConeSide::lower};
    CHECK(check_comparison_on_cone(lo, hi, kGrid, down, 0.3, 1e-12).pass);
}

TEST_CASE("shift alignment of translated fronts") {
    auto a = fixtures::conical_field(kGrid, pi / 3);
    auto b = fixtures::conical_field(kGrid, pi / 3, -0.8);
    auto s = check_shift_uniqueness(a, b, kGrid, 1e-3);
    CHECK(s.report.pass);
    CHECK(s.shift == doctest::Approx(0.8).epsilon(1e-3));
    auto c = fixtures::conical_field(kGrid, pi / 4);
    CHECK_FALSE(check_shift_uniqueness(a, c, kGrid, 1e-3).report.pass);
}

TEST_CASE("whole-cell shift is exact") {
    auto a = fixtures::conical_field(kGrid, pi / 3);
    auto s = shift_field(a, kGrid, 3.0);
    CHECK(s(17, 100) == a(17, 103));
    CHECK(s(17, kGrid.ny) == a(17, kGrid.ny));
    CHECK_THROWS_AS(shift_field(a, PlaneGrid{8.0, 12.0, 64, 512}, 1.0), std::invalid_argument);
}
