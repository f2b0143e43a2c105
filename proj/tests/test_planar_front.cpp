#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conical/pulsating_front.hpp"
#include "fixtures.hpp"

using namespace conical;

TEST_CASE("planar speed matches the independent ODE oracle") {
    const auto& p = fixtures::planar();
    CHECK(std::abs(p.speed - fixtures::kPlanarSpeed) < 1e-8);
    CHECK(p.bracket <= 1e-9);
    CHECK(p.richardson_error < 1e-8);
}

TEST_CASE("planar profile shape") {
    const auto& p = fixtures::planar();
    CHECK(p.value(0.0) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(p.value(fixtures::kLevelHalf) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(p.derivative(fixtures::kLevelHalf) == doctest::Approx(fixtures::kSlopeAtHalf).epsilon(1e-5));
    // U' = c U below theta
    CHECK(p.value(-2.0) == doctest::Approx(0.3 * std::exp(-2.0 * fixtures::kPlanarSpeed)).epsilon(1e-6));
    for (int k = -40; k < 40; ++k) CHECK(p.value(0.25 * (k + 1)) >= p.value(0.25 * k));
    CHECK(p.value(30.0) > 0.999);
}

TEST_CASE("shooting mismatch changes sign across the speed") {
    auto f = CombustionNonlinearity::quadratic(0.3);
    PlanarFrontOptions o;
    CHECK(planar_shooting_mismatch(f, fixtures::kPlanarSpeed - 1e-3, o) < 0.0);
    CHECK(planar_shooting_mismatch(f, fixtures::kPlanarSpeed + 1e-3, o) > 0.0);
}

TEST_CASE("zero reaction has no front") {
    CHECK_THROWS_AS(planar_front_speed_1d(CombustionNonlinearity::zero(0.3)), BracketError);
}
