#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conical/barrier.hpp"
#include "fixtures.hpp"

using namespace conical;
using std::numbers::pi;

namespace {

const auto kF = CombustionNonlinearity::quadratic(0.3);

FrontProfile lifted_planar(const PeriodicStripGrid& g, MatrixVariant v) {
    FrontProfile p;
    p.grid = g;
    p.values = g.make_field();
    p.variant = v;
    p.alpha = pi / 2;
    p.speed = fixtures::kPlanarSpeed;
    p.normalized = true;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) p.values(i, j) = fixtures::planar().value(g.Y(j));
    return p;
}

}  // namespace

TEST_CASE("h-ODE against the independent integrator") {
    auto h = integrate_h(0.01, 0.3, kF);
    CHECK(h.h(1.0) == doctest::Approx(fixtures::kH1Beta001).epsilon(1e-7));
    CHECK(h.h(2.0) == doctest::Approx(fixtures::kH2Beta001).epsilon(1e-7));
    auto k = integrate_h(0.03, 0.3, kF);
    CHECK(k.h(1.0) == doctest::Approx(fixtures::kH1Beta003).epsilon(1e-7));
    CHECK(k.h(2.0) == doctest::Approx(fixtures::kH2Beta003).epsilon(1e-7));
    CHECK(k.h(0.15) == doctest::Approx(0.3));
}

TEST_CASE("zero reaction leaves h linear") {
    auto h = integrate_h(1.0, 0.3, CombustionNonlinearity::zero(0.3));
    CHECK(std::abs(h.h(2.0) - 4.0) < 1e-8);
    CHECK(std::abs(h.h(1.0) - 2.0) < 1e-8);
}

TEST_CASE("h lemma holds above the energy threshold only") {
    double thr = h_monotonicity_threshold(kF);
    CHECK(thr == doctest::Approx(std::pow(0.7, 3) / 12.0).epsilon(1e-8));
    auto below = check_h_lemma(extend_H(integrate_h(0.5 * thr, 0.3, kF)));
    CHECK_FALSE(below.ok());
    CHECK_FALSE(below.h1_above_one);
    auto above = check_h_lemma(extend_H(integrate_h(1.05 * thr, 0.3, kF)));
    CHECK(above.ok());
    CHECK(above.h1 > 1.0);
    CHECK(above.max_second_difference <= 1e-12);
}

TEST_CASE("extended H") {
    auto H = extend_H(integrate_h(0.03, 0.3, kF));
    CHECK(H.extended);
    CHECK(H.H(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(H.H(0.15) == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(H.H(1.0) == doctest::Approx(fixtures::kH1Beta003).epsilon(1e-6));
    auto I = identity_H();
    CHECK(I.identity);
    CHECK(I.H(0.7) == doctest::Approx(0.7));
}

TEST_CASE("band constants of the planar front") {
    PeriodicStripGrid g{1.0, 16, 12.0, 2048};
    auto phi = lifted_planar(g, MatrixVariant::A), psi = lifted_planar(g, MatrixVariant::B);
    auto k = measure_band_constants(phi, psi, 0.3, pi / 2);
    const double dy = g.dy(), c0 = fixtures::kPlanarSpeed;
    // U = theta exp(c0 Y) below the origin
    CHECK(std::abs(k.M1 - std::log(0.5) / c0) <= dy);
    CHECK(std::abs(k.M0 - std::log(0.25) / c0) <= dy);
    CHECK(std::abs(k.M3 - fixtures::kLevelHalf) <= dy);
    CHECK(k.M1 == k.M2);
    CHECK(k.M3 == k.M4);
    CHECK(std::abs(k.mu - c0 * 0.15) < 2 * dy * c0 * c0 * 0.15);
    CHECK(std::abs(k.mu0 - c0 * 0.075) < 2 * dy * c0 * c0 * 0.075);
    CHECK(k.beta == doctest::Approx(std::min(4 * k.mu * k.mu, k.mu0 * k.mu0)));
    phi.normalized = false;
    CHECK_THROWS(measure_band_constants(phi, psi, 0.3, pi / 2));
}

TEST_CASE("subsolution from planar components solves the equation") {
    PeriodicStripGrid sg{1.0, 16, 16.0, 2048};
    auto phi = lifted_planar(sg, MatrixVariant::A), psi = lifted_planar(sg, MatrixVariant::B);
    PlaneGrid pg{2.0, 10.0, 32, 256};
    auto comp = build_components(phi, psi, pi / 2, pg);
    auto sub = build_subsolution(comp.phi1, comp.phi2);
    for (int j = 0; j <= pg.ny; j += 16) CHECK(sub(5, j) == doctest::Approx(fixtures::planar().value(pg.y(j))).epsilon(1e-6));
    auto r = residual(sub, fixtures::kPlanarSpeed, ShearFlow::zero(1.0), kF, pg);
    double eps = calibrate_discretization(fixtures::planar(), kF, pg);
    CHECK(residual_max_norm(r) < 2 * eps + 1e-9);
    auto super = build_supersolution(identity_H(), comp.phi1, comp.phi2);
    CHECK(super(7, 100) == doctest::Approx(2.0 * sub(7, 100)).epsilon(1e-12));
}

TEST_CASE("discretization residual is first order in max norm") {
    // f' jumps at theta, so the fourth derivative of U jumps there
    double a = calibrate_discretization(fixtures::planar(), kF, PlaneGrid{2.0, 10.0, 32, 128});
    double b = calibrate_discretization(fixtures::planar(), kF, PlaneGrid{2.0, 10.0, 32, 256});
    CHECK(a / b == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("region classification") {
    BandConstants k;
    k.M0 = -2.8;
    k.M0_prime = -2.8;
    k.M1 = -1.4;
    k.M2 = -1.4;
    k.M3 = 1.1;
    k.M4 = 1.1;
    CHECK(classify_region(0.0, 5.0, k, pi / 3) == Region::H);
    CHECK(classify_region(0.0, -10.0, k, pi / 3) == Region::C);
    CHECK(classify_region(0.0, 0.0, k, pi / 3) == Region::Z);
    // far on the right arm only one component is saturated
    CHECK(classify_region(20.0, 0.0, k, pi / 3) == Region::Z);
    CHECK(to_string(Region::Z) == "Z");
}

TEST_CASE("plane grid validation") {
    CHECK_THROWS_AS((PlaneGrid{8, 12, 511, 512}.validate(pi / 3)), ConfigError);
    CHECK_THROWS_AS((PlaneGrid{8, 2, 512, 512}.validate(pi / 3)), ConfigError);
    CHECK_NOTHROW((PlaneGrid{8, 12, 512, 512}.validate(pi / 3)));
}
