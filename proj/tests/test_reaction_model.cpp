#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conical/reaction_model.hpp"

using namespace conical;
using std::numbers::pi;

TEST_CASE("eval_f sign pattern and arithmetic") {
    auto f = CombustionNonlinearity::quadratic(0.3);
    CHECK(eval_f(0.2, f) == 0.0);
    CHECK(eval_f(1.0, f) == 0.0);
    CHECK(eval_f(1.5, f) == 0.0);
    CHECK(eval_f(-0.4, f) == 0.0);
    CHECK(eval_f(0.6, f) == doctest::Approx(0.12).epsilon(1e-14));
    for (int k = 1; k < 100; ++k) CHECK(eval_f(0.3 + 0.7 * k / 100.0, f) > 0.0);
}

TEST_CASE("nonlinearity validation") {
    auto f = CombustionNonlinearity::quadratic(0.3);
    auto rep = f.validate();
    CHECK(rep.ok());
    CHECK(f.left_slope_at_one(1e-6) == doctest::Approx(-0.7).epsilon(1e-5));
    CHECK(f.primitive(1.0) == doctest::Approx(std::pow(0.7, 3) / 6.0).epsilon(1e-10));

    auto z = CombustionNonlinearity::zero(0.3);
    auto zr = z.validate();
    CHECK_FALSE(zr.ok());
    REQUIRE(zr.find("positive_on_theta_one") != nullptr);
    CHECK_FALSE(zr.find("positive_on_theta_one")->pass);

    auto p = CombustionNonlinearity::power(0.2, 2.0);
    CHECK(p.validate().ok());
}

TEST_CASE("Lipschitz bound holds on a sampled mesh") {
    auto f = CombustionNonlinearity::quadratic(0.3);
    double lip = 0.0;
    for (int i = 0; i < 2000; ++i) {
        double a = -0.5 + 2.0 * i / 2000, b = a + 1e-3;
        lip = std::max(lip, std::abs(f(a) - f(b)) / 1e-3);
    }
    CHECK(lip <= f.lipschitz_bound() + 1e-9);
}

TEST_CASE("flow validation") {
    auto ok = validate_flow(ShearFlow::cosine(0.5, 1.0));
    CHECK(ok.ok());
    auto odd = validate_flow(ShearFlow::fourier(0.0, {}, {1.0}, 1.0));
    CHECK_FALSE(odd.find("even")->pass);
    CHECK(odd.find("zero_mean")->pass);
    auto cst = validate_flow(ShearFlow::constant(0.1, 1.0));
    CHECK_FALSE(cst.find("zero_mean")->pass);
    CHECK(cst.find("zero_mean")->defect == doctest::Approx(0.1).epsilon(1e-9));

    std::vector<double> samples(64);
    for (int i = 0; i < 64; ++i) samples[i] = 0.3 * std::cos(2 * pi * i / 64.0);
    auto tab = ShearFlow::tabulated(samples, 1.0);
    CHECK(validate_flow(tab).ok());
    CHECK(tab(0.25) == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("non-finite flow values are rejected") {
    auto bad = ShearFlow::tabulated({0.0, NAN, 0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(validate_flow(bad), std::domain_error);
}

TEST_CASE("diffusion matrices") {
    auto A = diffusion_matrix(pi / 2, MatrixVariant::A);
    CHECK(A.xx == 1.0);
    CHECK(A.yy == 1.0);
    CHECK(std::abs(A.xy) < 1e-15);
    CHECK(diffusion_matrix(pi / 3, MatrixVariant::A).xy == doctest::Approx(0.5));
    CHECK(diffusion_matrix(pi / 3, MatrixVariant::B).xy == doctest::Approx(-0.5));
    auto N = diffusion_matrix(pi - 1e-6, MatrixVariant::A);
    auto [lo, hi] = N.eigenvalues();
    CHECK(std::min(lo, hi) > 0.0);
    CHECK(std::min(lo, hi) < 1e-11);  // 1 + cos(alpha)
    CHECK(std::max(lo, hi) == doctest::Approx(2.0));
    for (int k = 1; k <= 100; ++k) {
        double a = pi * k / 101.0;
        for (auto v : {MatrixVariant::A, MatrixVariant::B}) {
            auto [l1, l2] = diffusion_matrix(a, v).eigenvalues();
            CHECK(std::min(l1, l2) > 0.0);
        }
    }
    CHECK_THROWS_AS(diffusion_matrix(0.0, MatrixVariant::A), ConfigError);
    CHECK_THROWS_AS(diffusion_matrix(pi, MatrixVariant::B), ConfigError);
}

TEST_CASE("cone membership") {
    CHECK(cone_membership(3, -1, {pi / 2, 0.0, ConeSide::lower}));
    ConeRegion c{pi / 4, 0.0, ConeSide::lower};
    CHECK(cone_membership(1, -1, c));
    CHECK_FALSE(cone_strict_interior(1, -1, c));
    CHECK(cone_membership(1, -1, {pi / 4, 0.0, ConeSide::upper}));
    CHECK(cone_membership(0, 3, {pi / 4, 2.0, ConeSide::upper}));
    CHECK_FALSE(cone_membership(0, 3, {pi / 4, 2.0, ConeSide::lower}));

    // lower cone xor strict upper interior away from the boundary
    ConeRegion lo{pi / 3, 0.5, ConeSide::lower}, up{pi / 3, 0.5, ConeSide::upper};
    for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) {
            double x = 0.37 * i, y = 0.41 * j;
            if (std::abs(y - lo.boundary_y(x)) < 1e-9) continue;
            CHECK((cone_membership(x, y, lo) != cone_strict_interior(x, y, up)));
        }
}

TEST_CASE("config parsing") {
    CHECK(parse_angle("pi/3") == doctest::Approx(pi / 3));
    CHECK(parse_angle("2pi/3") == doctest::Approx(2 * pi / 3));
    CHECK(parse_angle(0.5) == 0.5);
    CHECK_THROWS_AS(parse_angle("half"), ConfigError);
    auto p = parse_problem(nlohmann::json::parse(
        R"({"theta":0.25,"flow":{"family":"cosine","amplitude":0.3,"period":2},"alpha":["pi/3","pi/2"]})"));
    CHECK(p.f.theta() == 0.25);
    CHECK(p.flow.period() == 2.0);
    CHECK(p.flow(0.0) == doctest::Approx(0.3));
    CHECK(p.alphas.size() == 2);
    CHECK_THROWS_AS(parse_problem(nlohmann::json::parse(R"({"alpha":0})")), ConfigError);
    CHECK_THROWS_AS(parse_problem(nlohmann::json::parse(R"({"theta":0.3})")), ConfigError);
    CHECK_THROWS_AS(parse_flow(nlohmann::json::parse(R"({"family":"vortex"})")), ConfigError);
}
