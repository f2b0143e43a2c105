#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "conical/numerics.hpp"

using namespace conical;

TEST_CASE("tridiagonal solvers against a dense product") {
    const int n = 40;
    std::vector<double> a(n, -1.0), b(n, 2.5), c(n, -1.2), x(n), rhs(n);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto& v : x) v = U(rng);
    for (int i = 0; i < n; ++i) rhs[i] = b[i] * x[i] + (i > 0 ? a[i] * x[i - 1] : 0) + (i + 1 < n ? c[i] * x[i + 1] : 0);
    TridiagonalLU lu(a, b, c);
    lu.solve(rhs.data());
    for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));

    CyclicTridiagonal cy(n, -1.0, 2.5, -1.2);
    for (int i = 0; i < n; ++i) rhs[i] = 2.5 * x[i] - x[(i + n - 1) % n] - 1.2 * x[(i + 1) % n];
    cy.solve(rhs.data());
    for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("interpolants reproduce cubics") {
    std::vector<double> v(20);
    auto p = [](double s) { return 0.3 * s * s * s - s * s + 2.0; };
    for (int i = 0; i < 20; ++i) v[i] = p(i);
    for (double s : {0.0, 3.3, 10.71, 18.5}) CHECK(lagrange4(v.data(), 1, 20, s) == doctest::Approx(p(s)).epsilon(1e-12));
    CHECK(linear_interp(v.data(), 1, 20, 2.5) == doctest::Approx(0.5 * (p(2) + p(3))));

    Pchip pc({0, 1, 2, 3, 4}, {0, 0.1, 0.5, 0.9, 1.0});
    CHECK(pc(2.0) == doctest::Approx(0.5));
    CHECK(pc.inverse(0.5) == doctest::Approx(2.0).epsilon(1e-10));
    for (int k = 0; k < 40; ++k) CHECK(pc(0.1 * (k + 1)) >= pc(0.1 * k));
}

TEST_CASE("periodic B-spline on a smooth field") {
    const int nx = 32, ny = 64;
    const double dx = 1.0 / nx, y0 = -2.0, dy = 4.0 / (ny - 1);
    Field2D f(nx, ny);
    auto g = [](double X, double Y) { return std::sin(2 * M_PI * X) * std::exp(-Y * Y) + std::tanh(Y); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) f(i, j) = g(i * dx, y0 + j * dy);
    BSpline2D s(f, dx, y0, dy);
    CHECK(s(3 * dx, y0 + 5 * dy) == doctest::Approx(f(3, 5)).epsilon(1e-10));
    CHECK(s(1.0 + 0.37, 0.21) == doctest::Approx(g(0.37, 0.21)).epsilon(1e-3));
    double h = 1e-5;
    CHECK(s.d_dY(0.2, 0.4) == doctest::Approx((g(0.2, 0.4 + h) - g(0.2, 0.4 - h)) / (2 * h)).epsilon(2e-3));
}

TEST_CASE("fit_line recovers a slope") {
    std::vector<double> t, y;
    for (int i = 0; i < 50; ++i) t.push_back(i * 0.5), y.push_back(-0.7 * i * 0.5 + 3.0);
    auto fit = fit_line(t, y);
    CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.rms_residual < 1e-12);
}

TEST_CASE("adaptive RK4 on the harmonic oscillator") {
    Rhs2 rhs = [](double, const State2& s) { return State2{s[1], -s[0]}; };
    double h = 0.1;
    AdaptiveStats st;
    State2 y = integrate_adaptive(rhs, {1.0, 0.0}, 0.0, 5.0, 1e-11, h, &st);
    CHECK(y[0] == doctest::Approx(std::cos(5.0)).epsilon(1e-8));
    CHECK(y[1] == doctest::Approx(-std::sin(5.0)).epsilon(1e-8));
    CHECK(st.accepted > 0);
}

TEST_CASE("golden section") {
    double m = golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, -1, 2, 1e-8);
    CHECK(m == doctest::Approx(0.3).epsilon(1e-6));
}
