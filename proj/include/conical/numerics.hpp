#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace conical {

// Node-valued field, row-major in y: value(i, j) at column i, row j.
struct Field2D {
    int nx = 0;
    int ny = 0;
    std::vector<double> v;

    Field2D() = default;
    Field2D(int nx_nodes, int ny_nodes, double fill = 0.0)
        : nx(nx_nodes), ny(ny_nodes), v(static_cast<size_t>(nx_nodes) * ny_nodes, fill) {}

    double& operator()(int i, int j) { return v[static_cast<size_t>(j) * nx + i]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(j) * nx + i]; }
    double* row(int j) { return v.data() + static_cast<size_t>(j) * nx; }
    const double* row(int j) const { return v.data() + static_cast<size_t>(j) * nx; }
    bool same_shape(const Field2D& o) const { return nx == o.nx && ny == o.ny; }
};

double max_abs_difference(const Field2D& a, const Field2D& b);

// Thomas factorization of a fixed tridiagonal matrix (sub a, diag b, super c).
class TridiagonalLU {
public:
    TridiagonalLU() = default;
    TridiagonalLU(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c);

    // Solves in place on x[0], x[stride], ... x[(n-1) stride].
    void solve(double* x, std::ptrdiff_t stride = 1) const;
    int size() const { return static_cast<int>(inv_.size()); }

private:
    std::vector<double> a_;
    std::vector<double> cp_;
    std::vector<double> inv_;
};

// Cyclic tridiagonal system with constant coefficients (sub, diag, super),
// solved by Sherman-Morrison.
class CyclicTridiagonal {
public:
    CyclicTridiagonal() = default;
    CyclicTridiagonal(int n, double sub, double diag, double super);

    void solve(double* x) const;
    int size() const { return n_; }

private:
    int n_ = 0;
    double sub_ = 0.0;
    double super_ = 0.0;
    double gamma_ = 0.0;
    TridiagonalLU lu_;
    std::vector<double> z_;
    mutable std::vector<double> work_;
};

double cubic_hermite(double y0, double y1, double d0, double d1, double h, double t);
double cubic_hermite_derivative(double y0, double y1, double d0, double d1, double h, double t);

// Monotone piecewise cubic (Fritsch-Carlson) through (x_i, y_i), x strictly increasing.
class Pchip {
public:
    Pchip(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    // Smallest x where the interpolant equals level, assuming y nondecreasing.
    double inverse(double level) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    int locate(double x) const;
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

// Four-point Lagrange interpolation on a uniform 1D grid values[0..n-1] with spacing h
// starting at origin; s is the fractional index. Points outside are clamped to the end stencil.
double lagrange4(const double* values, std::ptrdiff_t stride, int n, double s);
double linear_interp(const double* values, std::ptrdiff_t stride, int n, double s);

// Tensor cubic B-spline interpolant: periodic in the first index, natural end
// conditions in the second. Nodes X_i = i dx (i < nx), Y_j = y0 + j dy (j < ny).
class BSpline2D {
public:
    BSpline2D(const Field2D& values, double dx, double y0, double dy);

    double operator()(double X, double Y) const;
    double d_dY(double X, double Y) const;
    double y_min() const { return y0_; }
    double y_max() const { return y0_ + dy_ * (ny_ - 1); }
    double period() const { return dx_ * nx_; }

private:
    double eval(double X, double Y, bool deriv) const;
    int nx_, ny_;
    double dx_, y0_, dy_;
    std::vector<double> coef_;  // (ny_ + 2) rows including ghosts at both ends
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double slope_stderr = 0.0;
};

LinearFit fit_line(const std::vector<double>& t, const std::vector<double>& y);

using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double, const State2&)>;

struct AdaptiveStats {
    int accepted = 0;
    int rejected = 0;
    double max_local_error = 0.0;
};

State2 rk4_step(const Rhs2& rhs, double z, const State2& y, double h);

// Adaptive step-doubling RK4 from z0 to z1; local error per step <= tol.
State2 integrate_adaptive(const Rhs2& rhs, State2 y, double z0, double z1, double tol, double& h_try,
                          AdaptiveStats* stats = nullptr);

// Minimizes a unimodal function on [a, b] to absolute width tol.
double golden_section_minimize(const std::function<double(double)>& g, double a, double b, double tol);

}  // namespace conical
