#include "conical/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conical {

double max_abs_difference(const Field2D& a, const Field2D& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("field shapes differ");
    double m = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

// ============================================================================
// Tridiagonal solvers
// ============================================================================

TridiagonalLU::TridiagonalLU(const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<double>& c)
    : a_(a), cp_(b.size()), inv_(b.size()) {
    const size_t n = b.size();
    if (a.size() != n || c.size() != n || n == 0) throw std::invalid_argument("tridiagonal sizes");
    inv_[0] = 1.0 / b[0];
    cp_[0] = c[0] * inv_[0];
    for (size_t i = 1; i < n; ++i) {
        double den = b[i] - a[i] * cp_[i - 1];
        if (den == 0.0) throw std::runtime_error("singular tridiagonal system");
        inv_[i] = 1.0 / den;
        cp_[i] = c[i] * inv_[i];
    }
}

void TridiagonalLU::solve(double* x, std::ptrdiff_t stride) const {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(inv_.size());
    x[0] *= inv_[0];
    for (std::ptrdiff_t i = 1; i < n; ++i) x[i * stride] = (x[i * stride] - a_[i] * x[(i - 1) * stride]) * inv_[i];
    for (std::ptrdiff_t i = n - 2; i >= 0; --i) x[i * stride] -= cp_[i] * x[(i + 1) * stride];
}

CyclicTridiagonal::CyclicTridiagonal(int n, double sub, double diag, double super)
    : n_(n), sub_(sub), super_(super), gamma_(-diag), z_(n, 0.0), work_(n, 0.0) {
    if (n < 3) throw std::invalid_argument("cyclic system needs n >= 3");
    std::vector<double> a(n, sub), b(n, diag), c(n, super);
    b[0] = diag - gamma_;
    b[n - 1] = diag - super * sub / gamma_;
    lu_ = TridiagonalLU(a, b, c);
    z_[0] = gamma_;
    z_[n - 1] = super;
    lu_.solve(z_.data());
}

void CyclicTridiagonal::solve(double* x) const {
    lu_.solve(x);
    double fact = (x[0] + sub_ * x[n_ - 1] / gamma_) / (1.0 + z_[0] + sub_ * z_[n_ - 1] / gamma_);
    for (int i = 0; i < n_; ++i) x[i] -= fact * z_[i];
}

// ============================================================================
// Interpolation
// ============================================================================

double cubic_hermite(double y0, double y1, double d0, double d1, double h, double t) {
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

double cubic_hermite_derivative(double y0, double y1, double d0, double d1, double h, double t) {
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (6 * t - 6 * t2) * y1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)), d_(x_.size()) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("pchip needs >= 2 matching points");
    std::vector<double> h(n - 1), del(n - 1);
    for (size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        if (!(h[k] > 0.0)) throw std::invalid_argument("pchip abscissae must increase");
        del[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
        d_[0] = d_[1] = del[0];
        return;
    }
    for (size_t k = 1; k + 1 < n; ++k) {
        if (del[k - 1] * del[k] <= 0.0) {
            d_[k] = 0.0;
        } else {
            double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
            d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
        return d;
    };
    d_[0] = endpoint(h[0], h[1], del[0], del[1]);
    d_[n - 1] = endpoint(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

int Pchip::locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int k = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(x_.size()) - 2);
}

double Pchip::operator()(double x) const {
    int k = locate(x);
    double h = x_[k + 1] - x_[k];
    return cubic_hermite(y_[k], y_[k + 1], d_[k], d_[k + 1], h, (x - x_[k]) / h);
}

double Pchip::derivative(double x) const {
    int k = locate(x);
    double h = x_[k + 1] - x_[k];
    return cubic_hermite_derivative(y_[k], y_[k + 1], d_[k], d_[k + 1], h, (x - x_[k]) / h);
}

double Pchip::inverse(double level) const {
    const size_t n = x_.size();
    for (size_t k = 0; k + 1 < n; ++k) {
        if ((y_[k] - level) * (y_[k + 1] - level) > 0.0) continue;
        if (y_[k] == level) return x_[k];
        double a = x_[k], b = x_[k + 1];
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            double m = 0.5 * (a + b);
            if (((*this)(m) - level) * (y_[k] - level) > 0.0)
                a = m;
            else
                b = m;
        }
        return 0.5 * (a + b);
    }
    throw std::domain_error("level not attained by interpolant");
}

double lagrange4(const double* values, std::ptrdiff_t stride, int n, double s) {
    int k = static_cast<int>(std::floor(s)) - 1;
    k = std::clamp(k, 0, n - 4);
    double t = s - k;
    double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    double w1 = t * (t - 2) * (t - 3) / 2.0;
    double w2 = -t * (t - 1) * (t - 3) / 2.0;
    double w3 = t * (t - 1) * (t - 2) / 6.0;
    return w0 * values[k * stride] + w1 * values[(k + 1) * stride] + w2 * values[(k + 2) * stride] +
           w3 * values[(k + 3) * stride];
}

double linear_interp(const double* values, std::ptrdiff_t stride, int n, double s) {
    int k = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    double t = s - k;
    return (1 - t) * values[k * stride] + t * values[(k + 1) * stride];
}

// ============================================================================
// BSpline2D
// ============================================================================

BSpline2D::BSpline2D(const Field2D& values, double dx, double y0, double dy)
    : nx_(values.nx), ny_(values.ny), dx_(dx), y0_(y0), dy_(dy),
      coef_(static_cast<size_t>(values.nx) * (values.ny + 2), 0.0) {
    if (nx_ < 4 || ny_ < 4) throw std::invalid_argument("spline grid too small");
    CyclicTridiagonal cyc(nx_, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);
    Field2D tmp = values;
    for (int j = 0; j < ny_; ++j) cyc.solve(tmp.row(j));

    const int m = ny_ - 2;
    std::vector<double> a(m, 1.0 / 6.0), b(m, 4.0 / 6.0), c(m, 1.0 / 6.0);
    TridiagonalLU lu(a, b, c);
    std::vector<double> col(m);
    for (int i = 0; i < nx_; ++i) {
        double f0 = tmp(i, 0), fn = tmp(i, ny_ - 1);
        for (int j = 1; j <= m; ++j) col[j - 1] = tmp(i, j);
        col[0] -= f0 / 6.0;
        col[m - 1] -= fn / 6.0;
        lu.solve(col.data());
        auto at = [&](int r) -> double& { return coef_[static_cast<size_t>(r) * nx_ + i]; };
        at(1) = f0;
        for (int j = 1; j <= m; ++j) at(j + 1) = col[j - 1];
        at(ny_) = fn;
        at(0) = 2.0 * f0 - at(2);
        at(ny_ + 1) = 2.0 * fn - at(ny_ - 1);
    }
}

double BSpline2D::eval(double X, double Y, bool deriv) const {
    double s = X / dx_;
    double fs = std::floor(s);
    double tx = s - fs;
    long i0 = static_cast<long>(fs);
    double r = (Y - y0_) / dy_;
    int j = std::clamp(static_cast<int>(std::floor(r)), 0, ny_ - 2);
    double ty = r - j;

    auto basis = [](double t, double* w) {
        double u = 1.0 - t;
        w[0] = u * u * u / 6.0;
        w[1] = (3 * t * t * t - 6 * t * t + 4) / 6.0;
        w[2] = (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0;
        w[3] = t * t * t / 6.0;
    };
    auto dbasis = [](double t, double* w) {
        double u = 1.0 - t;
        w[0] = -0.5 * u * u;
        w[1] = 1.5 * t * t - 2 * t;
        w[2] = -1.5 * t * t + t + 0.5;
        w[3] = 0.5 * t * t;
    };
    double wx[4], wy[4];
    basis(tx, wx);
    if (deriv)
        dbasis(ty, wy);
    else
        basis(ty, wy);
    int cols[4];
    for (int a = 0; a < 4; ++a) cols[a] = static_cast<int>((((i0 - 1 + a) % nx_) + nx_) % nx_);
    double sum = 0.0;
    for (int b = 0; b < 4; ++b) {
        const double* rowp = coef_.data() + static_cast<size_t>(j + b) * nx_;
        double rs = 0.0;
        for (int a = 0; a < 4; ++a) rs += wx[a] * rowp[cols[a]];
        sum += wy[b] * rs;
    }
    return deriv ? sum / dy_ : sum;
}

double BSpline2D::operator()(double X, double Y) const { return eval(X, Y, false); }
double BSpline2D::d_dY(double X, double Y) const { return eval(X, Y, true); }

// ============================================================================
// Fitting, ODE, minimization
// ============================================================================

LinearFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    const size_t n = t.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line needs >= 2 matching samples");
    double mt = 0.0, my = 0.0;
    for (size_t k = 0; k < n; ++k) {
        mt += t[k];
        my += y[k];
    }
    mt /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t k = 0; k < n; ++k) {
        sxx += (t[k] - mt) * (t[k] - mt);
        sxy += (t[k] - mt) * (y[k] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mt;
    double ssr = 0.0;
    for (size_t k = 0; k < n; ++k) {
        double e = y[k] - (fit.intercept + fit.slope * t[k]);
        ssr += e * e;
    }
    fit.rms_residual = std::sqrt(ssr / n);
    fit.slope_stderr = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    return fit;
}

State2 rk4_step(const Rhs2& rhs, double z, const State2& y, double h) {
    auto axpy = [](const State2& a, double s, const State2& b) { return State2{a[0] + s * b[0], a[1] + s * b[1]}; };
    State2 k1 = rhs(z, y);
    State2 k2 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k1));
    State2 k3 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k2));
    State2 k4 = rhs(z + h, axpy(y, h, k3));
    return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

State2 integrate_adaptive(const Rhs2& rhs, State2 y, double z0, double z1, double tol, double& h_try,
                          AdaptiveStats* stats) {
    double z = z0;
    const double span = z1 - z0;
    if (span <= 0.0) return y;
    double h = std::min(h_try, span);
    while (z1 - z > 1e-15 * std::max(1.0, std::abs(z1))) {
        h = std::min(h, z1 - z);
        State2 full = rk4_step(rhs, z, y, h);
        State2 half = rk4_step(rhs, z, y, 0.5 * h);
        half = rk4_step(rhs, z + 0.5 * h, half, 0.5 * h);
        double err = std::max(std::abs(half[0] - full[0]), std::abs(half[1] - full[1])) / 15.0;
        if (!std::isfinite(err)) throw std::runtime_error("non-finite value in adaptive integration");
        if (err <= tol) {
            z += h;
            y = half;
            if (stats) {
                ++stats->accepted;
                stats->max_local_error = std::max(stats->max_local_error, err);
            }
            h_try = h;
            double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
            h *= std::clamp(grow, 1.0, 4.0);
        } else {
            if (stats) ++stats->rejected;
            h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
            if (h < 1e-14 * std::max(1.0, std::abs(z))) throw std::runtime_error("adaptive step underflow");
        }
    }
    h_try = std::max(h_try, h);
    return y;
}

double golden_section_minimize(const std::function<double(double)>& g, double a, double b, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > tol) {
        if (gc <= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace conical
