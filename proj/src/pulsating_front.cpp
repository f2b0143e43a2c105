#include <algorithm>
#include <cmath>

#include "conical/pulsating_front.hpp"

namespace conical {

void PeriodicStripGrid::validate() const {
    if (!(period_L > 0.0)) throw ConfigError("strip period must be positive");
    if (nx < 16 || ny < 16) throw ConfigError("strip grid needs nx, ny >= 16");
    if (!(y_max > 0.0)) throw ConfigError("strip y_max must be positive");
}

// ============================================================================
// Operator
// ============================================================================

StripOperator::StripOperator(const PeriodicStripGrid& g, const DiffusionMatrix& m, const ShearFlow& flow,
                             double alpha)
    : grid(g), matrix(m), drift_coef(g.nx) {
    for (int i = 0; i < g.nx; ++i) drift_coef[i] = flow(g.X(i)) * std::sin(alpha);
}

void StripOperator::apply(const Field2D& u, const CombustionNonlinearity& f, Field2D& out) const {
    const int nx = grid.nx, ny = grid.ny;
    const double dx = grid.dx(), dy = grid.dy();
    const double cxx = matrix.xx / (dx * dx), cyy = matrix.yy / (dy * dy);
    const double cxy = 2.0 * matrix.xy / (4.0 * dx * dy);
    const double cy = 1.0 / (2.0 * dy);
    std::vector<double> ghost(nx);
    for (int i = 0; i < nx; ++i) ghost[i] = u(i, 1) - 2.0 * dy * kappa * u(i, 0);

    for (int j = 0; j < ny; ++j) {
        const double* um = j == 0 ? ghost.data() : u.row(j - 1);
        const double* u0 = u.row(j);
        const double* up = u.row(j + 1);
        double* o = out.row(j);
        for (int i = 0; i < nx; ++i) {
            int ip = i + 1 == nx ? 0 : i + 1;
            int im = i == 0 ? nx - 1 : i - 1;
            double uxx = u0[ip] - 2.0 * u0[i] + u0[im];
            double uyy = up[i] - 2.0 * u0[i] + um[i];
            double uxy = up[ip] - up[im] - um[ip] + um[im];
            double uy = up[i] - um[i];
            o[i] = cxx * uxx + cyy * uyy + cxy * uxy + (drift_coef[i] - c) * cy * uy + f(u0[i]);
        }
    }
    std::fill(out.row(ny), out.row(ny) + nx, 0.0);
}

namespace {

// Perron root of the periodic tridiagonal-plus-corner operator, by power iteration on a shift.
double principal_eigenvalue(double lo_off, double hi_off, const std::vector<double>& diag) {
    const int n = static_cast<int>(diag.size());
    double shift = lo_off + hi_off;
    for (double d : diag) shift = std::max(shift, lo_off + hi_off - d);
    std::vector<double> x(n, 1.0), y(n);
    double sigma = 0.0;
    for (int it = 0; it < 400000; ++it) {
        double sx = 0.0, sy = 0.0;
        for (int i = 0; i < n; ++i) {
            int ip = i + 1 == n ? 0 : i + 1, im = i == 0 ? n - 1 : i - 1;
            y[i] = lo_off * x[im] + hi_off * x[ip] + (diag[i] + shift) * x[i];
            sx += x[i];
            sy += y[i];
        }
        double next = sy / sx - shift;
        for (int i = 0; i < n; ++i) x[i] = y[i] / sy * n;
        if (it > 10 && std::abs(next - sigma) < 1e-15 * (1.0 + shift)) return next;
        sigma = next;
    }
    return sigma;
}

}  // namespace

double tail_rate(const DiffusionMatrix& m, const std::vector<double>& b, double dx, double c) {
    if (!(c > 0.0)) return 0.0;
    bool flat = true;
    for (double v : b) flat = flat && v == 0.0;
    if (flat) return c / m.yy;
    const double cxx = m.xx / (dx * dx);
    auto sigma = [&](double lam) {
        double cx = 2.0 * lam * m.xy / (2.0 * dx);
        std::vector<double> d(b.size());
        for (size_t i = 0; i < b.size(); ++i) d[i] = -2.0 * cxx + m.yy * lam * lam + lam * (b[i] - c);
        return principal_eigenvalue(cxx - cx, cxx + cx, d);
    };
    double lo = 0.25 * c / m.yy, hi = 2.0 * c / m.yy;
    while (sigma(lo) > 0.0 && lo > 1e-6 * c) lo *= 0.5;
    while (sigma(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (sigma(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Field2D strip_residual(const FrontProfile& profile, const DiffusionMatrix& matrix, const ShearFlow& flow,
                       const CombustionNonlinearity& f, double c) {
    StripOperator op(profile.grid, matrix, flow, profile.alpha);
    op.c = c;
    op.kappa = tail_rate(matrix, op.drift_coef, profile.grid.dx(), c);
    Field2D r = profile.grid.make_field();
    op.apply(profile.values, f, r);
    // the lower row carries the boundary closure; report interior rows only
    std::fill(r.row(0), r.row(0) + r.nx, 0.0);
    return r;
}

double residual_max_norm(const Field2D& r) {
    double m = 0.0;
    for (double x : r.v) m = std::max(m, std::abs(x));
    return m;
}

// ============================================================================
// Evolver
// ============================================================================

StripEvolver::StripEvolver(const PeriodicStripGrid& grid, const DiffusionMatrix& m, const ShearFlow& flow,
                           double alpha, const CombustionNonlinearity& f, double dt)
    : op_(grid, m, flow, alpha), f_(f), dt_(dt), u_(grid.make_field()), rhs_(grid.make_field()),
      column_(grid.ny) {
    grid.validate();
    const double r = dt * m.xx / (grid.dx() * grid.dx());
    x_solver_ = CyclicTridiagonal(grid.nx, -r, 1.0 + 2.0 * r, -r);
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) u_(i, j) = std::clamp(grid.Y(j) + 0.5, 0.0, 1.0);
    factor_y();
}

void StripEvolver::factor_y() {
    const auto& g = op_.grid;
    const int n = g.ny;
    const double dy = g.dy();
    const double cyy = op_.matrix.yy / (dy * dy);
    y_solvers_.clear();
    y_solvers_.reserve(g.nx);
    std::vector<double> a(n), b(n), c(n);
    for (int i = 0; i < g.nx; ++i) {
        double bi = op_.drift_coef[i] - op_.c;
        for (int j = 1; j < n; ++j) {
            a[j] = -dt_ * (cyy - bi / (2.0 * dy));
            b[j] = 1.0 + 2.0 * dt_ * cyy;
            c[j] = -dt_ * (cyy + bi / (2.0 * dy));
        }
        a[0] = 0.0;
        b[0] = 1.0 - dt_ * (-cyy * (2.0 + 2.0 * dy * op_.kappa) + bi * op_.kappa);
        c[0] = -dt_ * 2.0 * cyy;
        c[n - 1] = 0.0;
        y_solvers_.emplace_back(a, b, c);
    }
}

void StripEvolver::set_speed(double c) {
    op_.c = c;
    op_.kappa = tail_rate(op_.matrix, op_.drift_coef, op_.grid.dx(), c);
    factor_y();
}

void StripEvolver::set_state(const Field2D& u) {
    if (!u.same_shape(u_)) throw std::invalid_argument("strip state shape mismatch");
    u_ = u;
}

void StripEvolver::step() {
    const auto& g = op_.grid;
    op_.apply(u_, f_, rhs_);
    for (int j = 0; j < g.ny; ++j) {
        double* r = rhs_.row(j);
        for (int i = 0; i < g.nx; ++i) r[i] *= dt_;
        x_solver_.solve(r);
    }
    for (int i = 0; i < g.nx; ++i) y_solvers_[i].solve(rhs_.v.data() + i, g.nx);
    for (int j = 0; j < g.ny; ++j) {
        double* u = u_.row(j);
        const double* d = rhs_.row(j);
        for (int i = 0; i < g.nx; ++i) u[i] += d[i];
    }
}

void StripEvolver::advance(double time) {
    int n = static_cast<int>(std::lround(time / dt_));
    for (int k = 0; k < n; ++k) {
        step();
        if (k % 20 == 19 && std::abs(level_position()) > 1.0) recenter();
    }
}

double StripEvolver::level_position() const {
    const auto& g = op_.grid;
    double sum = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        int j = 0;
        while (j < g.ny && u_(i, j + 1) < 0.5) ++j;
        if (j >= g.ny || u_(i, j) >= 0.5) throw ConvergenceError("u = 1/2 level left the strip");
        double t = (0.5 - u_(i, j)) / (u_(i, j + 1) - u_(i, j));
        sum += g.Y(j) + t * g.dy();
    }
    return sum / g.nx;
}

double StripEvolver::recenter() {
    const auto& g = op_.grid;
    int k = static_cast<int>(std::lround(level_position() / g.dy()));
    if (k == 0) return 0.0;
    Field2D old = u_;
    for (int j = 0; j <= g.ny; ++j) {
        int s = j + k;
        for (int i = 0; i < g.nx; ++i) {
            if (s > g.ny)
                u_(i, j) = 1.0;
            else if (s < 0)
                u_(i, j) = old(i, 0) * std::exp(op_.kappa * s * g.dy());
            else
                u_(i, j) = old(i, s);
        }
    }
    return k * g.dy();
}

double StripEvolver::drift(double relax_time, double window_time) {
    advance(relax_time);
    recenter();
    const int n = std::max(20, static_cast<int>(std::lround(window_time / dt_)));
    std::vector<double> t(n), p(n);
    double offset = 0.0;
    for (int k = 0; k < n; ++k) {
        step();
        double pos = level_position();
        if (std::abs(pos) > 2.0) {
            offset += recenter();
            pos = level_position();
        }
        t[k] = (k + 1) * dt_;
        p[k] = pos + offset;
    }
    return -fit_line(t, p).slope;
}

double StripEvolver::settled_drift(double relax_time, double window_time, double tol, int max_windows) {
    double d = drift(relax_time, window_time);
    for (int k = 1; k < max_windows; ++k) {
        double next = drift(0.0, window_time);
        bool done = std::abs(next - d) <= std::max(tol, 0.1 * std::abs(next));
        d = next;
        if (done) break;
    }
    return d;
}

// ============================================================================
// Speed search
// ============================================================================

PulsatingResult solve_pulsating_front(const DiffusionMatrix& matrix, const ShearFlow& flow, double alpha,
                                      const CombustionNonlinearity& f, const PeriodicStripGrid& grid,
                                      const PulsatingOptions& opts) {
    grid.validate();
    if (grid.nx < 64 && !flow.is_zero()) throw ConfigError("strip grid must resolve the flow period (nx >= 64)");
    if (std::abs(grid.period_L - flow.period()) > 1e-12) throw ConfigError("strip period differs from flow period");

    double guess = opts.speed_guess ? *opts.speed_guess : planar_front_speed_1d(f).speed;
    StripEvolver ev(grid, matrix, flow, alpha, f, opts.dt);
    ev.set_speed(guess);
    ev.advance(opts.warmup_time);
    ev.recenter();

    PulsatingResult res;
    int evals = 0;
    auto measure = [&](double c) {
        if (evals >= opts.max_evaluations)
            throw ConvergenceError("speed search exceeded " + std::to_string(opts.max_evaluations) +
                                   " evaluations (drift oscillation; enlarge y_max)");
        ev.set_speed(c);
        double d = ev.settled_drift(opts.relax_time, opts.window_time, 0.5 * opts.drift_tol, opts.max_windows);
        ++evals;
        res.trials.push_back({c, d});
        return d;
    };

    double c0 = guess;
    double d0 = measure(c0);
    if (std::abs(d0) <= opts.drift_tol) {
        // probe both sides to certify the bracket
        double dl = measure(c0 - 0.5 * opts.speed_tol);
        double dr = measure(c0 + 0.5 * opts.speed_tol);
        if (dl > 0.0 && dr < 0.0) {
            res.speed = {c0, std::abs(d0), evals, opts.speed_tol, "frozen-frame drift, false position"};
        }
    }

    if (res.speed.method.empty()) {
        // bracket: drift is approximately c_true - c
        double step = std::max(opts.initial_step, 1.2 * std::abs(d0));
        double a = c0, da = d0;
        double b = c0 + (d0 > 0 ? step : -step);
        double db = measure(b);
        while (da * db > 0.0) {
            step *= 2.0;
            a = b;
            da = db;
            b = b + (db > 0 ? step : -step);
            db = measure(b);
        }
        if (a > b) {
            std::swap(a, b);
            std::swap(da, db);
        }
        // da > 0 > db
        int side = 0;
        double c_best = 0.5 * (a + b), d_best = INFINITY;
        while (true) {
            double c = (a * db - b * da) / (db - da);
            if (!(c > a && c < b)) c = 0.5 * (a + b);
            double d = measure(c);
            if (std::abs(d) < std::abs(d_best)) {
                c_best = c;
                d_best = d;
            }
            if (d > 0.0) {
                a = c;
                da = d;
                if (side == 1) db *= 0.5;
                side = 1;
            } else {
                b = c;
                db = d;
                if (side == -1) da *= 0.5;
                side = -1;
            }
            if (std::abs(d) <= opts.drift_tol && b - a > opts.speed_tol) {
                double lo = std::max(a, c - 0.5 * opts.speed_tol);
                double hi = std::min(b, c + 0.5 * opts.speed_tol);
                double dl = lo > a ? measure(lo) : da;
                if (dl > 0.0) a = lo, da = dl;
                double dr = hi < b ? measure(hi) : db;
                if (dr < 0.0) b = hi, db = dr;
            }
            if (b - a <= opts.speed_tol && std::abs(d_best) <= opts.drift_tol) break;
            if (b - a <= 1e-3 * opts.speed_tol) {
                if (std::abs(d_best) > opts.drift_tol)
                    throw ConvergenceError("drift does not vanish inside the speed bracket [" + std::to_string(a) +
                                           ", " + std::to_string(b) + "]: best drift " + std::to_string(d_best) +
                                           " after " + std::to_string(evals) + " trials");
                break;
            }
        }
        // final state corresponds to the best trial
        if (res.trials.back().c != c_best) d_best = measure(c_best);
        res.speed = {c_best, std::abs(d_best), evals, b - a, "frozen-frame drift, false position"};
    } else {
        ev.set_speed(c0);
        ev.drift(opts.relax_time, opts.window_time);
    }
    res.speed.iterations = evals;

    ev.recenter();
    res.profile.grid = grid;
    res.profile.values = ev.state();
    res.profile.variant = matrix.variant;
    res.profile.alpha = alpha;
    res.profile.speed = res.speed.c;
    res.residual_max = residual_max_norm(strip_residual(res.profile, matrix, flow, f, res.speed.c));
    return res;
}

// ============================================================================
// Normalization and symmetry
// ============================================================================

double column_level_crossing(const FrontProfile& profile, int i, double level) {
    const auto& g = profile.grid;
    std::vector<double> y, u;
    y.reserve(g.ny + 1);
    u.reserve(g.ny + 1);
    double running = -INFINITY;
    for (int j = 0; j <= g.ny; ++j) {
        // PCHIP needs a nondecreasing sequence; cap round-off dips
        running = std::max(running, profile.values(i, j));
        y.push_back(g.Y(j));
        u.push_back(running);
    }
    if (!(u.front() <= level && u.back() >= level))
        throw std::domain_error("level " + std::to_string(level) + " not attained on column " + std::to_string(i));
    return Pchip(y, u).inverse(level);
}

FrontProfile normalize_front(const FrontProfile& profile, double theta) {
    const auto& g = profile.grid;
    column_level_crossing(profile, 0, theta);  // existence check
    BSpline2D s(profile.values, g.dx(), -g.y_max, g.dy());

    int j = 0;
    while (j < g.ny && profile.values(0, j + 1) < theta) ++j;
    double lo = g.Y(j), hi = g.Y(std::min(j + 1, g.ny));
    if (s(0.0, lo) > theta) lo -= g.dy();
    if (s(0.0, hi) < theta) hi += g.dy();
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        double m = 0.5 * (lo + hi);
        if (s(0.0, m) < theta)
            lo = m;
        else
            hi = m;
    }
    const double shift = 0.5 * (lo + hi);

    FrontProfile out = profile;
    out.normalized = true;
    if (std::abs(shift) < 1e-13) return out;
    for (int jj = 0; jj <= g.ny; ++jj) {
        double y = g.Y(jj) + shift;
        for (int i = 0; i < g.nx; ++i) {
            if (y > g.y_max)
                out.values(i, jj) = 1.0;
            else if (y < -g.y_max)
                out.values(i, jj) = profile.values(i, 0) * std::exp(profile.speed * (y + g.y_max));
            else
                out.values(i, jj) = s(g.X(i), y);
        }
    }
    return out;
}

FrontProfile reflect_x(const FrontProfile& profile) {
    FrontProfile out = profile;
    const int nx = profile.grid.nx;
    for (int j = 0; j <= profile.grid.ny; ++j)
        for (int i = 0; i < nx; ++i) out.values(i, j) = profile.values((nx - i) % nx, j);
    out.variant = profile.variant == MatrixVariant::A ? MatrixVariant::B : MatrixVariant::A;
    return out;
}

bool check_speed_symmetry(const SpeedEstimate& cA, const SpeedEstimate& cB, double tol) {
    return std::abs(cA.c - cB.c) <= tol;
}

nlohmann::json speed_record(const PulsatingResult& r, const ShearFlow& flow) {
    const auto& g = r.profile.grid;
    return {{"variant", to_string(r.profile.variant)},
            {"alpha", r.profile.alpha},
            {"c", r.speed.c},
            {"residual", r.speed.residual},
            {"bracket", r.speed.bracket},
            {"iterations", r.speed.iterations},
            {"residual_max", r.residual_max},
            {"flow", flow.describe()},
            {"grid", {{"L", g.period_L}, {"nx", g.nx}, {"y_max", g.y_max}, {"ny", g.ny}}}};
}

}  // namespace conical
