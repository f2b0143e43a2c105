#include "conical/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace conical {

std::string to_string(TimeScheme s) { return s == TimeScheme::douglas_adi ? "douglas_adi" : "lod_monotone"; }

TimeScheme parse_time_scheme(const std::string& s) {
    if (s == "douglas_adi") return TimeScheme::douglas_adi;
    if (s == "lod_monotone") return TimeScheme::lod_monotone;
    throw ConfigError("unknown time scheme '" + s + "'");
}

std::string to_string(LateralBC b) {
    switch (b) {
        case LateralBC::arm_extrapolated: return "arm_extrapolated";
        case LateralBC::arm_periodic: return "arm_periodic";
        default: return "neumann";
    }
}

LateralBC parse_lateral_bc(const std::string& s) {
    if (s == "arm_extrapolated") return LateralBC::arm_extrapolated;
    if (s == "arm_periodic") return LateralBC::arm_periodic;
    if (s == "neumann") return LateralBC::neumann;
    throw ConfigError("unknown lateral boundary condition '" + s + "'");
}

// ============================================================================
// PlaneEvolver
// ============================================================================

PlaneEvolver::PlaneEvolver(const Field2D& initial, const ShearFlow& flow, const CombustionNonlinearity& f,
                           const EvolveOptions& opts)
    : flow_(flow), f_(f), opts_(opts) {
    const auto& g = opts.grid;
    g.validate(opts.alpha);
    if (initial.nx != g.nx + 1 || initial.ny != g.ny + 1) throw std::invalid_argument("initial field does not match grid");
    if (!(opts.dt > 0.0)) throw ConfigError("dt must be positive");
    st_.grid = g;
    st_.u = initial;
    st_.dt = opts.dt;
    st_.c_frame = opts.c_frame;
    q_.resize(g.nx + 1);
    for (int i = 0; i <= g.nx; ++i) q_[i] = flow(g.x(i));
    double cells = flow.period() / g.dx();
    wall_offset_ = static_cast<int>(std::lround(cells));
    if (opts.lateral == LateralBC::arm_periodic && std::abs(cells - wall_offset_) > 1e-9)
        throw ConfigError("arm-periodic walls need the flow period to be a whole number of cells");
    if (wall_offset_ >= g.nx) throw ConfigError("plane must span more than one flow period");
    tail_matrix_ = diffusion_matrix(opts.alpha, MatrixVariant::A);
    tail_b_.resize(wall_offset_);
    tail_dx_ = flow.period() / wall_offset_;
    for (int k = 0; k < wall_offset_; ++k) tail_b_[k] = flow(k * tail_dx_) * std::sin(opts.alpha);
    rhs_ = g.make_field();
    ya_ = ycp_ = yinv_ = g.make_field();
    row_.resize(g.nx + 1);
    const double r = opts.dt / (g.dx() * g.dx());
    const int m = g.nx - 1;
    x_solver_ = TridiagonalLU(std::vector<double>(m, -r), std::vector<double>(m, 1.0 + 2.0 * r),
                              std::vector<double>(m, -r));
    for (auto& v : st_.u.v) v = std::clamp(v, 0.0, 1.0);
    for (int i = 0; i <= g.nx; ++i) st_.u(i, g.ny) = 1.0;
    factor();
    apply_lateral();
}

void PlaneEvolver::factor() {
    const auto& g = st_.grid;
    const double sa = std::sin(opts_.alpha);
    // arm tails decay like exp(lambda_A (x cos a + y sin a)); lambda_A at the strip speed c sin a
    const double cs = st_.c_frame * sa;
    if (std::isnan(tail_c_) || std::abs(cs - tail_c_) > 1e-3) {
        tail_c_ = cs;
        tail_lam_ = tail_rate(tail_matrix_, tail_b_, tail_dx_, cs);
        tail_slope_ = (tail_rate(tail_matrix_, tail_b_, tail_dx_, cs + 1e-4) - tail_lam_) / 1e-4;
    }
    kappa_ = std::max(0.0, (tail_lam_ + tail_slope_ * (cs - tail_c_)) * sa);
    const double dy = g.dy(), dt = st_.dt;
    const double cyy = 1.0 / (dy * dy);
    const int n = g.ny;
    for (int i = 1; i < g.nx; ++i) {
        double b = q_[i] - st_.c_frame;
        double prev_cp = 0.0;
        for (int j = 0; j < n; ++j) {
            double a, d, c;
            if (j == 0) {
                a = 0.0;
                d = 1.0 - dt * (-cyy * (2.0 + 2.0 * dy * kappa_) + b * kappa_);
                c = -dt * 2.0 * cyy;
            } else {
                a = -dt * (cyy - b / (2.0 * dy));
                d = 1.0 + 2.0 * dt * cyy;
                c = j == n - 1 ? 0.0 : -dt * (cyy + b / (2.0 * dy));
            }
            double den = d - a * prev_cp;
            ya_(i, j) = a;
            yinv_(i, j) = 1.0 / den;
            ycp_(i, j) = c / den;
            prev_cp = ycp_(i, j);
        }
    }
}

void PlaneEvolver::set_frame_speed(double c) {
    if (c == st_.c_frame) return;
    st_.c_frame = c;
    factor();
}

double PlaneEvolver::tail_value(int i, double s) const {
    return st_.u(i, 0) * std::exp(kappa_ * s * st_.grid.dy());
}

double PlaneEvolver::column_level(int i) const {
    const auto& g = st_.grid;
    const auto& u = st_.u;
    int j = 0;
    while (j < g.ny && u(i, j + 1) < 0.5) ++j;
    if (j >= g.ny || u(i, j) >= 0.5) return NAN;
    double t = (0.5 - u(i, j)) / (u(i, j + 1) - u(i, j));
    if (j >= 1 && j + 2 <= g.ny) {
        // Newton on the cubic through rows j-1 .. j+2
        const double* base = u.v.data() + i;
        const std::ptrdiff_t stride = u.nx;
        const int n = g.ny + 1;
        for (int it = 0; it < 8; ++it) {
            double s = j + t;
            double v = lagrange4(base, stride, n, s) - 0.5;
            double d = (lagrange4(base, stride, n, s + 1e-4) - lagrange4(base, stride, n, s - 1e-4)) / 2e-4;
            if (!(d > 0.0)) break;
            double step = v / d;
            t = std::clamp(t - step, 0.0, 1.0);
            if (std::abs(step) < 1e-12) break;
        }
    }
    return g.y(j) + t * g.dy();
}

// Arm displacement s along an oblique arm obeys s'' - c cos(alpha) s' = 0 to leading order,
// so s = A + B exp(-lambda |x|) with lambda = c cot(alpha). The level drop over the wall
// period is the drop over the next period scaled by exp(-lambda L).
double PlaneEvolver::wall_defect(int sign) const {
    const auto& g = st_.grid;
    const double L = flow_.period();
    const double arm = L * std::cos(opts_.alpha) / std::sin(opts_.alpha);
    auto col = [&](int k) { return sign > 0 ? g.nx - k * wall_offset_ : k * wall_offset_; };
    if (2 * wall_offset_ > g.nx / 2 || std::abs(std::cos(opts_.alpha)) < 1e-12) return 0.0;
    double y1 = column_level(col(1)), y2 = column_level(col(2));
    if (!std::isfinite(y1) || !std::isfinite(y2)) return 0.0;
    double lambda = std::abs(st_.c_frame * std::cos(opts_.alpha) / std::sin(opts_.alpha));
    return (y2 - y1 - arm) * std::exp(-lambda * L);
}

void PlaneEvolver::apply_lateral() {
    const auto& g = st_.grid;
    auto& u = st_.u;
    if (opts_.lateral == LateralBC::neumann) {
        for (int j = 0; j <= g.ny; ++j) {
            u(0, j) = u(1, j);
            u(g.nx, j) = u(g.nx - 1, j);
        }
        return;
    }
    const double arm = flow_.period() * std::cos(opts_.alpha) / std::sin(opts_.alpha);
    if (opts_.lateral == LateralBC::arm_extrapolated) {
        last_defect_[0] = wall_defect(-1);
        last_defect_[1] = wall_defect(+1);
    }
    const bool cubic = opts_.scheme == TimeScheme::douglas_adi;
    const std::ptrdiff_t stride = u.nx;
    const int n = g.ny + 1;
    auto sample = [&](int col, double s) {
        if (s >= g.ny) return 1.0;
        if (s < 0.0) return tail_value(col, s);
        const double* base = u.v.data() + col;
        double v = cubic ? lagrange4(base, stride, n, s) : linear_interp(base, stride, n, s);
        return std::clamp(v, 0.0, 1.0);
    };
    const int left_src = wall_offset_, right_src = g.nx - wall_offset_;
    const double sl = (arm + last_defect_[0]) / g.dy(), sr = (arm + last_defect_[1]) / g.dy();
    for (int j = 0; j <= g.ny; ++j) {
        u(0, j) = sample(left_src, j + sl);
        u(g.nx, j) = sample(right_src, j + sr);
    }
}

void PlaneEvolver::step_douglas() {
    const auto& g = st_.grid;
    auto& u = st_.u;
    const double dt = st_.dt;
    const double dx = g.dx(), dy = g.dy();
    const double ix2 = 1.0 / (dx * dx), iy2 = 1.0 / (dy * dy), iy = 1.0 / (2.0 * dy);
    const int nx = g.nx, ny = g.ny;

    for (int j = 0; j < ny; ++j) {
        const double* u0 = u.row(j);
        const double* up = u.row(j + 1);
        const double* um = j > 0 ? u.row(j - 1) : nullptr;
        double* r = rhs_.row(j);
        for (int i = 1; i < nx; ++i) {
            double below = um ? um[i] : up[i] - 2.0 * dy * kappa_ * u0[i];
            double lap = (u0[i + 1] - 2.0 * u0[i] + u0[i - 1]) * ix2 + (up[i] - 2.0 * u0[i] + below) * iy2;
            r[i] = dt * (lap + (q_[i] - st_.c_frame) * (up[i] - below) * iy + f_(u0[i]));
        }
        x_solver_.solve(r + 1);
    }
    // batched y sweeps
    for (int i = 1; i < nx; ++i) rhs_(i, 0) *= yinv_(i, 0);
    for (int j = 1; j < ny; ++j) {
        double* x = rhs_.row(j);
        const double* xm = rhs_.row(j - 1);
        const double* a = ya_.row(j);
        const double* inv = yinv_.row(j);
        for (int i = 1; i < nx; ++i) x[i] = (x[i] - a[i] * xm[i]) * inv[i];
    }
    for (int j = ny - 2; j >= 0; --j) {
        double* x = rhs_.row(j);
        const double* xp = rhs_.row(j + 1);
        const double* cp = ycp_.row(j);
        for (int i = 1; i < nx; ++i) x[i] -= cp[i] * xp[i];
    }
    for (int j = 0; j < ny; ++j) {
        double* uu = u.row(j);
        const double* d = rhs_.row(j);
        for (int i = 1; i < nx; ++i) uu[i] += d[i];
    }
}

void PlaneEvolver::step_lod() {
    const auto& g = st_.grid;
    auto& u = st_.u;
    const double dt = st_.dt;
    const double dx = g.dx(), dy = g.dy();
    const int nx = g.nx, ny = g.ny;
    const double r = dt / (dx * dx);
    for (int j = 0; j < ny; ++j) {
        const double* u0 = u.row(j);
        double* w = rhs_.row(j);
        for (int i = 1; i < nx; ++i) w[i] = u0[i] + dt * f_(u0[i]);
        w[1] += r * u0[0];
        w[nx - 1] += r * u0[nx];
        x_solver_.solve(w + 1);
    }
    const double cyy = 1.0 / (dy * dy);
    for (int i = 1; i < nx; ++i) rhs_(i, ny - 1) += dt * (cyy + (q_[i] - st_.c_frame) / (2.0 * dy));
    for (int i = 1; i < nx; ++i) rhs_(i, 0) *= yinv_(i, 0);
    for (int j = 1; j < ny; ++j) {
        double* x = rhs_.row(j);
        const double* xm = rhs_.row(j - 1);
        for (int i = 1; i < nx; ++i) x[i] = (x[i] - ya_(i, j) * xm[i]) * yinv_(i, j);
    }
    for (int j = ny - 2; j >= 0; --j) {
        double* x = rhs_.row(j);
        const double* xp = rhs_.row(j + 1);
        for (int i = 1; i < nx; ++i) x[i] -= ycp_(i, j) * xp[i];
    }
    for (int j = 0; j < ny; ++j) {
        double* uu = u.row(j);
        const double* d = rhs_.row(j);
        for (int i = 1; i < nx; ++i) uu[i] = d[i];
    }
}

void PlaneEvolver::step() {
    if (opts_.scheme == TimeScheme::douglas_adi)
        step_douglas();
    else
        step_lod();
    apply_lateral();
    auto& u = st_.u;
    for (auto& v : u.v) {
        if (v < -1e-12 || v > 1.0 + 1e-12) ++st_.clipped;
        v = std::clamp(v, 0.0, 1.0);
    }
    st_.t += st_.dt;
    st_.frame_shift += st_.c_frame * st_.dt;
}

double PlaneEvolver::level_position() const {
    double p = column_level(st_.grid.nx / 2);
    if (!std::isfinite(p)) throw DomainError("u = 1/2 level not found on x = 0");
    return p;
}

void PlaneEvolver::shift_cells(int k) {
    if (k == 0) return;
    const auto& g = st_.grid;
    Field2D old = st_.u;
    for (int j = 0; j <= g.ny; ++j) {
        int s = j + k;
        for (int i = 0; i <= g.nx; ++i) {
            if (s > g.ny)
                st_.u(i, j) = 1.0;
            else if (s < 0)
                st_.u(i, j) = old(i, 0) * std::exp(kappa_ * s * g.dy());
            else
                st_.u(i, j) = old(i, s);
        }
    }
    st_.frame_shift -= k * g.dy();
}

// ============================================================================
// evolve
// ============================================================================

EvolveResult evolve(const Field2D& initial, const ShearFlow& flow, const CombustionNonlinearity& f,
                    const EvolveOptions& opts) {
    PlaneEvolver ev(initial, flow, f, opts);
    const auto& g = opts.grid;
    const int steps_per_check = std::max(1, static_cast<int>(std::lround(opts.check_interval / opts.dt)));
    const double dt_check = steps_per_check * opts.dt;

    EvolveResult res;
    // initial data without a 1/2 level on x = 0: evolve in the fixed frame until one forms
    while (!std::isfinite(ev.column_level(g.nx / 2))) {
        if (ev.state().t >= opts.t_max - 1e-9) throw DomainError("u = 1/2 level never formed on x = 0");
        for (int k = 0; k < steps_per_check; ++k) ev.step();
        res.steps += steps_per_check;
    }
    res.level_wait = ev.state().t;
    double p_prev = ev.level_position();
    if (p_prev < -g.y_max + opts.boundary_margin || p_prev > g.y_max - opts.boundary_margin) {
        int k = static_cast<int>(std::lround((p_prev - opts.target_y) / g.dy()));
        ev.shift_cells(k);
        p_prev -= k * g.dy();
    }
    Field2D prev = ev.state().u;
    double c_est = opts.c_frame;
    bool have_est = false;
    int good = 0;
    std::vector<double> history;  // c_est at every check
    double measure_from = -1.0;
    long steps = res.steps;
    if (opts.observer) opts.observer(ev.state());

    while (ev.state().t < opts.t_max - 1e-9) {
        const double c_used = ev.state().c_frame;
        for (int k = 0; k < steps_per_check; ++k) ev.step();
        steps += steps_per_check;
        const auto& st = ev.state();

        double p = ev.level_position();
        if (p < -g.y_max + opts.boundary_margin || p > g.y_max - opts.boundary_margin)
            throw DomainError("u = 1/2 level reached the domain boundary (y = " + std::to_string(p) + ")");
        res.trace.times.push_back(st.t);
        res.trace.level_positions.push_back(p - st.frame_shift);
        res.trace.frame_shifts.push_back(st.frame_shift);

        double change = max_abs_difference(st.u, prev) / dt_check;
        double c_meas = c_used - (p - p_prev) / dt_check;
        c_est = have_est ? c_est + 0.3 * (c_meas - c_est) : c_meas;
        have_est = true;
        history.push_back(c_est);
        res.final_change_rate = change;

        // speed stable across the whole window, not just between neighbouring checks
        const size_t w = static_cast<size_t>(opts.consecutive_checks);
        bool calm = change < opts.change_tol && history.size() > w &&
                    std::abs(c_est - history[history.size() - 1 - w]) < opts.speed_tol;
        good = calm ? good + 1 : 0;

        if (opts.adaptive_frame) ev.set_frame_speed(c_est - opts.frame_gain * (p - opts.target_y));
        if (std::abs(p - opts.target_y) > opts.recenter_distance) {
            int k = static_cast<int>(std::lround((p - opts.target_y) / g.dy()));
            ev.shift_cells(k);
            p -= k * g.dy();
            if (measure_from < 0.0) good = 0;
        }
        p_prev = p;
        prev = ev.state().u;
        if (opts.observer) opts.observer(ev.state());

        if (measure_from < 0.0 && good >= opts.consecutive_checks && st.t >= opts.t_min) {
            // converged: the speed is measured on a fresh trace
            measure_from = st.t;
            res.trace = SpeedTrace{};
            if (opts.measure_time <= 0.0) {
                res.converged = true;
                break;
            }
        }
        if (measure_from >= 0.0 && st.t >= measure_from + opts.measure_time - 1e-9) {
            res.converged = true;
            break;
        }
    }

    const auto& st = ev.state();
    res.steady = st.u;
    res.clipped = st.clipped;
    res.c_frame = st.c_frame;
    res.t_end = st.t;
    res.steps = steps;
    res.measure_start = measure_from;
    if (st.clipped > 0) std::clog << "warning: clipped " << st.clipped << " values to [0,1] during evolution\n";
    try {
        res.speed = measure_speed(res.trace);
        res.trace.fitted_speed = res.speed.c;
        res.trace.fit_residual = res.speed.residual;
    } catch (const std::exception& e) {
        res.message = e.what();
    }
    const size_t n = res.trace.times.size();
    if (n >= 4) {
        std::vector<double> t(res.trace.times.begin() + n / 2, res.trace.times.end());
        std::vector<double> s(res.trace.frame_shifts.begin() + n / 2, res.trace.frame_shifts.end());
        res.shift_speed = fit_line(t, s).slope;
    }
    if (!res.converged && res.message.empty())
        res.message = "no convergence within t_max = " + std::to_string(opts.t_max);
    return res;
}

nlohmann::json to_json(const EvolveResult& r) {
    return {{"speed", to_json(r.speed)},
            {"shift_speed", r.shift_speed},
            {"converged", r.converged},
            {"final_change_rate", r.final_change_rate},
            {"clipped", r.clipped},
            {"c_frame", r.c_frame},
            {"t_end", r.t_end},
            {"steps", r.steps},
            {"level_wait", r.level_wait},
            {"measure_start", r.measure_start},
            {"samples", r.trace.times.size()},
            {"message", r.message}};
}

SpeedEstimate measure_speed(const SpeedTrace& trace) {
    const size_t n = trace.times.size();
    if (n < 20 || trace.level_positions.size() != n)
        throw std::invalid_argument("measure_speed needs at least 20 samples");
    std::vector<double> t(trace.times.begin() + n / 2, trace.times.end());
    std::vector<double> y(trace.level_positions.begin() + n / 2, trace.level_positions.end());
    LinearFit fit = fit_line(t, y);
    double travelled = std::abs(y.back() - y.front());
    if (fit.rms_residual > 1e-2 * travelled)
        throw ConvergenceError("nonlinear trace: fit residual " + std::to_string(fit.rms_residual) +
                               " exceeds 1% of the traversed distance");
    return {std::abs(fit.slope), fit.rms_residual, static_cast<int>(t.size()), 2.0 * fit.slope_stderr,
            "least-squares fit of the u=1/2 level, last half of samples"};
}

nlohmann::json to_json(const FormulaReport& r) {
    return {{"expected", r.expected}, {"measured", r.measured}, {"rel_error", r.rel_error}, {"tol", r.tol},
            {"pass", r.pass}};
}

FormulaReport compare_speed_formula(const SpeedEstimate& measured, const SpeedEstimate& cA, double alpha,
                                    double tol) {
    FormulaReport r;
    r.expected = cA.c / std::sin(alpha);
    r.measured = measured.c;
    r.rel_error = std::abs(measured.c - r.expected) / r.expected;
    r.tol = tol;
    r.pass = std::abs(measured.c - r.expected) <= tol * r.expected;
    return r;
}

}  // namespace conical
