#include <algorithm>
#include <cmath>

#include "conical/pulsating_front.hpp"

namespace conical {

nlohmann::json to_json(const SpeedEstimate& s) {
    return {{"c", s.c}, {"residual", s.residual}, {"iterations", s.iterations}, {"bracket", s.bracket},
            {"method", s.method}};
}

namespace {

double decay_rate_at_one(const CombustionNonlinearity& f, double c) {
    double fp = f.left_slope_at_one(1e-7);
    return 0.5 * (-c + std::sqrt(c * c - 4.0 * fp));
}

struct Shot {
    double mismatch;
    std::vector<double> U, p, Y;
};

// Integrates dp/dU = c - f(U)/p, dY/dU = 1/p from (theta, c theta) to 1 - tail_cut.
Shot shoot(const CombustionNonlinearity& f, double c, double step, double tail_cut, bool keep) {
    const double theta = f.theta();
    const double u_end = 1.0 - tail_cut;
    const double a = decay_rate_at_one(f, c);
    Rhs2 rhs = [&](double u, const State2& s) { return State2{c - f(u) / s[0], 1.0 / s[0]}; };
    State2 s{c * theta, 0.0};
    Shot out{0.0, {}, {}, {}};
    if (keep) {
        out.U.push_back(theta);
        out.p.push_back(s[0]);
        out.Y.push_back(0.0);
    }
    const double p_floor = 1e-3 * a * tail_cut;
    double u = theta;
    while (u_end - u > 1e-14) {
        // the tail near U = 1 is stiff and p may cross zero; keep the relative change of p small
        const double scale = step / 1e-4;
        double slope = std::abs(c - f(u) / s[0]);
        double h = std::min({step, 0.05 * scale * (1.0 - u), u_end - u});
        if (slope > 0.0) h = std::min(h, 0.05 * scale * s[0] / slope);
        State2 next = rk4_step(rhs, u, s, h);
        if (!(next[0] > p_floor) || !std::isfinite(next[0])) {
            // trajectory falls to p = 0 before U reaches 1: speed too small
            out.mismatch = -(u_end - u) - a * tail_cut;
            return out;
        }
        s = next;
        u += h;
        if (keep) {
            out.U.push_back(u);
            out.p.push_back(s[0]);
            out.Y.push_back(s[1]);
        }
    }
    out.mismatch = s[0] - a * tail_cut;
    return out;
}

struct Bisection {
    double c;
    double width;
    int iterations;
};

Bisection bisect_speed(const CombustionNonlinearity& f, const PlanarFrontOptions& opts, double step) {
    double lo = opts.c_min;
    double hi = opts.c_max > 0.0 ? opts.c_max : 2.0 * std::sqrt(f.lipschitz_bound()) + 1.0;
    double glo = shoot(f, lo, step, opts.tail_cut, false).mismatch;
    double ghi = shoot(f, hi, step, opts.tail_cut, false).mismatch;
    if (!(glo < 0.0 && ghi > 0.0))
        throw BracketError("shooting mismatch has no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    int it = 0;
    while (hi - lo > opts.speed_tol && it < 200) {
        double mid = 0.5 * (lo + hi);
        if (shoot(f, mid, step, opts.tail_cut, false).mismatch > 0.0)
            hi = mid;
        else
            lo = mid;
        ++it;
    }
    return {0.5 * (lo + hi), hi - lo, it};
}

}  // namespace

double planar_shooting_mismatch(const CombustionNonlinearity& f, double c, const PlanarFrontOptions& opts) {
    return shoot(f, c, opts.step, opts.tail_cut, false).mismatch;
}

PlanarFront planar_front_speed_1d(const CombustionNonlinearity& f, const PlanarFrontOptions& opts) {
    Bisection fine = bisect_speed(f, opts, opts.step);
    Bisection coarse = bisect_speed(f, opts, 2.0 * opts.step);

    PlanarFront pf;
    pf.speed = fine.c;
    pf.bracket = fine.width;
    pf.iterations = fine.iterations;
    pf.richardson_error = std::abs(fine.c - coarse.c) / 15.0;
    pf.theta = f.theta();
    pf.tail_cut = opts.tail_cut;
    pf.decay_rate = decay_rate_at_one(f, fine.c);

    Shot s = shoot(f, fine.c, opts.step, opts.tail_cut, true);
    pf.Y = std::move(s.Y);
    pf.U = std::move(s.U);
    pf.dU = std::move(s.p);
    return pf;
}

double PlanarFront::value(double y) const {
    if (y <= Y.front()) return theta * std::exp(speed * (y - Y.front()));
    if (y >= Y.back()) return 1.0 - tail_cut * std::exp(-decay_rate * (y - Y.back()));
    size_t k = static_cast<size_t>(std::upper_bound(Y.begin(), Y.end(), y) - Y.begin()) - 1;
    double h = Y[k + 1] - Y[k];
    return cubic_hermite(U[k], U[k + 1], dU[k], dU[k + 1], h, (y - Y[k]) / h);
}

double PlanarFront::derivative(double y) const {
    if (y <= Y.front()) return speed * theta * std::exp(speed * (y - Y.front()));
    if (y >= Y.back()) return decay_rate * tail_cut * std::exp(-decay_rate * (y - Y.back()));
    size_t k = static_cast<size_t>(std::upper_bound(Y.begin(), Y.end(), y) - Y.begin()) - 1;
    double h = Y[k + 1] - Y[k];
    return cubic_hermite_derivative(U[k], U[k + 1], dU[k], dU[k + 1], h, (y - Y[k]) / h);
}

SpeedEstimate PlanarFront::estimate() const {
    return {speed, richardson_error, iterations, bracket, "phase-plane shooting + bisection"};
}

}  // namespace conical
