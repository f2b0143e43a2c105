#include "conical/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace conical {

void PlaneGrid::validate(double alpha) const {
    if (nx < 16 || ny < 16) throw ConfigError("plane grid needs nx, ny >= 16");
    if (nx % 2 != 0) throw ConfigError("plane nx must be even so that x = 0 is a node");
    if (!(x_max > 0.0 && y_max > 0.0)) throw ConfigError("plane extents must be positive");
    if (!(x_max * std::abs(std::cos(alpha) / std::sin(alpha)) < y_max))
        throw ConfigError("plane extents too small: the cone boundary must exit through the lateral sides");
}

nlohmann::json to_json(const PlaneGrid& g) {
    return {{"x_max", g.x_max}, {"y_max", g.y_max}, {"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx()}, {"dy", g.dy()}};
}

// ============================================================================
// HProfile
// ============================================================================

namespace {

int uniform_cell(double z, double z0, double h, int n) {
    return std::clamp(static_cast<int>(std::floor((z - z0) / h)), 0, n - 2);
}

}  // namespace

double HProfile::h(double z) const {
    const int n = static_cast<int>(h_nodes.size());
    const double z0 = h_nodes.front(), dz = h_nodes[1] - h_nodes[0];
    int k = uniform_cell(z, z0, dz, n);
    return cubic_hermite(h_values[k], h_values[k + 1], h_derivative[k], h_derivative[k + 1], dz,
                         (z - h_nodes[k]) / dz);
}

double HProfile::H(double z) const {
    if (identity) return z;
    if (z <= 0.5 * theta) return 2.0 * z;
    if (z > h_nodes.back()) return h_values.back() + h_derivative.back() * (z - h_nodes.back());
    return h(z);
}

double HProfile::dH(double z) const {
    if (identity) return 1.0;
    if (z <= 0.5 * theta) return 2.0;
    if (z > h_nodes.back()) return h_derivative.back();
    const int n = static_cast<int>(h_nodes.size());
    const double z0 = h_nodes.front(), dz = h_nodes[1] - h_nodes[0];
    int k = uniform_cell(z, z0, dz, n);
    return cubic_hermite_derivative(h_values[k], h_values[k + 1], h_derivative[k], h_derivative[k + 1], dz,
                                    (z - h_nodes[k]) / dz);
}

double HProfile::d2H(double z) const {
    if (identity || z <= 0.5 * theta) return 0.0;
    if (z > h_nodes.back()) return 0.0;
    const int n = static_cast<int>(h_nodes.size());
    const double z0 = h_nodes.front(), dz = h_nodes[1] - h_nodes[0];
    int k = uniform_cell(z, z0, dz, n);
    double t = (z - h_nodes[k]) / dz;
    return (1 - t) * h_second[k] + t * h_second[k + 1];
}

HProfile integrate_h(double beta, double theta, const CombustionNonlinearity& f, const HOptions& opts) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
    if (opts.nodes < 4) throw std::invalid_argument("h mesh needs at least 4 nodes");
    HProfile p;
    p.beta = beta;
    p.theta = theta;
    const int n = opts.nodes;
    const double z0 = 0.5 * theta, dz = (2.0 - z0) / (n - 1);
    p.h_nodes.resize(n);
    p.h_values.resize(n);
    p.h_derivative.resize(n);
    p.h_second.resize(n);
    Rhs2 rhs = [&](double, const State2& s) { return State2{s[1], -f(s[0]) / beta}; };
    State2 s{theta, 2.0};
    double h_try = dz;
    for (int k = 0; k < n; ++k) {
        double z = k + 1 == n ? 2.0 : z0 + k * dz;
        if (k > 0) s = integrate_adaptive(rhs, s, p.h_nodes[k - 1], z, opts.tol, h_try, &p.stats);
        if (!std::isfinite(s[0]) || !std::isfinite(s[1])) throw std::runtime_error("h integration produced non-finite values");
        p.h_nodes[k] = z;
        p.h_values[k] = s[0];
        p.h_derivative[k] = s[1];
        p.h_second[k] = -f(s[0]) / beta;
    }
    return p;
}

HProfile extend_H(HProfile profile) {
    const int n = 4097;
    profile.z_nodes.resize(n);
    profile.H_values.resize(n);
    for (int k = 0; k < n; ++k) {
        double z = 2.0 * k / (n - 1);
        profile.z_nodes[k] = z;
        profile.H_values[k] = profile.H(z);
    }
    profile.extended = true;
    return profile;
}

HProfile identity_H() {
    HProfile p;
    p.identity = true;
    p.extended = true;
    p.beta = INFINITY;
    return p;
}

LemmaReport check_h_lemma(const HProfile& p) {
    LemmaReport r;
    r.min_forward_difference = INFINITY;
    for (size_t k = 0; k + 1 < p.h_values.size(); ++k)
        r.min_forward_difference = std::min(r.min_forward_difference, p.h_values[k + 1] - p.h_values[k]);
    r.h1 = p.H(1.0);
    r.h2 = p.H(2.0);
    HProfile e = p.extended ? p : extend_H(p);
    r.max_second_difference = -INFINITY;
    for (size_t k = 1; k + 1 < e.H_values.size(); ++k)
        r.max_second_difference =
            std::max(r.max_second_difference, e.H_values[k + 1] - 2.0 * e.H_values[k] + e.H_values[k - 1]);
    r.increasing = r.min_forward_difference > 0.0;
    r.h1_above_one = r.h1 > 1.0;
    r.h2_above_one = r.h2 > 1.0;
    r.concave = r.max_second_difference <= 1e-8;
    return r;
}

nlohmann::json to_json(const LemmaReport& r) {
    return {{"min_forward_difference", r.min_forward_difference},
            {"h1", r.h1},
            {"h2", r.h2},
            {"max_second_difference", r.max_second_difference},
            {"increasing", r.increasing},
            {"h1_above_one", r.h1_above_one},
            {"h2_above_one", r.h2_above_one},
            {"concave", r.concave},
            {"ok", r.ok()}};
}

double h_monotonicity_threshold(const CombustionNonlinearity& f) { return 0.5 * f.primitive(1.0); }

// ============================================================================
// Band constants
// ============================================================================

namespace {

struct RowStats {
    std::vector<double> sup, inf;
};

RowStats row_stats(const FrontProfile& p) {
    const auto& g = p.grid;
    RowStats s{std::vector<double>(g.ny + 1), std::vector<double>(g.ny + 1)};
    for (int j = 0; j <= g.ny; ++j) {
        const double* r = p.values.row(j);
        s.sup[j] = *std::max_element(r, r + g.nx);
        s.inf[j] = *std::min_element(r, r + g.nx);
    }
    return s;
}

// Largest Y with row value <= level (linear between rows).
double largest_level_below(const std::vector<double>& v, double level, const PeriodicStripGrid& g) {
    int jstar = -1;
    for (int j = 0; j <= g.ny; ++j)
        if (v[j] <= level) jstar = j;
    if (jstar < 0) throw std::domain_error("empty band: no row below level (enlarge y_max)");
    if (jstar == g.ny) return g.y_max;
    double t = (level - v[jstar]) / (v[jstar + 1] - v[jstar]);
    return g.Y(jstar) + std::clamp(t, 0.0, 1.0) * g.dy();
}

// Smallest Y with row value >= level.
double smallest_level_above(const std::vector<double>& v, double level, const PeriodicStripGrid& g) {
    int jstar = -1;
    for (int j = g.ny; j >= 0; --j)
        if (v[j] >= level) jstar = j;
    if (jstar < 0) throw std::domain_error("empty band: no row above level (enlarge y_max)");
    if (jstar == 0) return -g.y_max;
    double t = (level - v[jstar - 1]) / (v[jstar] - v[jstar - 1]);
    return g.Y(jstar - 1) + std::clamp(t, 0.0, 1.0) * g.dy();
}

// Minimum of the centered Y-derivative over Y in [a, b], including interpolated endpoint values.
double derivative_floor(const FrontProfile& p, double a, double b) {
    const auto& g = p.grid;
    if (!(b >= a)) throw std::domain_error("empty derivative band");
    auto d = [&](int i, int j) {
        j = std::clamp(j, 1, g.ny - 1);
        return (p.values(i, j + 1) - p.values(i, j - 1)) / (2.0 * g.dy());
    };
    auto at = [&](double y) {
        double s = (y + g.y_max) / g.dy();
        int j = std::clamp(static_cast<int>(std::floor(s)), 1, g.ny - 2);
        double t = s - j;
        double m = INFINITY;
        for (int i = 0; i < g.nx; ++i) m = std::min(m, (1 - t) * d(i, j) + t * d(i, j + 1));
        return m;
    };
    double m = std::min(at(a), at(b));
    for (int j = 1; j < g.ny; ++j) {
        double y = g.Y(j);
        if (y < a || y > b) continue;
        for (int i = 0; i < g.nx; ++i) m = std::min(m, d(i, j));
    }
    return m;
}

}  // namespace

BandConstants measure_band_constants(const FrontProfile& phi, const FrontProfile& psi, double theta, double alpha) {
    if (!phi.normalized || !psi.normalized) throw std::invalid_argument("band constants need normalized fronts");
    RowStats a = row_stats(phi), b = row_stats(psi);
    BandConstants k;
    k.M1 = largest_level_below(a.sup, 0.5 * theta, phi.grid);
    k.M2 = largest_level_below(b.sup, 0.5 * theta, psi.grid);
    k.M3 = smallest_level_above(a.inf, 0.5, phi.grid);
    k.M4 = smallest_level_above(b.inf, 0.5, psi.grid);
    k.M0 = largest_level_below(a.sup, 0.25 * theta, phi.grid);
    k.M0_prime = largest_level_below(b.sup, 0.25 * theta, psi.grid);
    k.mu = std::min(derivative_floor(phi, k.M1, k.M3), derivative_floor(psi, k.M2, k.M4));
    k.mu0 = std::min(derivative_floor(phi, k.M0, k.M1), derivative_floor(psi, k.M0_prime, k.M2));
    k.beta = choose_beta(k, alpha);
    return k;
}

double choose_beta(const BandConstants& c, double alpha) {
    double s2 = std::sin(alpha) * std::sin(alpha);
    return std::min(4.0 * c.mu * c.mu * s2, c.mu0 * c.mu0 * s2);
}

nlohmann::json to_json(const BandConstants& b) {
    return {{"M0", b.M0}, {"M0_prime", b.M0_prime}, {"M1", b.M1}, {"M2", b.M2}, {"M3", b.M3},
            {"M4", b.M4}, {"mu", b.mu},           {"mu0", b.mu0}, {"beta", b.beta}};
}

// ============================================================================
// Components and barriers
// ============================================================================

Components build_components(const FrontProfile& phi, const FrontProfile& psi, double alpha, const PlaneGrid& grid) {
    const auto& gp = phi.grid;
    const auto& gq = psi.grid;
    BSpline2D sp(phi.values, gp.dx(), -gp.y_max, gp.dy());
    BSpline2D sq(psi.values, gq.dx(), -gq.y_max, gq.dy());
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    Components c{grid.make_field(), grid.make_field(), grid.make_field(), grid.make_field()};
    for (int j = 0; j <= grid.ny; ++j) {
        for (int i = 0; i <= grid.nx; ++i) {
            double x = grid.x(i), y = grid.y(j);
            double Y = x * ca + y * sa, Yp = -x * ca + y * sa;
            if (std::abs(Y) > gp.y_max || std::abs(Yp) > gq.y_max)
                throw std::domain_error("rotated coordinate exits the strip: strip y_max too small for the plane");
            double X1 = x - gp.period_L * std::floor(x / gp.period_L);
            double X2 = x - gq.period_L * std::floor(x / gq.period_L);
            c.phi1(i, j) = sp(X1, Y);
            c.phi2(i, j) = sq(X2, Yp);
            c.dphi1(i, j) = sp.d_dY(X1, Y);
            c.dphi2(i, j) = sq.d_dY(X2, Yp);
        }
    }
    return c;
}

Field2D build_subsolution(const Field2D& phi1, const Field2D& phi2) {
    if (!phi1.same_shape(phi2)) throw std::invalid_argument("component shapes differ");
    Field2D s = phi1;
    for (size_t k = 0; k < s.v.size(); ++k) s.v[k] = std::max(phi1.v[k], phi2.v[k]);
    return s;
}

Field2D build_supersolution(const HProfile& H, const Field2D& phi1, const Field2D& phi2, int* clamped) {
    if (!phi1.same_shape(phi2)) throw std::invalid_argument("component shapes differ");
    Field2D s = phi1;
    int count = 0;
    for (size_t k = 0; k < s.v.size(); ++k) {
        double z = phi1.v[k] + phi2.v[k];
        if (z < -1e-8 || z > 2.0 + 1e-8)
            throw std::domain_error("supersolution argument " + std::to_string(z) + " outside [0,2]");
        if (z < 0.0 || z > 2.0) {
            ++count;
            z = std::clamp(z, 0.0, 2.0);
        }
        s.v[k] = H.H(z);
    }
    if (count > 0) std::clog << "warning: clamped " << count << " supersolution arguments to [0,2]\n";
    if (clamped) *clamped = count;
    return s;
}

std::string to_string(Region r) {
    switch (r) {
        case Region::C: return "C";
        case Region::Z: return "Z";
        default: return "H";
    }
}

Region classify_region(double x, double y, const BandConstants& k, double alpha) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    double Y = x * ca + y * sa, Yp = -x * ca + y * sa;
    if (Y <= k.M1 && Yp <= k.M2) return Region::C;
    if (Y >= k.M3 && Yp >= k.M4) return Region::H;
    return Region::Z;
}

Field2D residual(const Field2D& u, double c, const ShearFlow& flow, const CombustionNonlinearity& f,
                 const PlaneGrid& grid) {
    Field2D r = grid.make_field();
    const double dx = grid.dx(), dy = grid.dy();
    const double ix2 = 1.0 / (dx * dx), iy2 = 1.0 / (dy * dy), iy = 1.0 / (2.0 * dy);
    std::vector<double> q(grid.nx + 1);
    for (int i = 0; i <= grid.nx; ++i) q[i] = flow(grid.x(i));
    for (int j = 1; j < grid.ny; ++j) {
        for (int i = 1; i < grid.nx; ++i) {
            double u0 = u(i, j);
            r(i, j) = (u(i + 1, j) - 2 * u0 + u(i - 1, j)) * ix2 + (u(i, j + 1) - 2 * u0 + u(i, j - 1)) * iy2 +
                      (q[i] - c) * (u(i, j + 1) - u(i, j - 1)) * iy + f(u0);
        }
    }
    return r;
}

double calibrate_discretization(const PlanarFront& oracle, const CombustionNonlinearity& f, const PlaneGrid& grid) {
    Field2D u = grid.make_field();
    for (int j = 0; j <= grid.ny; ++j) {
        double v = oracle.value(grid.y(j));
        for (int i = 0; i <= grid.nx; ++i) u(i, j) = v;
    }
    Field2D r = residual(u, oracle.speed, ShearFlow::zero(1.0), f, grid);
    return residual_max_norm(r);
}

// ============================================================================
// Case certification
// ============================================================================

int CaseReport::residual_violations() const {
    int n = 0;
    for (const auto& r : regions) n += r.violations;
    return n;
}

bool CaseReport::ok() const {
    return residual_violations() == 0 && case2_derivative_violations == 0 && case3_reaction_nonzero == 0;
}

nlohmann::json to_json(const CaseReport& r) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& s : r.regions)
        regions.push_back({{"region", s.name},
                           {"nodes", s.nodes},
                           {"max_residual", s.nodes ? s.max_residual : 0.0},
                           {"violations", s.violations}});
    return {{"eps", r.eps},
            {"regions", regions},
            {"case2_derivative_violations", r.case2_derivative_violations},
            {"case3_reaction_nonzero", r.case3_reaction_nonzero},
            {"c_outside_E1", r.c_outside_E1},
            {"residual_violations", r.residual_violations()},
            {"ok", r.ok()}};
}

CaseReport certify_supersolution_cases(const Field2D& super, const Components& comp, const BandConstants& k,
                                       const HProfile& H, const Field2D& res, const CombustionNonlinearity& f,
                                       const PlaneGrid& grid, double alpha, double eps) {
    CaseReport rep;
    rep.eps = eps;
    rep.regions = {{"C1a", 0, -INFINITY, 0}, {"C1b", 0, -INFINITY, 0}, {"Z", 0, -INFINITY, 0}, {"H", 0, -INFINITY, 0}};
    const double theta = f.theta();
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double band_slack = std::max(grid.dx(), grid.dy());
    for (int j = 1; j < grid.ny; ++j) {
        for (int i = 1; i < grid.nx; ++i) {
            double x = grid.x(i), y = grid.y(j);
            Region reg = classify_region(x, y, k, alpha);
            double z = comp.phi1(i, j) + comp.phi2(i, j);
            RegionStats* s = nullptr;
            if (reg == Region::C) {
                s = H.H(z) <= theta ? &rep.regions[0] : &rep.regions[1];
                double Y = x * ca + y * sa, Yp = -x * ca + y * sa;
                bool deep = Y <= k.M1 - band_slack && Yp <= k.M2 - band_slack;
                if (deep && z > theta) ++rep.c_outside_E1;
            } else if (reg == Region::Z) {
                s = &rep.regions[2];
                if (comp.dphi1(i, j) < k.mu || comp.dphi2(i, j) < k.mu) ++rep.case2_derivative_violations;
            } else {
                s = &rep.regions[3];
                if (f(super(i, j)) != 0.0) ++rep.case3_reaction_nonzero;
            }
            ++s->nodes;
            s->max_residual = std::max(s->max_residual, res(i, j));
            if (res(i, j) > eps) ++s->violations;
        }
    }
    return rep;
}

}  // namespace conical
