#include "conical/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conical {

using nlohmann::json;

json to_json(const VerificationReport& r) {
    json j = {{"check", r.check_name},
              {"pass", r.pass},
              {"worst_violation", r.worst_violation},
              {"location", {{"x", r.x}, {"y", r.y}}},
              {"tolerance", r.tolerance},
              {"details", r.details},
              {"metadata", r.metadata}};
    if (!r.failed.empty()) j["failed"] = r.failed;
    return j;
}

namespace {

double sample_y(const Field2D& f, int i, double s) {
    const int n = f.ny;
    if (s <= 0.0) return f(i, 0);
    if (s >= n - 1) return f(i, n - 1);
    return lagrange4(f.v.data() + i, f.nx, n, s);
}

void check_shape(const Field2D& f, const PlaneGrid& g) {
    if (f.nx != g.nx + 1 || f.ny != g.ny + 1) throw std::invalid_argument("field does not match the plane grid");
}

VerificationReport base_report(const std::string& name, const PlaneGrid& g, double tol) {
    VerificationReport r;
    r.check_name = name;
    r.tolerance = tol;
    r.metadata["grid"] = to_json(g);
    return r;
}

}  // namespace

Field2D shift_field(const Field2D& field, const PlaneGrid& grid, double s) {
    check_shape(field, grid);
    Field2D out(field.nx, field.ny);
    const double k = std::round(s);
    const bool whole = std::abs(s - k) < 1e-12;
    for (int j = 0; j < field.ny; ++j)
        for (int i = 0; i < field.nx; ++i) {
            if (whole) {
                int jj = std::clamp(j + static_cast<int>(k), 0, field.ny - 1);
                out(i, j) = field(i, jj);
            } else {
                out(i, j) = sample_y(field, i, j + s);
            }
        }
    return out;
}

VerificationReport check_monotone_y(const Field2D& field, const PlaneGrid& grid, double tol) {
    check_shape(field, grid);
    auto r = base_report("monotone_y", grid, tol);
    double worst = -std::numeric_limits<double>::infinity();
    int wi = 0, wj = 0;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 1; i < grid.nx; ++i) {
            double v = field(i, j) - field(i, j + 1);
            if (v > worst) worst = v, wi = i, wj = j;
        }
    r.worst_violation = worst;
    r.x = grid.x(wi);
    r.y = grid.y(wj);
    r.pass = worst <= tol;
    r.details["min_forward_difference"] = -worst;
    if (!r.pass) r.failed = "forward y-difference";
    return r;
}

VerificationReport check_cone_limits(const Field2D& field, const PlaneGrid& grid, double alpha,
                                     const ConeLimitOptions& opts) {
    check_shape(field, grid);
    auto r = base_report("cone_limits", grid, 0.0);
    std::vector<double> levels = opts.levels;
    if (levels.empty())
        for (double s : {0.4, 0.5, 0.6, 0.7, 0.8}) levels.push_back(s * grid.y_max);
    std::sort(levels.begin(), levels.end());
    const int m = opts.margin_cells;

    std::vector<double> sups, infs;
    std::vector<std::pair<double, double>> sup_at, inf_at;
    json rows = json::array();
    for (double l : levels) {
        ConeRegion lower{alpha, -l, ConeSide::lower}, upper{alpha, l, ConeSide::upper};
        double sup = -1.0, inf = 2.0;
        std::pair<double, double> sl{0, 0}, il{0, 0};
        int nl = 0, nu = 0;
        for (int j = m; j <= grid.ny - m; ++j)
            for (int i = m; i <= grid.nx - m; ++i) {
                double x = grid.x(i), y = grid.y(j), v = field(i, j);
                if (cone_membership(x, y, lower)) {
                    ++nl;
                    if (v > sup) sup = v, sl = {x, y};
                }
                if (cone_membership(x, y, upper)) {
                    ++nu;
                    if (v < inf) inf = v, il = {x, y};
                }
            }
        if (nl == 0 || nu == 0)
            throw VerificationError("cone at level " + std::to_string(l) + " has no nodes inside the domain");
        sups.push_back(sup);
        infs.push_back(inf);
        sup_at.push_back(sl);
        inf_at.push_back(il);
        rows.push_back({{"level", l}, {"lower_sup", sup}, {"upper_inf", inf}, {"lower_nodes", nl}, {"upper_nodes", nu}});
    }
    r.details["levels"] = rows;
    r.details["lower_threshold"] = opts.lower_threshold;
    r.details["upper_threshold"] = opts.upper_threshold;

    // sup over C-(-l) shrinks as l grows; inf over C+(l) grows as l grows.
    double worst = -std::numeric_limits<double>::infinity();
    std::string failed;
    auto consider = [&](double v, std::pair<double, double> at, const std::string& what) {
        if (v > worst) {
            worst = v;
            r.x = at.first;
            r.y = at.second;
            if (v > 0.0) failed = what;
        }
    };
    consider(sups.back() - opts.lower_threshold, sup_at.back(), "lower cone threshold");
    consider(opts.upper_threshold - infs.back(), inf_at.back(), "upper cone threshold");
    for (size_t k = 1; k < levels.size(); ++k) {
        consider(sups[k] - sups[k - 1], sup_at[k], "lower cone monotone sequence");
        consider(infs[k - 1] - infs[k], inf_at[k], "upper cone monotone sequence");
    }
    r.worst_violation = worst;
    r.pass = worst <= 0.0;
    if (!r.pass) r.failed = failed;
    return r;
}

VerificationReport check_ordering(const Field2D& sub, const Field2D& mid, const Field2D& super,
                                  const PlaneGrid& grid, double tol) {
    check_shape(sub, grid);
    check_shape(mid, grid);
    check_shape(super, grid);
    auto r = base_report("ordering", grid, tol);
    double lower = -std::numeric_limits<double>::infinity(), upper = lower;
    int li = 0, lj = 0, ui = 0, uj = 0;
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            double a = sub(i, j) - mid(i, j);
            double b = mid(i, j) - std::min(super(i, j), 1.0);
            if (a > lower) lower = a, li = i, lj = j;
            if (b > upper) upper = b, ui = i, uj = j;
        }
    r.details["sub_minus_mid"] = lower;
    r.details["mid_minus_super"] = upper;
    bool low_worst = lower >= upper;
    r.worst_violation = std::max(lower, upper);
    r.x = grid.x(low_worst ? li : ui);
    r.y = grid.y(low_worst ? lj : uj);
    r.pass = r.worst_violation <= tol;
    if (!r.pass) r.failed = low_worst ? "sub <= mid" : "mid <= min(super, 1)";
    return r;
}

double default_rho(double theta) { return 1.0 - 0.5 * (1.0 + theta); }

VerificationReport check_comparison_on_cone(const Field2D& lower, const Field2D& upper, const PlaneGrid& grid,
                                            const ConeRegion& cone, double rho_or_theta, double tol,
                                            int margin_cells) {
    check_shape(lower, grid);
    check_shape(upper, grid);
    auto r = base_report("comparison_on_cone", grid, tol);
    const bool upper_side = cone.side == ConeSide::upper;
    const int m = margin_cells;
    auto inside = [&](int i, int j) {
        return i >= m && i <= grid.nx - m && j >= m && j <= grid.ny - m && cone_membership(grid.x(i), grid.y(j), cone);
    };

    struct Worst {
        double v = -std::numeric_limits<double>::infinity();
        int i = 0, j = 0;
        void take(double w, int ii, int jj) {
            if (w > v) v = w, i = ii, j = jj;
        }
    } boundary, bound, conclusion;
    int nodes = 0, boundary_nodes = 0;
    const double level = upper_side ? 1.0 - rho_or_theta : rho_or_theta;
    for (int j = m; j <= grid.ny - m; ++j)
        for (int i = m; i <= grid.nx - m; ++i) {
            if (!inside(i, j)) continue;
            ++nodes;
            double gap = lower(i, j) - upper(i, j);
            conclusion.take(gap, i, j);
            bool edge = !inside(i - 1, j) || !inside(i + 1, j) || !inside(i, j - 1) || !inside(i, j + 1);
            if (edge) {
                ++boundary_nodes;
                boundary.take(gap, i, j);
            }
            bound.take(upper_side ? level - upper(i, j) : lower(i, j) - level, i, j);
        }
    if (nodes == 0) throw VerificationError("cone has no nodes inside the domain");

    r.details["side"] = upper_side ? "upper" : "lower";
    r.details["level_l"] = cone.level_l;
    r.details["bound"] = level;
    r.details["nodes"] = nodes;
    r.details["boundary_nodes"] = boundary_nodes;
    r.details["boundary_ordering"] = {{"worst", boundary.v}, {"pass", boundary.v <= tol}};
    r.details["interior_bound"] = {{"worst", bound.v}, {"pass", bound.v <= 0.0}};
    r.details["conclusion"] = {{"worst", conclusion.v}, {"pass", conclusion.v <= tol}};

    const Worst* w = &conclusion;
    if (boundary.v > tol) {
        r.failed = "boundary_ordering";
        w = &boundary;
    } else if (bound.v > 0.0) {
        r.failed = upper_side ? "interior_bound (upper >= 1 - rho)" : "interior_bound (lower <= theta)";
        w = &bound;
    } else if (conclusion.v > tol) {
        r.failed = "conclusion";
    }
    r.worst_violation = w == &bound ? bound.v + tol : w->v;
    r.x = grid.x(w->i);
    r.y = grid.y(w->j);
    r.pass = r.failed.empty();
    return r;
}

ShiftResult check_shift_uniqueness(const Field2D& a, const Field2D& b, const PlaneGrid& grid, double tol) {
    check_shape(a, grid);
    check_shape(b, grid);
    const int m = 2;
    const double half = 0.5 * grid.y_max / grid.dy();  // bracket in cells
    auto diff = [&](double s, int* wi = nullptr, int* wj = nullptr) {
        double worst = 0.0;
        const int j0 = std::max(m, static_cast<int>(std::ceil(m - s)));
        const int j1 = std::min(grid.ny - m, static_cast<int>(std::floor(grid.ny - m - s)));
        for (int j = j0; j <= j1; ++j)
            for (int i = m; i <= grid.nx - m; ++i) {
                double d = std::abs(a(i, j) - sample_y(b, i, j + s));
                if (d > worst) {
                    worst = d;
                    if (wi) *wi = i, *wj = j;
                }
            }
        return worst;
    };
    const int kmax = static_cast<int>(std::floor(half));
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int k = -kmax; k <= kmax; ++k) {
        double v = diff(k);
        if (v < best_v) best_v = v, best = k;
    }
    ShiftResult res;
    auto& r = res.report = base_report("shift_uniqueness", grid, tol);
    if (std::abs(best) >= kmax)
        throw VerificationError("best shift lies on the search bracket edge; fields are not comparable");
    double s = golden_section_minimize([&](double t) { return diff(t); }, best - 1.0, best + 1.0, 1e-4);
    int wi = 0, wj = 0;
    double v = diff(s, &wi, &wj);
    if (diff(best) < v) s = best, v = diff(best, &wi, &wj);
    res.shift = s * grid.dy();
    r.worst_violation = v;
    r.x = grid.x(wi);
    r.y = grid.y(wj);
    r.pass = v <= tol;
    r.details["shift"] = res.shift;
    r.details["shift_cells"] = s;
    r.details["bracket"] = {-kmax * grid.dy(), kmax * grid.dy()};
    if (!r.pass) r.failed = "aligned max-norm difference";
    return res;
}

}  // namespace conical
