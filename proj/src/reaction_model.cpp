#include "conical/reaction_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace conical {

using nlohmann::json;

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

json to_json(const ValidationReport& report) {
    json out = json::array();
    for (const auto& c : report.checks)
        out.push_back({{"name", c.name}, {"pass", c.pass}, {"defect", c.defect}, {"tolerance", c.tolerance}});
    return out;
}

// ============================================================================
// CombustionNonlinearity
// ============================================================================

CombustionNonlinearity::CombustionNonlinearity(std::string family, double theta, double r,
                                               Evaluator inner, double lipschitz_bound)
    : family_(std::move(family)), theta_(theta), r_(r), inner_(std::move(inner)), lipschitz_(lipschitz_bound) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
    if (!(r > 0.0 && r <= 1.0 - theta)) throw ConfigError("r must lie in (0, 1-theta]");
    if (!(lipschitz_bound >= 0.0)) throw ConfigError("lipschitz bound must be nonnegative");
}

CombustionNonlinearity CombustionNonlinearity::quadratic(double theta, double r) {
    return CombustionNonlinearity(
        "quadratic", theta, r, [theta](double u) { return (u - theta) * (1.0 - u); }, 1.0 - theta);
}

CombustionNonlinearity CombustionNonlinearity::power(double theta, double exponent, double r) {
    if (!(exponent >= 1.0)) throw ConfigError("power family needs exponent >= 1");
    auto inner = [theta, exponent](double u) { return std::pow(u - theta, exponent) * (1.0 - u); };
    // sup |f'| on (theta,1), sampled finely with a small safety factor
    double lip = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        double u = theta + (1.0 - theta) * i / n;
        double s = u - theta;
        double d = exponent * std::pow(s, exponent - 1.0) * (1.0 - u) - std::pow(s, exponent);
        lip = std::max(lip, std::abs(d));
    }
    return CombustionNonlinearity("power", theta, r, inner, lip * 1.001);
}

CombustionNonlinearity CombustionNonlinearity::zero(double theta) {
    return CombustionNonlinearity("zero", theta, std::min(0.1, 1.0 - theta), [](double) { return 0.0; }, 0.0);
}

double CombustionNonlinearity::operator()(double u) const {
    if (!(u > theta_ && u < 1.0)) return 0.0;
    return inner_(u);
}

double CombustionNonlinearity::primitive(double u) const {
    if (u <= theta_) return 0.0;
    double b = std::min(u, 1.0);
    const int n = 2000;
    double h = (b - theta_) / n;
    double s = (*this)(theta_) + (*this)(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * (*this)(theta_ + i * h);
    return s * h / 3.0;
}

double CombustionNonlinearity::left_slope_at_one(double eps) const {
    return ((*this)(1.0) - (*this)(1.0 - eps)) / eps;
}

ValidationReport CombustionNonlinearity::validate() const {
    ValidationReport rep;
    const int n = 4000;

    double outside = std::abs((*this)(1.0));
    for (int i = 0; i <= n; ++i) {
        double u = std::min(theta_, -0.5 + (theta_ + 0.5) * i / n);
        outside = std::max(outside, std::abs((*this)(u)));
        double w = 1.0 + 0.5 * i / n + 1e-12;
        outside = std::max(outside, std::abs((*this)(w)));
    }
    rep.checks.push_back({"zero_outside_reaction_zone", outside == 0.0, outside, 0.0});

    double min_inside = INFINITY;
    for (int i = 1; i < n; ++i) min_inside = std::min(min_inside, (*this)(theta_ + (1.0 - theta_) * i / n));
    rep.checks.push_back({"positive_on_theta_one", min_inside > 0.0, -min_inside, 0.0});

    double slope = left_slope_at_one(r_ * 1e-3);
    rep.checks.push_back({"negative_slope_at_one", slope < 0.0, slope, 0.0});

    double lip = 0.0;
    const int m = 20000;
    double prev = (*this)(-0.5);
    for (int i = 1; i <= m; ++i) {
        double u = -0.5 + 2.0 * i / m;
        double cur = (*this)(u);
        lip = std::max(lip, std::abs(cur - prev) / (2.0 / m));
        prev = cur;
    }
    rep.checks.push_back({"lipschitz_bound", lip <= lipschitz_ * (1.0 + 1e-9) + 1e-14, lip, lipschitz_});
    return rep;
}

// ============================================================================
// ShearFlow
// ============================================================================

ShearFlow ShearFlow::cosine(double amplitude, double period) {
    return fourier(0.0, {amplitude}, {}, period);
}

ShearFlow ShearFlow::zero(double period) { return fourier(0.0, {}, {}, period); }

ShearFlow ShearFlow::constant(double value, double period) { return fourier(value, {}, {}, period); }

ShearFlow ShearFlow::fourier(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs,
                             double period) {
    if (!(period > 0.0)) throw ConfigError("flow period must be positive");
    ShearFlow q;
    q.period_ = period;
    q.a0_ = a0;
    q.cos_ = std::move(cos_coeffs);
    q.sin_ = std::move(sin_coeffs);
    double amp = std::abs(a0);
    for (double c : q.cos_) amp += std::abs(c);
    for (double s : q.sin_) amp += std::abs(s);
    q.amplitude_ = amp;
    return q;
}

ShearFlow ShearFlow::tabulated(std::vector<double> samples, double period) {
    if (!(period > 0.0)) throw ConfigError("flow period must be positive");
    if (samples.size() < 4) throw ConfigError("tabulated flow needs at least 4 samples");
    ShearFlow q;
    q.period_ = period;
    q.samples_ = std::move(samples);
    double amp = 0.0;
    for (double s : q.samples_) amp = std::max(amp, std::abs(s));
    q.amplitude_ = amp;
    return q;
}

double ShearFlow::operator()(double x) const {
    if (!samples_.empty()) {
        const int n = static_cast<int>(samples_.size());
        double s = x / period_ * n;
        double fl = std::floor(s);
        double t = s - fl;
        long k = static_cast<long>(fl);
        auto at = [&](long i) { return samples_[static_cast<size_t>(((i % n) + n) % n)]; };
        double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
        // Catmull-Rom
        return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                      (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
    }
    double w = 2.0 * std::numbers::pi * x / period_;
    double v = a0_;
    for (size_t k = 0; k < cos_.size(); ++k) v += cos_[k] * std::cos((k + 1) * w);
    for (size_t k = 0; k < sin_.size(); ++k) v += sin_[k] * std::sin((k + 1) * w);
    return v;
}

bool ShearFlow::is_zero() const { return amplitude_ == 0.0; }

std::string ShearFlow::describe() const {
    std::ostringstream os;
    if (is_tabulated()) {
        os << "tabulated(" << samples_.size() << " samples, L=" << period_ << ")";
        return os.str();
    }
    os << "fourier(a0=" << a0_ << ", cos=[";
    for (size_t k = 0; k < cos_.size(); ++k) os << (k ? "," : "") << cos_[k];
    os << "], sin=[";
    for (size_t k = 0; k < sin_.size(); ++k) os << (k ? "," : "") << sin_[k];
    os << "], L=" << period_ << ")";
    return os.str();
}

ValidationReport validate_flow(const ShearFlow& flow) {
    const double tol = flow.is_tabulated() ? 1e-6 : 1e-10;
    const double L = flow.period();
    const int n = 1024;
    double per = 0.0, even = 0.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = L * i / n;
        double v = flow(x);
        double vp = flow(x + L);
        double vm = flow(-x);
        if (!std::isfinite(v) || !std::isfinite(vp) || !std::isfinite(vm))
            throw std::domain_error("flow profile is not finite at x=" + std::to_string(x));
        per = std::max(per, std::abs(vp - v));
        even = std::max(even, std::abs(vm - v));
        sum += v;
    }
    double mean = std::abs(sum / n);
    ValidationReport rep;
    rep.checks.push_back({"periodic", per <= tol, per, tol});
    rep.checks.push_back({"zero_mean", mean <= tol, mean, tol});
    rep.checks.push_back({"even", even <= tol, even, tol});
    return rep;
}

// ============================================================================
// Diffusion matrices and cones
// ============================================================================

std::string to_string(MatrixVariant v) { return v == MatrixVariant::A ? "A" : "B"; }

std::pair<double, double> DiffusionMatrix::eigenvalues() const {
    double m = 0.5 * (xx + yy);
    double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return {m - d, m + d};
}

DiffusionMatrix diffusion_matrix(double alpha, MatrixVariant variant) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw ConfigError("alpha must lie in (0,pi)");
    double c = std::cos(alpha);
    DiffusionMatrix m;
    m.alpha = alpha;
    m.variant = variant;
    m.xx = 1.0;
    m.yy = 1.0;
    m.xy = variant == MatrixVariant::A ? c : -c;
    return m;
}

double ConeRegion::boundary_y(double x) const {
    return -std::abs(x) * std::cos(alpha) / std::sin(alpha) + level_l;
}

namespace {
double cone_tol(double x, double y, double l) { return 1e-12 * (1.0 + std::abs(x) + std::abs(y) + std::abs(l)); }
}  // namespace

bool cone_membership(double x, double y, const ConeRegion& region) {
    double b = region.boundary_y(x);
    double tol = cone_tol(x, y, region.level_l);
    return region.side == ConeSide::lower ? y <= b + tol : y >= b - tol;
}

bool cone_strict_interior(double x, double y, const ConeRegion& region) {
    double b = region.boundary_y(x);
    double tol = cone_tol(x, y, region.level_l);
    return region.side == ConeSide::lower ? y < b - tol : y > b + tol;
}

// ============================================================================
// Config parsing
// ============================================================================

double parse_angle(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError("angle must be a number or a string like \"pi/3\"");
    std::string s = j.get<std::string>();
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    auto pos = s.find("pi");
    if (pos == std::string::npos) {
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse angle '" + s + "'");
        }
    }
    double num = 1.0, den = 1.0;
    try {
        std::string pre = s.substr(0, pos);
        if (!pre.empty() && pre != "*") {
            if (pre.back() == '*') pre.pop_back();
            num = std::stod(pre);
        }
        std::string post = s.substr(pos + 2);
        if (!post.empty()) {
            if (post[0] != '/') throw ConfigError("cannot parse angle '" + s + "'");
            den = std::stod(post.substr(1));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse angle '" + s + "'");
    }
    return num * std::numbers::pi / den;
}

CombustionNonlinearity parse_nonlinearity(const json& j) {
    double theta = j.value("theta", 0.3);
    double r = j.value("r", std::min(0.1, 1.0 - theta));
    std::string family = "quadratic";
    double exponent = 1.0;
    if (j.contains("reaction")) {
        const auto& rj = j.at("reaction");
        family = rj.value("family", family);
        exponent = rj.value("exponent", exponent);
    }
    if (family == "quadratic") return CombustionNonlinearity::quadratic(theta, r);
    if (family == "power") return CombustionNonlinearity::power(theta, exponent, r);
    if (family == "zero") return CombustionNonlinearity::zero(theta);
    throw ConfigError("unknown reaction family '" + family + "'");
}

ShearFlow parse_flow(const json& j) {
    std::string family = j.value("family", "cosine");
    double L = j.value("period", 1.0);
    if (family == "cosine") return ShearFlow::cosine(j.value("amplitude", 0.5), L);
    if (family == "zero") return ShearFlow::zero(L);
    if (family == "constant") return ShearFlow::constant(j.value("value", 0.0), L);
    if (family == "fourier")
        return ShearFlow::fourier(j.value("a0", 0.0), j.value("cos", std::vector<double>{}),
                                  j.value("sin", std::vector<double>{}), L);
    if (family == "tabulated") return ShearFlow::tabulated(j.at("samples").get<std::vector<double>>(), L);
    throw ConfigError("unknown flow family '" + family + "'");
}

ProblemData parse_problem(const json& j) {
    ProblemData p{parse_nonlinearity(j), j.contains("flow") ? parse_flow(j.at("flow")) : ShearFlow::zero(1.0), {}};
    if (!j.contains("alpha")) throw ConfigError("problem.alpha is required");
    const auto& a = j.at("alpha");
    if (a.is_array())
        for (const auto& e : a) p.alphas.push_back(parse_angle(e));
    else
        p.alphas.push_back(parse_angle(a));
    if (p.alphas.empty()) throw ConfigError("problem.alpha is empty");
    for (double al : p.alphas)
        if (!(al > 0.0 && al < std::numbers::pi))
            throw ConfigError("alpha must lie in (0,pi), got " + std::to_string(al));
    return p;
}

}  // namespace conical
