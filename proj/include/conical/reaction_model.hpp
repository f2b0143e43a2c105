#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace conical {

struct CheckResult {
    std::string name;
    bool pass = false;
    double defect = 0.0;
    double tolerance = 0.0;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool ok() const;
    const CheckResult* find(const std::string& name) const;
};

nlohmann::json to_json(const ValidationReport& report);

// Ignition-type reaction. The family evaluator is only consulted on (theta, 1);
// outside that interval the value is zero by construction.
class CombustionNonlinearity {
public:
    using Evaluator = std::function<double(double)>;

    CombustionNonlinearity(std::string family, double theta, double r, Evaluator inner,
                           double lipschitz_bound);

    static CombustionNonlinearity quadratic(double theta, double r = 0.1);
    static CombustionNonlinearity power(double theta, double exponent, double r = 0.1);
    static CombustionNonlinearity zero(double theta);

    double operator()(double u) const;
    double theta() const { return theta_; }
    double r() const { return r_; }
    double lipschitz_bound() const { return lipschitz_; }
    const std::string& family() const { return family_; }
    bool degenerate() const { return family_ == "zero"; }

    // F(u) = integral of f from 0 to u (Simpson, 2000 panels).
    double primitive(double u) const;
    // Left one-sided finite difference at u = 1 using step eps.
    double left_slope_at_one(double eps) const;

    ValidationReport validate() const;

private:
    std::string family_;
    double theta_;
    double r_;
    Evaluator inner_;
    double lipschitz_;
};

inline double eval_f(double u, const CombustionNonlinearity& model) { return model(u); }

// L-periodic flow given by a Fourier series or periodic tabulated samples.
class ShearFlow {
public:
    static ShearFlow cosine(double amplitude, double period);
    static ShearFlow zero(double period);
    static ShearFlow constant(double value, double period);
    // q(x) = a0 + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L), k >= 1.
    static ShearFlow fourier(double a0, std::vector<double> cos_coeffs,
                             std::vector<double> sin_coeffs, double period);
    // samples[i] = q(i L / n), periodic cubic interpolation in between.
    static ShearFlow tabulated(std::vector<double> samples, double period);

    double operator()(double x) const;
    double period() const { return period_; }
    double amplitude() const { return amplitude_; }
    bool is_tabulated() const { return !samples_.empty(); }
    bool is_zero() const;
    std::string describe() const;

private:
    double period_ = 1.0;
    double amplitude_ = 0.0;
    double a0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
    std::vector<double> samples_;
};

ValidationReport validate_flow(const ShearFlow& flow);

enum class MatrixVariant { A, B };

std::string to_string(MatrixVariant v);

struct DiffusionMatrix {
    double alpha = 0.0;
    MatrixVariant variant = MatrixVariant::A;
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    std::pair<double, double> eigenvalues() const;
};

DiffusionMatrix diffusion_matrix(double alpha, MatrixVariant variant);

enum class ConeSide { lower, upper };

struct ConeRegion {
    double alpha = 0.0;
    double level_l = 0.0;
    ConeSide side = ConeSide::lower;

    // y-coordinate of the cone boundary above abscissa x.
    double boundary_y(double x) const;
};

bool cone_membership(double x, double y, const ConeRegion& region);
bool cone_strict_interior(double x, double y, const ConeRegion& region);

struct ProblemData {
    CombustionNonlinearity f = CombustionNonlinearity::quadratic(0.3);
    ShearFlow flow = ShearFlow::zero(1.0);
    std::vector<double> alphas;
};

CombustionNonlinearity parse_nonlinearity(const nlohmann::json& j);
ShearFlow parse_flow(const nlohmann::json& j);
// Accepts a number (radians) or strings like "pi/3", "2pi/3", "0.25pi".
double parse_angle(const nlohmann::json& j);
ProblemData parse_problem(const nlohmann::json& j);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace conical
