#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conical/numerics.hpp"
#include "conical/reaction_model.hpp"

namespace conical {

struct SpeedEstimate {
    double c = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double bracket = 0.0;
    std::string method;
};

nlohmann::json to_json(const SpeedEstimate& s);

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Planar 1D front: U'' - c U' + f(U) = 0, U(-inf) = 0, U(+inf) = 1
// ============================================================================

struct PlanarFrontOptions {
    double step = 1e-4;        // RK4 step in U
    double tail_cut = 1e-4;    // shooting target at U = 1 - tail_cut
    double speed_tol = 1e-10;  // bisection bracket
    double c_min = 1e-4;
    double c_max = 0.0;        // 0 selects 2 sqrt(lipschitz) + 1
};

struct PlanarFront {
    double speed = 0.0;
    double bracket = 0.0;
    int iterations = 0;
    double richardson_error = 0.0;  // |c(step) - c(2 step)| / 15
    double theta = 0.0;
    double tail_cut = 0.0;
    double decay_rate = 0.0;  // exponential approach rate to 1
    // Hermite table in Y with U(0) = theta.
    std::vector<double> Y, U, dU;

    double value(double y) const;
    double derivative(double y) const;
    SpeedEstimate estimate() const;
};

// Mismatch of the phase-plane shot at trial speed c; positive when c is too large.
double planar_shooting_mismatch(const CombustionNonlinearity& f, double c, const PlanarFrontOptions& opts);

PlanarFront planar_front_speed_1d(const CombustionNonlinearity& f, const PlanarFrontOptions& opts = {});

// ============================================================================
// Pulsating fronts on a periodic strip
// ============================================================================

struct PeriodicStripGrid {
    double period_L = 1.0;
    int nx = 64;
    double y_max = 12.0;
    int ny = 512;

    double dx() const { return period_L / nx; }
    double dy() const { return 2.0 * y_max / ny; }
    double X(int i) const { return i * dx(); }
    double Y(int j) const { return -y_max + j * dy(); }
    // Field shape: nx columns (periodic), ny + 1 rows.
    Field2D make_field(double fill = 0.0) const { return Field2D(nx, ny + 1, fill); }
    void validate() const;
};

struct FrontProfile {
    PeriodicStripGrid grid;
    Field2D values;
    MatrixVariant variant = MatrixVariant::A;
    double alpha = 0.0;
    double speed = 0.0;
    bool normalized = false;
};

struct DriftSample {
    double c = 0.0;
    double drift = 0.0;
};

struct PulsatingOptions {
    double dt = 0.1;
    double warmup_time = 40.0;
    double relax_time = 10.0;
    double window_time = 10.0;
    double speed_tol = 1e-4;    // final bracket width
    double drift_tol = 1e-5;    // per unit time
    int max_evaluations = 60;
    int max_windows = 8;        // drift windows per trial speed
    double initial_step = 0.02;  // half width of the first bracket search
    std::optional<double> speed_guess;
};

struct PulsatingResult {
    SpeedEstimate speed;
    FrontProfile profile;
    std::vector<DriftSample> trials;
    double residual_max = 0.0;  // max |discrete elliptic residual| at the final speed
};

// Positive decay rate lambda of the tail exp(lambda Y) p(X) ahead of a front of speed c:
// the principal eigenvalue of mxx p'' + 2 lambda mxy p' + (myy lambda^2 + lambda (b(X) - c)) p
// on the periodic mesh vanishes. b holds q sin(alpha) per column; lambda = c / myy when b = 0.
double tail_rate(const DiffusionMatrix& m, const std::vector<double>& b, double dx, double c);

// Right-hand side operator on the strip; the lower row carries u_Y = kappa u.
struct StripOperator {
    PeriodicStripGrid grid;
    DiffusionMatrix matrix;
    std::vector<double> drift_coef;  // q(X) sin(alpha) per column
    double c = 0.0;
    double kappa = 0.0;

    StripOperator(const PeriodicStripGrid& g, const DiffusionMatrix& m, const ShearFlow& flow, double alpha);
    // div(M grad u) + (q sin(alpha) - c) u_Y + f(u) on all unknown rows; top row zero.
    void apply(const Field2D& u, const CombustionNonlinearity& f, Field2D& out) const;
};

Field2D strip_residual(const FrontProfile& profile, const DiffusionMatrix& matrix, const ShearFlow& flow,
                       const CombustionNonlinearity& f, double c);

double residual_max_norm(const Field2D& r);

// Measures the frozen-frame drift of the u = 1/2 level at trial speed c starting from
// the given state; positive drift means the true speed exceeds c.
class StripEvolver {
public:
    StripEvolver(const PeriodicStripGrid& grid, const DiffusionMatrix& m, const ShearFlow& flow, double alpha,
                 const CombustionNonlinearity& f, double dt);

    void set_speed(double c);
    void set_state(const Field2D& u);
    const Field2D& state() const { return u_; }
    void step();
    void advance(double time);
    // Mean over columns of the first upward crossing of 1/2.
    double level_position() const;
    // Integer-cell shift so that the level sits near Y = 0; returns the applied shift in Y units.
    double recenter();
    double drift(double relax_time, double window_time);
    // Repeats windows until two consecutive drifts agree within max(tol, 10%).
    double settled_drift(double relax_time, double window_time, double tol, int max_windows);
    double speed() const { return op_.c; }

private:
    void factor_y();
    StripOperator op_;
    const CombustionNonlinearity& f_;
    double dt_;
    Field2D u_, rhs_;
    CyclicTridiagonal x_solver_;
    std::vector<TridiagonalLU> y_solvers_;
    std::vector<double> column_;
};

PulsatingResult solve_pulsating_front(const DiffusionMatrix& matrix, const ShearFlow& flow, double alpha,
                                      const CombustionNonlinearity& f, const PeriodicStripGrid& grid,
                                      const PulsatingOptions& opts = {});

FrontProfile normalize_front(const FrontProfile& profile, double theta);

// Y-location on column i where the profile first reaches level (PCHIP interpolation).
double column_level_crossing(const FrontProfile& profile, int i, double level);

// X-reflection i -> (nx - i) mod nx.
FrontProfile reflect_x(const FrontProfile& profile);

bool check_speed_symmetry(const SpeedEstimate& cA, const SpeedEstimate& cB, double tol);

nlohmann::json speed_record(const PulsatingResult& r, const ShearFlow& flow);

}  // namespace conical
