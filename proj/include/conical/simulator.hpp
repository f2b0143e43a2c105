#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conical/barrier.hpp"
#include "conical/pulsating_front.hpp"

namespace conical {

enum class TimeScheme { douglas_adi, lod_monotone };
enum class LateralBC { arm_extrapolated, arm_periodic, neumann };

std::string to_string(TimeScheme s);
TimeScheme parse_time_scheme(const std::string& s);
std::string to_string(LateralBC b);
LateralBC parse_lateral_bc(const std::string& s);

struct EvolutionState {
    PlaneGrid grid;
    Field2D u;
    double t = 0.0;
    double frame_shift = 0.0;  // S(t): lab y = frame y - S
    double dt = 0.0;
    double c_frame = 0.0;
    long clipped = 0;
};

struct SpeedTrace {
    std::vector<double> times;
    std::vector<double> level_positions;  // lab y of u = 1/2 on x = 0
    std::vector<double> frame_shifts;
    double fitted_speed = 0.0;
    double fit_residual = 0.0;
};

struct EvolveOptions {
    PlaneGrid grid;
    double alpha = 1.5707963267948966;
    double c_frame = 0.5;
    double dt = 0.1;
    TimeScheme scheme = TimeScheme::douglas_adi;
    LateralBC lateral = LateralBC::arm_extrapolated;
    double t_max = 600.0;
    double t_min = 40.0;
    double check_interval = 0.5;
    double change_tol = 1e-6;  // max-norm change per unit time
    double speed_tol = 1e-6;   // change of the speed estimate across consecutive_checks checks
    int consecutive_checks = 50;
    double measure_time = 50.0;  // trace recorded after convergence for the speed fit
    bool adaptive_frame = true;
    double frame_gain = 0.05;
    double target_y = 0.0;
    double recenter_distance = 1.0;
    double boundary_margin = 3.0;
    std::function<void(const EvolutionState&)> observer;
};

struct EvolveResult {
    Field2D steady;
    SpeedTrace trace;
    SpeedEstimate speed;
    double shift_speed = 0.0;
    bool converged = false;
    double final_change_rate = 0.0;
    long clipped = 0;
    double c_frame = 0.0;
    double t_end = 0.0;
    long steps = 0;
    double level_wait = 0.0;  // time before a 1/2 level first appeared on x = 0
    double measure_start = -1.0;  // time the measurement trace began, -1 without convergence
    std::string message;
};

nlohmann::json to_json(const EvolveResult& r);

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Frame equation u_t = Lap u + (q(x) - c_frame) u_y + f(u) on the truncated plane.
class PlaneEvolver {
public:
    PlaneEvolver(const Field2D& initial, const ShearFlow& flow, const CombustionNonlinearity& f,
                 const EvolveOptions& opts);

    void set_frame_speed(double c);
    void step();
    // y of the first upward crossing of 1/2 on the x = 0 column.
    double level_position() const;
    // Shifts the field by whole cells so that the level moves by -k dy.
    void shift_cells(int k);
    void apply_lateral();
    // NaN when column i has no upward crossing of 1/2.
    double column_level(int i) const;
    // Extrapolated slope defect used at the left (0) and right (1) walls.
    double defect(int side) const { return last_defect_[side]; }

    const EvolutionState& state() const { return st_; }
    EvolutionState& state() { return st_; }

private:
    void factor();
    void step_douglas();
    void step_lod();
    double tail_value(int i, double s) const;
    double wall_defect(int sign) const;

    const ShearFlow& flow_;
    const CombustionNonlinearity& f_;
    EvolveOptions opts_;
    EvolutionState st_;
    std::vector<double> q_;
    double kappa_ = 0.0;
    // tail rate cache: lambda(c) ~ lam + slope (c - c0) near c0
    DiffusionMatrix tail_matrix_;
    std::vector<double> tail_b_;
    double tail_dx_ = 0.0;
    double tail_c_ = NAN, tail_lam_ = 0.0, tail_slope_ = 0.0;
    int wall_offset_ = 0;  // period in cells
    double last_defect_[2] = {0.0, 0.0};
    Field2D rhs_;
    TridiagonalLU x_solver_;
    // batched Thomas coefficients for the y sweeps, row-major like the field
    Field2D ya_, ycp_, yinv_;
    std::vector<double> row_;
};

EvolveResult evolve(const Field2D& initial, const ShearFlow& flow, const CombustionNonlinearity& f,
                    const EvolveOptions& opts);

SpeedEstimate measure_speed(const SpeedTrace& trace);

struct FormulaReport {
    double expected = 0.0;
    double measured = 0.0;
    double rel_error = 0.0;
    double tol = 0.0;
    bool pass = false;
};

nlohmann::json to_json(const FormulaReport& r);

FormulaReport compare_speed_formula(const SpeedEstimate& measured, const SpeedEstimate& cA, double alpha,
                                    double tol);

}  // namespace conical
