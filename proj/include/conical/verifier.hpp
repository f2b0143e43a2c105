#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "conical/barrier.hpp"
#include "conical/reaction_model.hpp"

namespace conical {

struct VerificationReport {
    std::string check_name;
    bool pass = false;
    double worst_violation = 0.0;
    double x = 0.0, y = 0.0;  // location of the worst violation
    double tolerance = 0.0;
    std::string failed;  // hypothesis or sub-check that failed, empty on pass
    nlohmann::json details = nlohmann::json::object();
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const VerificationReport& r);

class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// field(x, y + s) with cubic interpolation in y; s in grid units of y. Rows beyond the grid
// take the nearest boundary row.
Field2D shift_field(const Field2D& field, const PlaneGrid& grid, double s);

VerificationReport check_monotone_y(const Field2D& field, const PlaneGrid& grid, double tol);

struct ConeLimitOptions {
    std::vector<double> levels;  // magnitudes; lower cones at -l, upper at +l. Empty: 0.4..0.8 y_max
    double lower_threshold = 0.05;
    double upper_threshold = 0.95;
    int margin_cells = 2;
};

VerificationReport check_cone_limits(const Field2D& field, const PlaneGrid& grid, double alpha,
                                     const ConeLimitOptions& opts = {});

VerificationReport check_ordering(const Field2D& sub, const Field2D& mid, const Field2D& super,
                                  const PlaneGrid& grid, double tol);

// 1 - rho = (1 + theta) / 2
double default_rho(double theta);

// Upper cone: hypothesis upper >= 1 - rho on the cone (pass rho). Lower cone: hypothesis
// lower <= theta on the cone (pass theta). Both need lower <= upper on the cone boundary.
VerificationReport check_comparison_on_cone(const Field2D& lower, const Field2D& upper, const PlaneGrid& grid,
                                            const ConeRegion& cone, double rho_or_theta, double tol,
                                            int margin_cells = 2);

struct ShiftResult {
    double shift = 0.0;  // b(x, y + shift) ~ a(x, y)
    VerificationReport report;
};

ShiftResult check_shift_uniqueness(const Field2D& a, const Field2D& b, const PlaneGrid& grid, double tol);

}  // namespace conical
