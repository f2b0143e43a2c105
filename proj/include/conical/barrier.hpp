#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "conical/numerics.hpp"
#include "conical/pulsating_front.hpp"
#include "conical/reaction_model.hpp"

namespace conical {

struct PlaneGrid {
    double x_max = 8.0;
    double y_max = 12.0;
    int nx = 512;
    int ny = 512;

    double dx() const { return 2.0 * x_max / nx; }
    double dy() const { return 2.0 * y_max / ny; }
    double x(int i) const { return -x_max + i * dx(); }
    double y(int j) const { return -y_max + j * dy(); }
    // (nx + 1) x (ny + 1) nodes including the boundary.
    Field2D make_field(double fill = 0.0) const { return Field2D(nx + 1, ny + 1, fill); }
    bool interior(int i, int j) const { return i > 0 && i < nx && j > 0 && j < ny; }
    void validate(double alpha) const;
};

nlohmann::json to_json(const PlaneGrid& g);

// ============================================================================
// h-ODE: beta h'' + f(h) = 0, h(theta/2) = theta, h'(theta/2) = 2
// ============================================================================

struct HOptions {
    int nodes = 4096;
    double tol = 1e-9;
};

struct HProfile {
    double beta = 0.0;
    double theta = 0.0;
    std::vector<double> h_nodes;  // uniform on [theta/2, 2]
    std::vector<double> h_values, h_derivative, h_second;
    std::vector<double> z_nodes;  // uniform on [0, 2]
    std::vector<double> H_values;
    bool extended = false;
    bool identity = false;
    AdaptiveStats stats;

    double h(double z) const;
    double H(double z) const;
    double dH(double z) const;
    double d2H(double z) const;
};

HProfile integrate_h(double beta, double theta, const CombustionNonlinearity& f, const HOptions& opts = {});
HProfile extend_H(HProfile profile);
HProfile identity_H();

struct LemmaReport {
    double min_forward_difference = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double max_second_difference = 0.0;  // of H on [0,2]
    bool increasing = false;
    bool h1_above_one = false;
    bool h2_above_one = false;
    bool concave = false;

    bool ok() const { return increasing && h1_above_one && h2_above_one && concave; }
};

LemmaReport check_h_lemma(const HProfile& profile);
nlohmann::json to_json(const LemmaReport& r);

// Smallest beta for which the IVP solution can reach h = 1 monotonically:
// beta h'^2 / 2 + F(h) is conserved, so h' > 0 up to h = 1 needs 2 beta > F(1).
double h_monotonicity_threshold(const CombustionNonlinearity& f);

// ============================================================================
// Band constants, components, barriers
// ============================================================================

struct BandConstants {
    double M0 = 0.0, M0_prime = 0.0;
    double M1 = 0.0, M2 = 0.0;
    double M3 = 0.0, M4 = 0.0;
    double mu = 0.0, mu0 = 0.0;
    double beta = 0.0;
};

nlohmann::json to_json(const BandConstants& b);

BandConstants measure_band_constants(const FrontProfile& phi, const FrontProfile& psi, double theta, double alpha);
double choose_beta(const BandConstants& constants, double alpha);

struct Components {
    Field2D phi1, phi2;
    Field2D dphi1, dphi2;  // derivative of phi, psi in their second argument
};

Components build_components(const FrontProfile& phi, const FrontProfile& psi, double alpha, const PlaneGrid& grid);
Field2D build_subsolution(const Field2D& phi1, const Field2D& phi2);
Field2D build_supersolution(const HProfile& H, const Field2D& phi1, const Field2D& phi2, int* clamped = nullptr);

enum class Region { C, Z, H };
std::string to_string(Region r);

Region classify_region(double x, double y, const BandConstants& constants, double alpha);

// Delta u + (q(x) - c) u_y + f(u) at interior nodes; zero on the boundary.
Field2D residual(const Field2D& field, double c, const ShearFlow& flow, const CombustionNonlinearity& f,
                 const PlaneGrid& grid);

// Max |residual| of the planar oracle front lifted to the grid (alpha = pi/2, q = 0).
double calibrate_discretization(const PlanarFront& oracle, const CombustionNonlinearity& f, const PlaneGrid& grid);

struct RegionStats {
    std::string name;
    int nodes = 0;
    double max_residual = -INFINITY;
    int violations = 0;
};

struct CaseReport {
    double eps = 0.0;
    std::vector<RegionStats> regions;  // C1a, C1b, Z, H
    int case2_derivative_violations = 0;
    int case3_reaction_nonzero = 0;
    int c_outside_E1 = 0;

    int residual_violations() const;
    bool ok() const;
};

nlohmann::json to_json(const CaseReport& r);

CaseReport certify_supersolution_cases(const Field2D& super, const Components& components,
                                       const BandConstants& constants, const HProfile& H,
                                       const Field2D& super_residual, const CombustionNonlinearity& f,
                                       const PlaneGrid& grid, double alpha, double eps);

struct BarrierPair {
    Field2D sub, super;
    BandConstants constants;
    Components components;
};

}  // namespace conical
