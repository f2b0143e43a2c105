#pragma once

#include <cmath>

#include "conical/barrier.hpp"
#include "conical/pulsating_front.hpp"

namespace fixtures {

// Independent values from scipy (solve_ivp / brentq, rtol 1e-12) for f = (u - 0.3)(1 - u) on (0.3, 1).
inline constexpr double kPlanarSpeed = 0.49537020727104486;
inline constexpr double kLevelHalf = 1.144488647558937;       // Y with U(Y) = 1/2 when U(0) = 0.3
inline constexpr double kSlopeAtHalf = 0.18488559253255762;   // U' there
inline constexpr double kH1Beta001 = -0.47514820092424653;    // h(1), beta = 0.01
inline constexpr double kH2Beta001 = -2.4751482008900516;     // h(2), beta = 0.01
inline constexpr double kH1Beta003 = 1.088106313538917;       // h(1), beta = 0.03
inline constexpr double kH2Beta003 = 1.5227198071682415;      // h(2), beta = 0.03

inline const conical::PlanarFront& planar() {
    static conical::PlanarFront p = conical::planar_front_speed_1d(conical::CombustionNonlinearity::quadratic(0.3));
    return p;
}

// max{U(x cos a + y sin a), U(-x cos a + y sin a)} built from the 1D front.
inline conical::Field2D conical_field(const conical::PlaneGrid& g, double alpha, double lift = 0.0) {
    const auto& p = planar();
    conical::Field2D u = g.make_field();
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double x = g.x(i), y = g.y(j) + lift;
            double a = p.value(x * std::cos(alpha) + y * std::sin(alpha));
            double b = p.value(-x * std::cos(alpha) + y * std::sin(alpha));
            u(i, j) = std::max(a, b);
        }
    return u;
}

}  // namespace fixtures
