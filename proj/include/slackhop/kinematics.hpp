#pragma once

// Virtual-leg kinematics of the pantograph leg.
//
// The three-segment pantograph is reduced to a symmetric two-segment virtual
// leg, l(alpha) = 2 * l_eff * sin(alpha / 2), where l_eff is chosen so that the
// rest angle maps onto the resting leg length. Knee torque and leg-axis force
// are related through the virtual-leg Jacobian dl/dalpha.

#include <cmath>
#include <string>

#include "errors.hpp"
#include "units.hpp"

namespace slackhop {

struct LegGeometry {
    double l0 = 0.310;   ///< resting leg length [m]
    double l1 = 0.150;   ///< segment lengths [m]
    double l2 = 0.150;
    double l3 = 0.150;
    double r_k = 0.030;  ///< knee spring cam radius [m]
    double r_d = 0.020;  ///< knee damper cam radius [m]
    double r_pk = 0.032; ///< bi-articular insertion radius [m]; housed, not used by the model
    double alpha0 = deg_to_rad(100.0);  ///< knee rest angle [rad]

    /// Effective virtual-segment length [m].
    double l_eff() const { return l0 / (2.0 * std::sin(0.5 * alpha0)); }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw ConfigError(std::string("geometry.") + name, "must be > 0");
        };
        positive(l0, "l0");
        positive(l1, "l1");
        positive(l2, "l2");
        positive(l3, "l3");
        positive(r_k, "r_k");
        positive(r_d, "r_d");
        positive(r_pk, "r_pk");
        if (!(alpha0 > 0.0 && alpha0 < pi)) throw ConfigError("geometry.alpha0", "must lie in (0, pi)");
    }

    bool operator==(const LegGeometry&) const = default;
};

namespace detail {
inline void require_open_angle(double alpha) {
    if (!(alpha > 0.0 && alpha < pi))
        throw DomainError("knee angle " + std::to_string(alpha) + " rad outside (0, pi)");
}
}  // namespace detail

inline double leg_length(const LegGeometry& geom, double alpha) {
    detail::require_open_angle(alpha);
    return 2.0 * geom.l_eff() * std::sin(0.5 * alpha);
}

/// dl/dalpha [m/rad]; strictly positive on (0, pi).
inline double leg_jacobian(const LegGeometry& geom, double alpha) {
    detail::require_open_angle(alpha);
    return geom.l_eff() * std::cos(0.5 * alpha);
}

/// Inverse of leg_length on (0, 2 * l_eff).
inline double alpha_of_length(const LegGeometry& geom, double length) {
    const double reach = 2.0 * geom.l_eff();
    if (!(length > 0.0 && length < reach))
        throw DomainError("leg length " + std::to_string(length) + " m outside (0, " + std::to_string(reach) + ")");
    return 2.0 * std::asin(length / reach);
}

/// Tendon pull-in for knee flexion below the rest angle. Tendons only carry
/// tension, so hyperextension gives zero excursion.
inline double tendon_excursion(double radius, double alpha, double alpha0) {
    const double x = radius * (alpha0 - alpha);
    return x > 0.0 ? x : 0.0;
}

/// Axial leg force from the net knee extension torque. Positive pushes the hip
/// away from the foot.
inline double knee_torque_to_axial_force(const LegGeometry& geom, double alpha, double tau_total) {
    constexpr double min_jacobian = 1e-9;
    const double jac = leg_jacobian(geom, alpha);
    if (jac < min_jacobian) throw SingularityError("leg Jacobian vanishes near full extension");
    return tau_total / jac;
}

}  // namespace slackhop
