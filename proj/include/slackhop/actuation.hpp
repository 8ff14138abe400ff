#pragma once

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "units.hpp"

namespace slackhop {

enum class Joint { hip, knee };

struct MotorParams {
    double kt = 60.0 / (two_pi * 115.0);  ///< torque constant [N m/A], from the KV115 rating
    double R = 0.862;                      ///< winding resistance [ohm], calibrated
    double tau_max_motor = 1.3;            ///< rated motor torque [N m]
    double gear_hip = 5.0;
    double gear_knee = 5.0 * 25.0 / 12.0;
    bool allow_regen = false;
    /// Viscous loss of the back-driven knee gear train, referred to the joint [N m s/rad].
    double knee_drag = 0.45;

    double gear(Joint j) const { return j == Joint::hip ? gear_hip : gear_knee; }
    double joint_torque_limit(Joint j) const { return tau_max_motor * gear(j); }

    void validate() const {
        if (!(kt > 0.0)) throw ConfigError("motor.kt", "must be > 0");
        if (!(R >= 0.0)) throw ConfigError("motor.R", "must be >= 0");
        if (!(tau_max_motor > 0.0)) throw ConfigError("motor.tau_max_motor", "must be > 0");
        if (!(gear_hip >= 1.0)) throw ConfigError("motor.gear_hip", "must be >= 1");
        if (!(gear_knee >= 1.0)) throw ConfigError("motor.gear_knee", "must be >= 1");
        if (!(knee_drag >= 0.0)) throw ConfigError("motor.knee_drag", "must be >= 0");
    }
    bool operator==(const MotorParams&) const = default;
};

/// Joint torque the geared motor can deliver for a commanded joint torque.
inline double joint_torque(const MotorParams& p, double tau_cmd_joint, Joint which) {
    const double limit = p.joint_torque_limit(which);
    return std::clamp(tau_cmd_joint, -limit, limit);
}

/// Electrical input power [W] for a joint torque and joint speed: shaft power
/// (negative part dropped without regeneration) plus winding Joule loss.
inline double electrical_power(const MotorParams& p, double tau_joint, double omega_joint, Joint which) {
    const double ratio = p.gear(which);
    const double tau_m = tau_joint / ratio;
    const double omega_m = omega_joint * ratio;
    const double current = tau_m / p.kt;
    const double shaft = tau_m * omega_m;
    const double joule = current * current * p.R;
    return (p.allow_regen ? shaft : std::max(0.0, shaft)) + joule;
}

/// Joule-loss coefficient: electrical_power = shaft part + joule_factor * R.
inline double joule_factor(const MotorParams& p, double tau_joint, Joint which) {
    const double current = tau_joint / p.gear(which) / p.kt;
    return current * current;
}

}  // namespace slackhop
