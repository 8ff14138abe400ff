#pragma once

// Knee spring and slack-tendon damper.
//
// The damper is coupled to the knee through a tendon with adjustable slack.
// The piston only moves once the tendon excursion x_d exceeds the slack, and
// the roller on the piston can push but not pull, so the damper force is
// unilateral. The dissipation ledger counts the damper force minus the
// recovery-spring share; the recovery spring stores and returns energy.

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace slackhop {

struct SpringParams {
    double k_k = 10900.0;  ///< knee spring stiffness [N/m]

    void validate() const {
        if (!(k_k > 0.0)) throw ConfigError("spring.k_k", "must be > 0");
    }
    bool operator==(const SpringParams&) const = default;
};

struct DamperParams {
    double c = 209.0;        ///< piston force per unit piston speed [N s/m], calibrated
    double exponent = 1.0;   ///< velocity-law exponent
    double k_rec = 1090.0;   ///< internal recovery spring [N/m], calibrated
    double slack = 0.0;      ///< tendon slack [m]

    void validate() const {
        if (!(c >= 0.0)) throw ConfigError("damper.c", "must be >= 0");
        if (!(exponent > 0.0)) throw ConfigError("damper.exponent", "must be > 0");
        if (!(k_rec >= 0.0)) throw ConfigError("damper.k_rec", "must be >= 0");
        if (!(slack >= 0.0)) throw ConfigError("damper.slack", "must be >= 0");
    }
    bool operator==(const DamperParams&) const = default;
};

struct DamperState {
    bool engaged = false;
    double piston_pos = 0.0;   ///< [m]
    double piston_vel = 0.0;   ///< [m/s]
    double dissipated = 0.0;   ///< viscous work for the current stance [J]
};

inline double spring_force(const SpringParams& p, double x_s) { return p.k_k * x_s; }

namespace detail {
inline double velocity_law(const DamperParams& p, double v) {
    if (p.exponent == 1.0) return p.c * v;
    return std::copysign(p.c * std::pow(std::abs(v), p.exponent), v);
}
}  // namespace detail

/// Force the piston transmits back to the tendon [N], >= 0.
inline double damper_force(const DamperParams& p, const DamperState& st) {
    if (!st.engaged) return 0.0;
    const double f = detail::velocity_law(p, st.piston_vel) + p.k_rec * st.piston_pos;
    return std::max(0.0, f);
}

/// Share of damper_force that is dissipated: the total minus the recovery spring.
/// Equals the velocity law while the roller stays in contact, and -k_rec * x
/// when the piston is returning faster than the tendon allows (force clamped).
inline double damper_viscous_force(const DamperParams& p, const DamperState& st) {
    if (!st.engaged) return 0.0;
    return damper_force(p, st) - p.k_rec * st.piston_pos;
}

/// State implied by a tendon excursion and its rate.
inline DamperState damper_state_at(const DamperParams& p, double x_d, double x_d_vel) {
    DamperState st;
    st.piston_pos = std::max(0.0, x_d - p.slack);
    st.engaged = st.piston_pos > 0.0;
    st.piston_vel = st.engaged ? x_d_vel : 0.0;
    return st;
}

/// Advance the damper to a new tendon excursion, accumulating the dissipated
/// work with the trapezoidal rule over the piston displacement.
inline DamperState update_damper(const DamperParams& p, double x_d, double x_d_vel, const DamperState& st,
                                 double dt) {
    if (!(dt > 0.0)) throw DomainError("update_damper: dt must be > 0");
    DamperState next = damper_state_at(p, x_d, x_d_vel);
    const double f_prev = damper_viscous_force(p, st);
    const double f_next = damper_viscous_force(p, next);
    next.dissipated = st.dissipated + 0.5 * (f_prev + f_next) * (next.piston_pos - st.piston_pos);
    return next;
}

/// Energy held by the damper's recovery spring [J].
inline double recovery_spring_energy(const DamperParams& p, double piston_pos) {
    return 0.5 * p.k_rec * piston_pos * piston_pos;
}

}  // namespace slackhop
