#pragma once

// Feed-forward controllers. Outputs depend on time (and, for the hip PD, the
// measured hip angle) only; contact and terrain are never observed.

#include <algorithm>
#include <cmath>
#include <limits>

#include "actuation.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace slackhop {

/// Periodic rectangular pulse train. The pulse is on while
/// frac(frequency * t + phase_offset) lies in [pulse_start, pulse_start + duty),
/// wrapping around the cycle end.
struct SquareWave {
    double frequency = 1.0;
    double amplitude = 0.0;
    double phase_offset = 0.0;
    double pulse_start = 0.0;
    double duty = 0.5;

    double cycle_fraction(double t) const {
        const double s = frequency * t + phase_offset;
        return s - std::floor(s);
    }

    bool on(double t) const {
        double rel = cycle_fraction(t) - pulse_start;
        rel -= std::floor(rel);
        return rel < duty;
    }

    double operator()(double t) const { return on(t) ? amplitude : 0.0; }

    /// First rising or falling edge strictly after t.
    double next_edge_after(double t) const {
        const double s = frequency * t + phase_offset;
        double best = std::numeric_limits<double>::infinity();
        for (double edge : {pulse_start, pulse_start + duty}) {
            const double k = std::floor(s - edge) + 1.0;
            double te = (k + edge - phase_offset) / frequency;
            if (te <= t) te = (k + 1.0 + edge - phase_offset) / frequency;
            best = std::min(best, te);
        }
        return best;
    }
};

struct VerticalSchedule {
    double f_v = 2.2;      ///< hopping frequency [Hz]
    double tau_v = 4.0;    ///< knee push-off torque [N m]
    double duty = 0.22;    ///< push-off fraction of the cycle
    double phase0 = 0.55;  ///< cycle phase at t = 0

    void validate() const {
        if (!(f_v > 0.0)) throw ConfigError("controller.f_v", "must be > 0");
        if (!(duty > 0.0 && duty < 1.0)) throw ConfigError("controller.duty", "must lie in (0, 1)");
        if (!(tau_v >= 0.0)) throw ConfigError("controller.tau_v", "must be >= 0");
    }
    bool operator==(const VerticalSchedule&) const = default;
};

struct PdGains {
    double kp = 0.0;  ///< [N m/rad]
    double kd = 0.0;  ///< [N m s/rad]
    bool operator==(const PdGains&) const = default;
};

/// Hip angles are positive with the foot ahead of the hip, so the
/// A_hip cos(Phi) reference retracts the leg while Phi runs through [0, pi).
struct CpgParams {
    double A_hip = deg_to_rad(18.0);
    double O_hip = deg_to_rad(2.0);
    double f_f = 1.85;               ///< [Hz]
    double D_vir = 0.4;              ///< virtual duty factor
    double tau_f = 1.3;              ///< knee push-off torque [N m]
    double knee_phase_shift = 0.75;
    double knee_duty = 0.2;
    double phase0 = 0.0;             ///< oscillator cycle fraction at t = 0
    double swing_inertia = 0.005;    ///< leg inertia about the hip used for flight torque [kg m^2]
    PdGains hip_gains{10.0, 1.5};

    void validate() const {
        if (!(A_hip >= 0.0)) throw ConfigError("controller.A_hip", "must be >= 0");
        if (!(D_vir > 0.0 && D_vir < 1.0)) throw ConfigError("controller.D_vir", "must lie in (0, 1)");
        if (!(f_f > 0.0)) throw ConfigError("controller.f_f", "must be > 0");
        if (!(knee_duty > 0.0 && knee_duty < 1.0)) throw ConfigError("controller.knee_duty", "must lie in (0, 1)");
        if (!(phase0 >= 0.0 && phase0 < 1.0)) throw ConfigError("controller.phase0", "must lie in [0, 1)");
        if (!(tau_f >= 0.0)) throw ConfigError("controller.tau_f", "must be >= 0");
        if (!(swing_inertia >= 0.0)) throw ConfigError("controller.swing_inertia", "must be >= 0");
        if (!(hip_gains.kp >= 0.0 && hip_gains.kd >= 0.0)) throw ConfigError("controller.hip_gains", "must be >= 0");
    }
    bool operator==(const CpgParams&) const = default;
};

/// Critically damped derivative gain for a joint of the given inertia.
inline double critical_kd(double kp, double inertia) { return 2.0 * std::sqrt(kp * inertia); }

struct CpgState {
    double phi = 0.0;  ///< linearly progressing oscillator phase [rad]
    double Phi = 0.0;  ///< warped hip phase [rad]
};

/// Piecewise-linear phase warp. The first half of the hip cycle (Phi in
/// [0, pi)) takes the fraction D_vir of the oscillator period.
inline double warp_phase(double D_vir, double phi) {
    phi = std::fmod(phi, two_pi);
    if (phi < 0.0) phi += two_pi;
    if (phi < two_pi * D_vir) return phi / (2.0 * D_vir);
    return (phi + two_pi * (1.0 - 2.0 * D_vir)) / (2.0 * (1.0 - D_vir));
}

inline double warp_phase(const CpgParams& p, double phi) { return warp_phase(p.D_vir, phi); }

/// dPhi/dphi at phi.
inline double warp_rate(double D_vir, double phi) {
    phi = std::fmod(phi, two_pi);
    if (phi < 0.0) phi += two_pi;
    return phi < two_pi * D_vir ? 1.0 / (2.0 * D_vir) : 1.0 / (2.0 * (1.0 - D_vir));
}

inline double hip_reference(const CpgParams& p, double Phi) { return p.A_hip * std::cos(Phi) + p.O_hip; }

inline CpgState cpg_state_at(const CpgParams& p, double t) {
    const double cycles = p.f_f * t + p.phase0;
    const double phi = two_pi * (cycles - std::floor(cycles));
    return {phi, warp_phase(p, phi)};
}

struct HipTarget {
    double angle = 0.0;  ///< [rad]
    double rate = 0.0;   ///< [rad/s]
    double accel = 0.0;  ///< [rad/s^2]
};

inline HipTarget hip_target_at(const CpgParams& p, double t) {
    const CpgState s = cpg_state_at(p, t);
    const double Phi_dot = two_pi * p.f_f * warp_rate(p.D_vir, s.phi);
    return {hip_reference(p, s.Phi), -p.A_hip * std::sin(s.Phi) * Phi_dot,
            -p.A_hip * std::cos(s.Phi) * Phi_dot * Phi_dot};
}

/// Next time after t where the warp switches branch or the cycle restarts.
/// The hip reference acceleration jumps at these instants.
inline double next_warp_edge_after(const CpgParams& p, double t) {
    const double c = p.f_f * t + p.phase0;
    const double k = std::floor(c);
    double next = (c - k < p.D_vir) ? k + p.D_vir : k + 1.0;
    if ((next - p.phase0) / p.f_f <= t) next = (next == k + p.D_vir) ? k + 1.0 : k + 1.0 + p.D_vir;
    return (next - p.phase0) / p.f_f;
}

inline SquareWave knee_wave(const VerticalSchedule& s) { return {s.f_v, s.tau_v, s.phase0, 0.0, s.duty}; }

inline SquareWave knee_wave(const CpgParams& p) { return {p.f_f, p.tau_f, p.knee_phase_shift + p.phase0, 0.0, p.knee_duty}; }

inline double knee_schedule(const VerticalSchedule& s, double t) { return knee_wave(s)(t); }

inline double knee_schedule(const CpgParams& p, double t) { return knee_wave(p)(t); }

/// PD hip torque, limited to what the hip drive can deliver.
inline double hip_pd(const PdGains& g, double theta_ref, double theta, double theta_dot_ref, double theta_dot,
                     const MotorParams& motor) {
    const double tau = g.kp * (theta_ref - theta) + g.kd * (theta_dot_ref - theta_dot);
    return joint_torque(motor, tau, Joint::hip);
}

}  // namespace slackhop
