#pragma once

// Complete description of one deterministic trial.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "actuation.hpp"
#include "compliance.hpp"
#include "control.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "terrain.hpp"
#include "units.hpp"

namespace slackhop {

struct BodyParams {
    double m = 1.94;  ///< [kg]
    double g = 9.81;  ///< [m/s^2]
    double mu = 0.6;  ///< foot friction coefficient, forward rig only
    double slip_hold = 0.010;  ///< time the friction limit must stay exceeded to count as a slip [s]

    static BodyParams vertical_rig() { return {1.94, 9.81, 0.6}; }
    static BodyParams forward_rig() { return {0.94, 9.81, 0.6}; }

    void validate() const {
        if (!(m > 0.0)) throw ConfigError("body.m", "must be > 0");
        if (!(g > 0.0)) throw ConfigError("body.g", "must be > 0");
        if (!(mu >= 0.0)) throw ConfigError("body.mu", "must be >= 0");
        if (!(slip_hold >= 0.0)) throw ConfigError("body.slip_hold", "must be >= 0");
    }
    bool operator==(const BodyParams&) const = default;
};

struct IntegratorConfig {
    double dt = 1e-4;            ///< [s]
    double event_tol = 1e-7;     ///< [s]
    double sample_rate = 1000.0; ///< trace sampling [Hz]

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("integrator.dt", "must be > 0");
        if (!(event_tol > 0.0 && event_tol < dt)) throw ConfigError("integrator.event_tol", "must lie in (0, dt)");
        if (!(sample_rate > 0.0)) throw ConfigError("integrator.sample_rate", "must be > 0");
    }
    bool operator==(const IntegratorConfig&) const = default;
};

struct AnalysisOptions {
    double onset_threshold = 0.5;  ///< force onset for the engagement delay [N]
    int steady_window = 10;        ///< steps used for standby values and the reference apex
    double recovery_band = 0.04;   ///< relative apex band for recovery
    int failure_window = 5;        ///< steps after an encounter that count towards a failure
    double stop_progress = 0.010;  ///< minimum progress per controller cycle [m]
    int stop_cycles = 5;           ///< consecutive stalled cycles that end a forward trial

    void validate() const {
        if (!(onset_threshold >= 0.0)) throw ConfigError("analysis.onset_threshold", "must be >= 0");
        if (steady_window < 3) throw ConfigError("analysis.steady_window", "must be >= 3");
        if (!(recovery_band > 0.0)) throw ConfigError("analysis.recovery_band", "must be > 0");
        if (failure_window < 1) throw ConfigError("analysis.failure_window", "must be >= 1");
        if (!(stop_progress >= 0.0)) throw ConfigError("analysis.stop_progress", "must be >= 0");
        if (stop_cycles < 1) throw ConfigError("analysis.stop_cycles", "must be >= 1");
    }
    bool operator==(const AnalysisOptions&) const = default;
};

enum class Experiment { vertical, forward };

inline const char* to_string(Experiment e) { return e == Experiment::vertical ? "vertical" : "forward"; }

inline Experiment experiment_from_string(const std::string& s) {
    if (s == "vertical") return Experiment::vertical;
    if (s == "forward") return Experiment::forward;
    throw ConfigError("experiment", "must be 'vertical' or 'forward'");
}

/// Knee push-off torque for a given slack in the vertical rig.
struct SlackTorque {
    double slack = 0.0;  ///< [m]
    double tau = 0.0;    ///< [N m]
    bool operator==(const SlackTorque&) const = default;
};

struct ScenarioConfig {
    std::string name = "vertical";
    Experiment experiment = Experiment::vertical;
    BodyParams body = BodyParams::vertical_rig();
    LegGeometry geometry;
    SpringParams spring;
    DamperParams damper;
    MotorParams motor;
    VerticalSchedule vertical;
    /// Overrides vertical.tau_v by linear interpolation in slack when non-empty.
    /// The larger torque goes with the larger slack; the measured hop heights
    /// fall from about 55 mm at 10 mm slack to about 43 mm without slack.
    std::vector<SlackTorque> knee_torque_by_slack{{0.0, 4.0}, {0.010, 4.3}};
    CpgParams cpg;
    TerrainProfile terrain;
    IntegratorConfig integrator;
    AnalysisOptions analysis;

    int repetitions = 1;
    std::uint64_t seed = 0;
    double duration = 60.0;       ///< vertical trial length [s]
    double revolutions = 6.0;     ///< forward trial length [track revolutions]
    double max_duration = 400.0;  ///< forward safety limit [s]
    double drop_height = 0.03;    ///< initial foot clearance [m]
    double initial_speed = 0.6;   ///< forward initial horizontal speed [m/s]
    double initial_vy = 0.0;      ///< initial vertical speed [m/s]
    double alpha_min = deg_to_rad(40.0);
    bool record_trace = true;

    void validate() const {
        body.validate();
        geometry.validate();
        spring.validate();
        damper.validate();
        motor.validate();
        integrator.validate();
        analysis.validate();
        terrain.validate();
        if (experiment == Experiment::vertical) {
            vertical.validate();
            if (terrain.kind != TerrainKind::flat && terrain.kind != TerrainKind::step_down)
                throw ConfigError("terrain.kind", "vertical hopping supports flat or step_down terrain");
            if (!(duration > 0.0)) throw ConfigError("duration", "must be > 0");
        } else {
            cpg.validate();
            if (terrain.kind == TerrainKind::step_down)
                throw ConfigError("terrain.kind", "step_down terrain belongs to the vertical rig");
            if (!(revolutions > 0.0)) throw ConfigError("revolutions", "must be > 0");
            if (!(max_duration > 0.0)) throw ConfigError("max_duration", "must be > 0");
        }
        for (std::size_t i = 0; i < knee_torque_by_slack.size(); ++i) {
            const auto& e = knee_torque_by_slack[i];
            if (!(e.slack >= 0.0 && e.tau >= 0.0))
                throw ConfigError("knee_torque_by_slack", "entries must be non-negative");
            if (i > 0 && !(e.slack > knee_torque_by_slack[i - 1].slack))
                throw ConfigError("knee_torque_by_slack", "slack values must be strictly increasing");
        }
        if (repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
        if (!(drop_height >= 0.0)) throw ConfigError("drop_height", "must be >= 0");
        if (!(alpha_min > 0.0 && alpha_min < geometry.alpha0)) throw ConfigError("alpha_min", "must lie in (0, alpha0)");
    }

    bool operator==(const ScenarioConfig&) const = default;
};

inline ScenarioConfig vertical_scenario() { return ScenarioConfig{}; }

/// Boom-mounted forward rig on flat track. The knee drivetrain loss is left
/// out here: with the 1.3 N m push-off any loss above ~0.02 N m s/rad stalls
/// the gait.
inline ScenarioConfig forward_scenario() {
    ScenarioConfig c;
    c.name = "forward";
    c.experiment = Experiment::forward;
    c.body = BodyParams::forward_rig();
    c.motor.knee_drag = 0.0;
    c.knee_torque_by_slack.clear();
    c.terrain.kind = TerrainKind::flat;
    // Starts at a flight apex in the last quarter of the oscillator cycle,
    // close to the steady gait. From rest the low-slack legs settle into a
    // stalled double hop instead.
    c.cpg.phase0 = 0.75;
    c.drop_height = 0.15;
    c.initial_speed = 1.0;
    c.initial_vy = 0.0;
    return c;
}

/// Vertical push-off torque after applying the slack map.
inline double vertical_knee_torque(const ScenarioConfig& c) {
    const auto& map = c.knee_torque_by_slack;
    if (map.empty()) return c.vertical.tau_v;
    const double s = c.damper.slack;
    if (s <= map.front().slack) return map.front().tau;
    if (s >= map.back().slack) return map.back().tau;
    auto hi = std::upper_bound(map.begin(), map.end(), s, [](double v, const SlackTorque& e) { return v < e.slack; });
    auto lo = hi - 1;
    const double w = (s - lo->slack) / (hi->slack - lo->slack);
    return lo->tau + w * (hi->tau - lo->tau);
}

/// Offsets that distinguish repetitions of one cell. The hardware repeats
/// differed by the uncontrolled phase between gait and perturbation.
struct RepetitionOffsets {
    int removal_delay = 0;      ///< extra apexes before the block is removed
    double extra_drop = 0.0;    ///< added to the initial clearance [m]
    double terrain_shift = 0.0; ///< added to the terrain start [m]
};

inline constexpr double nominal_step_length = 0.43;

inline RepetitionOffsets repetition_offsets(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Explicit conversion keeps the stream identical across standard libraries.
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    RepetitionOffsets o;
    o.removal_delay = static_cast<int>(rng() % 4);
    o.extra_drop = 0.02 * unit();
    o.terrain_shift = nominal_step_length * unit();
    return o;
}

}  // namespace slackhop
