#pragma once

// Hybrid flight/stance simulation of the hopping leg.
//
// The hip carries all mass and the leg is massless. In flight the body is
// ballistic and the leg sits at rest length. In stance the foot is anchored
// and the leg acts on the body along the hip-foot axis (knee spring, damper,
// knee motor) and, on the forward rig, across it (hip torque / leg length).
// Integration is fixed-step RK4. Steps end exactly on controller switching
// instants and trace sample times; state guards are located by bisection on
// the step length.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actuation.hpp"
#include "compliance.hpp"
#include "control.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "scenario.hpp"
#include "terrain.hpp"

namespace slackhop {

enum class Mode { flight, stance };

enum class TrialStatus { ok, bottomed_out, stopped, event_error };

inline const char* to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::ok: return "ok";
        case TrialStatus::bottomed_out: return "bottomed_out";
        case TrialStatus::stopped: return "stopped";
        case TrialStatus::event_error: return "event_error";
    }
    return "ok";
}

inline constexpr double missing = std::numeric_limits<double>::quiet_NaN();

struct TraceSample {
    double t = 0.0;
    double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
    double alpha = 0.0;
    double grf = 0.0;    ///< normal ground reaction force [N]
    double grf_x = 0.0;  ///< tangential ground reaction force [N]
    double f_spring = 0.0, f_damper = 0.0, f_viscous = 0.0, piston_pos = 0.0;
    double tau_hip = 0.0, tau_knee = 0.0, p_elec = 0.0;
    bool stance = false;
    // Energy ledger terms [J].
    double e_mech = 0.0, e_lost = 0.0, w_motor = 0.0, e_elec = 0.0;
};

/// Step k is stance k followed by flight k, whose apex is the step's apex.
struct StepSummary {
    int index = 0;  ///< 1-based
    double touchdown_t = missing, liftoff_t = missing;
    double apex = missing;  ///< apex hip height above the stance ground, minus rest length [m]
    double apex_t = missing;
    double touchdown_x = missing, ground_height = 0.0, step_length = missing;
    double E_d = 0.0;       ///< viscous damper work during stance [J]
    double delay = missing;     ///< spring-to-damper onset delay [s]; NaN when the damper never fired
    double E_elec = missing;    ///< electrical energy from this touchdown to the next [J]
    double E_joule = missing;   ///< integral of squared motor currents over the same span [A^2 s]
    double cycle_time = missing;
    double min_alpha = missing;
    bool slip = false, stop = false, perturbed = false;
};

struct TrialRecord {
    Experiment experiment = Experiment::vertical;
    TrialStatus status = TrialStatus::ok;
    std::string message;
    std::vector<TraceSample> trace;
    std::vector<StepSummary> steps;
    double t_end = 0.0;
    double x_start = 0.0, x_end = 0.0;
    double e_elec_total = 0.0;
    double e_joule_total = 0.0;      ///< integral of squared motor currents [A^2 s]
    double peak_energy = 0.0;        ///< maximum mechanical energy seen [J]
    double max_ledger_error = 0.0;   ///< worst energy-ledger drift [J]
    int removal_apex = -1;           ///< apex count at which the block was removed
    double tau_knee_cmd = 0.0;       ///< push-off torque used [N m]
    RepetitionOffsets offsets;
};

/// Bisection for the first point where fired(s) holds on (lo, hi]. Expects
/// fired(lo) false and fired(hi) true and returns a point on the fired side
/// no more than tol past the switch.
template <class Pred>
double locate_event(Pred&& fired, double lo, double hi, double tol) {
    if (!(hi > lo)) throw EventError("locate_event: empty bracket");
    if (fired(lo) || !fired(hi)) throw EventError("locate_event: guard does not change sign on the bracket");
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fired(mid))
            hi = mid;
        else
            lo = mid;
    }
    if (hi - lo > tol) throw EventError("locate_event: bisection did not converge");
    return hi;
}

namespace detail {

enum Slot { X, Y, VX, VY, E_VISC, E_DRAG, W_MOTOR, E_ELEC, E_JOULE, N_SLOTS };
using StateVec = std::array<double, N_SLOTS>;

inline StateVec axpy(const StateVec& a, double h, const StateVec& b) {
    StateVec r;
    for (int i = 0; i < N_SLOTS; ++i) r[i] = a[i] + h * b[i];
    return r;
}

/// Everything the model produces at one instant.
struct Eval {
    StateVec rate{};
    double l = 0.0, theta = 0.0, theta_dot = 0.0;
    double alpha = 0.0, alpha_dot = 0.0;
    double x_s = 0.0, x_d = 0.0, piston = 0.0;
    double f_spring = 0.0, f_damper = 0.0, f_viscous = 0.0;
    double f_axial = 0.0, fx = 0.0, fy = 0.0;
    double tau_hip = 0.0, tau_knee = 0.0, p_elec = 0.0;
    double e_store = 0.0;  ///< spring plus recovery-spring energy [J]
};

enum class Guard { bottom_out, fall, liftoff_length, liftoff_force, engage, disengage, touchdown, apex };

class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg) : c_(cfg) {
        c_.validate();
        forward_ = c_.experiment == Experiment::forward;
        rec_.experiment = c_.experiment;
        rec_.offsets = repetition_offsets(c_.seed);
        if (forward_) {
            c_.terrain.start += rec_.offsets.terrain_shift;
            knee_wave_ = knee_wave(c_.cpg);
        } else {
            c_.terrain.removal_step += rec_.offsets.removal_delay;
            VerticalSchedule v = c_.vertical;
            v.tau_v = vertical_knee_torque(c_);
            knee_wave_ = knee_wave(v);
        }
        rec_.tau_knee_cmd = knee_wave_.amplitude;
        l0_ = c_.geometry.l0;
        reach_ = 2.0 * c_.geometry.l_eff();
    }

    TrialRecord run() {
        init_state();
        const double dt = c_.integrator.dt;
        const double t_stop = forward_ ? c_.max_duration : c_.duration;
        const double x_goal = rec_.x_start + c_.revolutions * c_.terrain.track_length;
        const double sample_dt = 1.0 / c_.integrator.sample_rate;
        long sample_idx = 0;
        record_sample(sample_idx++);
        next_cycle_t_ = forward_ ? 1.0 / c_.cpg.f_f : std::numeric_limits<double>::infinity();
        cycle_x_ = s_[X];

        try {
            while (t_ < t_stop - 1e-12) {
                if (forward_ && s_[X] >= x_goal) break;
                const double t_sample = static_cast<double>(sample_idx) * sample_dt;
                double target = std::min({t_ + dt, t_sample, next_control_edge(t_), t_stop});
                if (forward_) target = std::min(target, next_cycle_t_);
                const double h = target - t_;
                const double knee = knee_wave_(t_ + 0.5 * h);

                const StateVec s_end = rk4(s_, t_, h, knee);
                auto [guard, h_evt] = earliest_guard(s_end, h, knee);
                if (guard) {
                    if (h_evt > 0.0)
                        instant_events_ = 0;
                    else if (++instant_events_ > 8)
                        throw EventError("mode switches chatter at t = " + std::to_string(t_) + " s");
                    if (h_evt > 0.0) {
                        s_ = rk4(s_, t_, h_evt, knee);
                        t_ = h_evt == h ? target : t_ + h_evt;
                    }
                    after_step(knee);
                    apply(*guard, knee);
                    if (rec_.status != TrialStatus::ok) break;
                } else {
                    s_ = s_end;
                    t_ = target;
                    after_step(knee);
                }
                if (t_ >= t_sample - 1e-12) {
                    t_ = std::max(t_, t_sample);
                    record_sample(sample_idx++);
                }
                if (forward_ && t_ >= next_cycle_t_ - 1e-12) {
                    cycle_boundary();
                    if (rec_.status != TrialStatus::ok) break;
                }
            }
            if (forward_ && rec_.status == TrialStatus::ok && s_[X] < x_goal) {
                rec_.status = TrialStatus::stopped;
                rec_.message = "time limit reached before the requested distance";
            }
        } catch (const std::logic_error& e) {
            rec_.status = TrialStatus::event_error;
            rec_.message = e.what();
        } catch (const std::runtime_error& e) {
            rec_.status = TrialStatus::event_error;
            rec_.message = e.what();
        }
        finish();
        return std::move(rec_);
    }

private:
    ScenarioConfig c_;
    bool forward_ = false;
    SquareWave knee_wave_;
    double l0_ = 0.0, reach_ = 0.0;

    TrialRecord rec_;
    StateVec s_{};
    double t_ = 0.0;
    Mode mode_ = Mode::flight;
    bool engaged_ = false;
    double foot_x_ = 0.0, foot_y_ = 0.0;
    int apex_count_ = 0;
    bool apex_done_ = true;
    bool td_armed_ = false;        ///< touchdown needs the foot to have been above the ground
    double slip_since_ = missing;  ///< start of the current over-friction interval
    bool pending_perturb_ = false;
    double reset_loss_ = 0.0;  ///< stored leg energy dropped or injected at mode switches [J]
    double ledger0_ = 0.0;
    double next_cycle_t_ = 0.0, cycle_x_ = 0.0;
    int stalled_cycles_ = 0;
    // Per-stance bookkeeping.
    double e_visc_td_ = 0.0, e_elec_td_ = 0.0, e_joule_td_ = 0.0;
    double spring_onset_ = missing, damper_onset_ = missing;
    int instant_events_ = 0;

    double ground(double x) const { return height_at(c_.terrain, x, apex_count_); }

    double next_control_edge(double t) const {
        double e = knee_wave_.next_edge_after(t + 1e-12);
        if (forward_) e = std::min(e, next_warp_edge_after(c_.cpg, t + 1e-12));
        return e;
    }

    double flight_theta(double t) const { return forward_ ? hip_target_at(c_.cpg, t).angle : 0.0; }

    void init_state() {
        s_.fill(0.0);
        s_[X] = 0.0;
        const double drop = c_.drop_height + (forward_ ? 0.0 : rec_.offsets.extra_drop);
        const double th = flight_theta(0.0);
        const double foot_x = s_[X] + l0_ * std::sin(th);
        s_[Y] = ground(foot_x) + l0_ * std::cos(th) + drop;
        s_[VX] = forward_ ? c_.initial_speed : 0.0;
        s_[VY] = c_.initial_vy;
        apex_done_ = !(s_[VY] > 0.0);
        td_armed_ = clearance(s_, t_) > 0.0;
        rec_.x_start = s_[X];
        ledger0_ = ledger(evaluate(s_, t_, 0.0));
        rec_.peak_energy = mech_energy(s_, evaluate(s_, t_, 0.0));
    }

    double mech_energy(const StateVec& s, const Eval& e) const {
        return 0.5 * c_.body.m * (s[VX] * s[VX] + s[VY] * s[VY]) + c_.body.m * c_.body.g * s[Y] + e.e_store;
    }

    double ledger(const Eval& e) const {
        return mech_energy(s_, e) + s_[E_VISC] + s_[E_DRAG] + reset_loss_ - s_[W_MOTOR];
    }

    Eval evaluate(const StateVec& s, double t, double knee) const {
        Eval e;
        const auto& m = c_.motor;
        e.tau_knee = knee;
        e.rate[X] = s[VX];
        e.rate[Y] = s[VY];
        if (mode_ == Mode::flight) {
            e.l = l0_;
            e.alpha = c_.geometry.alpha0;
            e.rate[VY] = -c_.body.g;
            double omega_hip = 0.0;
            if (forward_) {
                const HipTarget ref = hip_target_at(c_.cpg, t);
                e.theta = ref.angle;
                e.theta_dot = ref.rate;
                e.tau_hip = joint_torque(m, c_.cpg.swing_inertia * ref.accel, Joint::hip);
                omega_hip = ref.rate;
            }
            e.p_elec = electrical_power(m, e.tau_hip, omega_hip, Joint::hip) +
                       electrical_power(m, e.tau_knee, 0.0, Joint::knee);
            e.rate[E_ELEC] = e.p_elec;
            e.rate[E_JOULE] = joule_factor(m, e.tau_hip, Joint::hip) + joule_factor(m, e.tau_knee, Joint::knee);
            return e;
        }

        const auto& g = c_.geometry;
        const double dx = forward_ ? s[X] - foot_x_ : 0.0;
        const double dy = s[Y] - foot_y_;
        e.l = std::min(std::hypot(dx, dy), reach_ * (1.0 - 1e-12));
        if (!(e.l > 0.0)) throw SingularityError("leg length collapsed to zero");
        e.theta = std::atan2(-dx, dy);  // positive with the foot ahead of the hip
        const double l_dot = (dx * s[VX] + dy * s[VY]) / e.l;
        e.theta_dot = (dx * s[VY] - dy * s[VX]) / (e.l * e.l);
        e.alpha = alpha_of_length(g, e.l);
        const double jac = leg_jacobian(g, e.alpha);
        e.alpha_dot = l_dot / jac;

        e.x_s = tendon_excursion(g.r_k, e.alpha, g.alpha0);
        e.f_spring = spring_force(c_.spring, e.x_s);
        e.x_d = g.r_d * (g.alpha0 - e.alpha);
        const double xd_dot = -g.r_d * e.alpha_dot;
        e.e_store = 0.5 * c_.spring.k_k * e.x_s * e.x_s;
        double p_dot = 0.0;
        if (engaged_) {
            DamperState st;
            st.engaged = true;
            st.piston_pos = e.x_d - c_.damper.slack;
            st.piston_vel = xd_dot;
            e.piston = st.piston_pos;
            e.f_damper = damper_force(c_.damper, st);
            e.f_viscous = damper_viscous_force(c_.damper, st);
            e.e_store += recovery_spring_energy(c_.damper, st.piston_pos);
            p_dot = xd_dot;
        }
        const double tau_drag = m.knee_drag * e.alpha_dot;
        const double tau_total = g.r_k * e.f_spring + g.r_d * e.f_damper + e.tau_knee - tau_drag;
        e.f_axial = knee_torque_to_axial_force(g, e.alpha, tau_total);

        if (forward_) {
            const HipTarget ref = hip_target_at(c_.cpg, t);
            e.tau_hip = hip_pd(c_.cpg.hip_gains, ref.angle, e.theta, ref.rate, e.theta_dot, m);
        }
        const double st = std::sin(e.theta), ct = std::cos(e.theta);
        const double f_tan = e.tau_hip / e.l;
        e.fx = forward_ ? -e.f_axial * st - f_tan * ct : 0.0;
        e.fy = e.f_axial * ct - f_tan * st;

        e.rate[VX] = e.fx / c_.body.m;
        e.rate[VY] = e.fy / c_.body.m - c_.body.g;
        e.rate[E_VISC] = e.f_viscous * p_dot;
        e.rate[E_DRAG] = tau_drag * e.alpha_dot;
        e.rate[W_MOTOR] = e.tau_knee * e.alpha_dot + e.tau_hip * e.theta_dot;
        e.p_elec = electrical_power(m, e.tau_knee, e.alpha_dot, Joint::knee) +
                   electrical_power(m, e.tau_hip, e.theta_dot, Joint::hip);
        e.rate[E_ELEC] = e.p_elec;
        e.rate[E_JOULE] = joule_factor(m, e.tau_hip, Joint::hip) + joule_factor(m, e.tau_knee, Joint::knee);
        return e;
    }

    StateVec rk4(const StateVec& s, double t, double h, double knee) const {
        if (h <= 0.0) return s;
        const StateVec k1 = evaluate(s, t, knee).rate;
        const StateVec k2 = evaluate(axpy(s, 0.5 * h, k1), t + 0.5 * h, knee).rate;
        const StateVec k3 = evaluate(axpy(s, 0.5 * h, k2), t + 0.5 * h, knee).rate;
        const StateVec k4 = evaluate(axpy(s, h, k3), t + h, knee).rate;
        StateVec r;
        for (int i = 0; i < N_SLOTS; ++i) r[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return r;
    }

    /// Height of the flight foot above the terrain beneath it.
    double clearance(const StateVec& s, double t) const {
        const double th = flight_theta(t);
        const double fx = s[X] + l0_ * std::sin(th);
        return s[Y] - l0_ * std::cos(th) - ground(fx);
    }

    bool fired(Guard g, const StateVec& s, double t, double knee) const {
        if (g == Guard::apex) return s[VY] <= 0.0;
        if (g == Guard::touchdown) return clearance(s, t) <= 0.0;
        if (g == Guard::fall) return s[Y] - ground(s[X]) <= leg_length(c_.geometry, c_.alpha_min);
        const Eval e = evaluate(s, t, knee);
        switch (g) {
            case Guard::bottom_out: return e.alpha <= c_.alpha_min;
            case Guard::liftoff_length: return e.l > l0_;
            case Guard::liftoff_force: return e.f_axial < 0.0;
            case Guard::engage: return e.x_d >= c_.damper.slack;
            case Guard::disengage: return e.x_d < c_.damper.slack;
            default: return false;
        }
    }

    std::vector<Guard> active_guards() const {
        if (mode_ == Mode::flight) {
            std::vector<Guard> g{Guard::fall};
            if (!apex_done_) g.push_back(Guard::apex);
            if (td_armed_) g.push_back(Guard::touchdown);
            return g;
        }
        std::vector<Guard> g{Guard::bottom_out, Guard::liftoff_length, Guard::liftoff_force};
        g.push_back(engaged_ ? Guard::disengage : Guard::engage);
        return g;
    }

    std::pair<std::optional<Guard>, double> earliest_guard(const StateVec& s_end, double h, double knee) {
        std::optional<Guard> best;
        double best_h = h;
        for (Guard g : active_guards()) {
            if (!fired(g, s_end, t_ + h, knee)) continue;
            double he;
            if (fired(g, s_, t_, knee)) {
                he = 0.0;
            } else {
                he = locate_event([&](double hs) { return fired(g, rk4(s_, t_, hs, knee), t_ + hs, knee); }, 0.0, h,
                                  c_.integrator.event_tol);
            }
            if (!best || he < best_h) {
                best = g;
                best_h = he;
            }
        }
        return {best, best_h};
    }

    void after_step(double knee) {
        if (mode_ != Mode::stance) {
            if (!td_armed_ && clearance(s_, t_) > 0.0) td_armed_ = true;
            return;
        }
        const Eval e = evaluate(s_, t_, knee);
        StepSummary& st = rec_.steps.back();
        const double thr = c_.analysis.onset_threshold;
        if (std::isnan(spring_onset_) && e.f_spring > thr) spring_onset_ = t_;
        if (std::isnan(damper_onset_) && e.f_viscous > thr) damper_onset_ = t_;
        if (std::isnan(st.min_alpha) || e.alpha < st.min_alpha) st.min_alpha = e.alpha;
        if (forward_ && e.fy > 5.0 && std::abs(e.fx) > c_.body.mu * e.fy) {
            if (std::isnan(slip_since_)) slip_since_ = t_;
            if (t_ - slip_since_ >= c_.body.slip_hold) st.slip = true;
        } else {
            slip_since_ = missing;
        }
    }

    void apply(Guard g, double knee) {
        switch (g) {
            case Guard::apex: on_apex(); break;
            case Guard::touchdown: on_touchdown(knee); break;
            case Guard::liftoff_length:
            case Guard::liftoff_force: on_liftoff(knee); break;
            case Guard::engage: engaged_ = true; break;
            case Guard::disengage: engaged_ = false; break;
            case Guard::bottom_out:
                rec_.status = TrialStatus::bottomed_out;
                rec_.message = "knee reached the minimum angle at t = " + std::to_string(t_) + " s";
                break;
            case Guard::fall:
                rec_.status = TrialStatus::bottomed_out;
                rec_.message = "hip fell below the shortest leg length at t = " + std::to_string(t_) + " s";
                break;
        }
    }

    void on_apex() {
        apex_done_ = true;
        if (!rec_.steps.empty()) {
            StepSummary& st = rec_.steps.back();
            st.apex = s_[Y] - l0_ - st.ground_height;
            st.apex_t = t_;
        }
        ++apex_count_;
        if (!forward_ && c_.terrain.kind == TerrainKind::step_down && apex_count_ == c_.terrain.removal_step) {
            if (!(s_[Y] - l0_ - ground(s_[X]) > 0.0))
                throw EventError("block removed while the foot is on the ground");
            rec_.removal_apex = apex_count_;
            pending_perturb_ = true;
        }
    }

    void on_touchdown(double knee) {
        const double before = mech_energy(s_, evaluate(s_, t_, knee));
        const double th = flight_theta(t_);
        foot_x_ = s_[X] + l0_ * std::sin(th);
        foot_y_ = ground(foot_x_);
        mode_ = Mode::stance;
        slip_since_ = missing;
        engaged_ = false;
        {
            const Eval probe = evaluate(s_, t_, knee);
            engaged_ = probe.x_d >= c_.damper.slack;
        }
        const Eval e = evaluate(s_, t_, knee);
        reset_loss_ -= mech_energy(s_, e) - before;

        if (!rec_.steps.empty()) {
            StepSummary& prev = rec_.steps.back();
            prev.E_elec = s_[E_ELEC] - e_elec_td_;
            prev.E_joule = s_[E_JOULE] - e_joule_td_;
            prev.cycle_time = t_ - prev.touchdown_t;
            prev.step_length = foot_x_ - prev.touchdown_x;
        }
        StepSummary st;
        st.index = static_cast<int>(rec_.steps.size()) + 1;
        st.touchdown_t = t_;
        st.touchdown_x = foot_x_;
        st.ground_height = foot_y_;
        st.perturbed = pending_perturb_ || crossed_drop(foot_x_);
        pending_perturb_ = false;
        rec_.steps.push_back(st);

        e_visc_td_ = s_[E_VISC];
        e_elec_td_ = s_[E_ELEC];
        e_joule_td_ = s_[E_JOULE];
        spring_onset_ = damper_onset_ = missing;
    }

    /// True when a terrain drop lies between the previous foothold and x.
    bool crossed_drop(double x) const {
        if (!forward_ || c_.terrain.kind != TerrainKind::ramp_step || rec_.steps.empty()) return false;
        const double prev = rec_.steps.back().touchdown_x;
        const double L = c_.terrain.track_length;
        const double drop0 = c_.terrain.start + c_.terrain.ramp_length;
        const double k = std::floor((x - drop0) / L);
        const double drop = drop0 + k * L;
        return drop > prev && drop <= x;
    }

    void on_liftoff(double knee) {
        const Eval e = evaluate(s_, t_, knee);
        reset_loss_ += e.e_store;
        StepSummary& st = rec_.steps.back();
        st.liftoff_t = t_;
        st.E_d = s_[E_VISC] - e_visc_td_;
        if (!std::isnan(damper_onset_)) {
            const double ref = std::isnan(spring_onset_) ? st.touchdown_t : spring_onset_;
            st.delay = std::max(0.0, damper_onset_ - ref);
        }
        mode_ = Mode::flight;
        engaged_ = false;
        apex_done_ = false;
        td_armed_ = clearance(s_, t_) > 0.0;
    }

    void cycle_boundary() {
        const double progress = s_[X] - cycle_x_;
        cycle_x_ = s_[X];
        next_cycle_t_ += 1.0 / c_.cpg.f_f;
        if (progress < c_.analysis.stop_progress) {
            ++stalled_cycles_;
            if (!rec_.steps.empty()) rec_.steps.back().stop = true;
            if (stalled_cycles_ >= c_.analysis.stop_cycles) {
                rec_.status = TrialStatus::stopped;
                rec_.message = "no forward progress for " + std::to_string(stalled_cycles_) + " controller cycles";
            }
        } else {
            stalled_cycles_ = 0;
        }
    }

    void record_sample(long idx) {
        const double knee = knee_wave_(t_);
        const Eval e = evaluate(s_, t_, knee);
        const double em = mech_energy(s_, e);
        rec_.peak_energy = std::max(rec_.peak_energy, em);
        rec_.max_ledger_error = std::max(rec_.max_ledger_error, std::abs(ledger(e) - ledger0_));
        (void)idx;
        if (!c_.record_trace) return;
        TraceSample ts;
        ts.t = t_;
        ts.x = s_[X];
        ts.y = s_[Y];
        ts.vx = s_[VX];
        ts.vy = s_[VY];
        ts.alpha = e.alpha;
        ts.stance = mode_ == Mode::stance;
        ts.grf = ts.stance ? e.fy : 0.0;
        ts.grf_x = ts.stance ? e.fx : 0.0;
        ts.f_spring = e.f_spring;
        ts.f_damper = e.f_damper;
        ts.f_viscous = e.f_viscous;
        ts.piston_pos = engaged_ ? std::max(0.0, e.piston) : 0.0;
        ts.tau_hip = e.tau_hip;
        ts.tau_knee = e.tau_knee;
        ts.p_elec = e.p_elec;
        ts.e_mech = em;
        ts.e_lost = s_[E_VISC] + s_[E_DRAG] + reset_loss_;
        ts.w_motor = s_[W_MOTOR];
        ts.e_elec = s_[E_ELEC];
        rec_.trace.push_back(ts);
    }

    void finish() {
        rec_.t_end = t_;
        rec_.x_end = s_[X];
        rec_.e_elec_total = s_[E_ELEC];
        rec_.e_joule_total = s_[E_JOULE];
    }
};

}  // namespace detail

inline TrialRecord simulate(const ScenarioConfig& config) { return detail::Engine(config).run(); }

inline TrialRecord simulate_vertical(const ScenarioConfig& config) {
    if (config.experiment != Experiment::vertical)
        throw ConfigError("experiment", "simulate_vertical needs a vertical scenario");
    return simulate(config);
}

inline TrialRecord simulate_forward(const ScenarioConfig& config) {
    if (config.experiment != Experiment::forward)
        throw ConfigError("experiment", "simulate_forward needs a forward scenario");
    return simulate(config);
}

}  // namespace slackhop
