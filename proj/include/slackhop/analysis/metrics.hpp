#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../scenario.hpp"

namespace slackhop {

/// Electrical energy per hop over the apex potential energy.
inline double coh(double E_elec, double m, double h_apex, double g = 9.81) {
    if (!(m > 0.0 && g > 0.0)) throw MetricError("coh: mass and gravity must be > 0");
    if (!(h_apex > 0.0)) throw MetricError("coh: apex height must be > 0");
    return E_elec / (m * g * h_apex);
}

/// Electrical energy per distance over body weight.
inline double cot(double E_elec, double m, double d, double g = 9.81) {
    if (!(m > 0.0 && g > 0.0)) throw MetricError("cot: mass and gravity must be > 0");
    if (!(d > 0.0)) throw MetricError("cot: distance must be > 0");
    return E_elec / (m * g * d);
}

/// Steps until the apex is back inside the band around the reference.
/// `apex` holds one value per step and `perturb_index` (0-based) is the
/// perturbed step. The reference is the mean of up to `window` apexes
/// before it. The result counts from the perturbed step, which is 1.
/// Returns nullopt when no later apex enters the band.
inline std::optional<int> recovery_steps(const std::vector<double>& apex, std::size_t perturb_index, double band = 0.04,
                                         int window = 10) {
    if (perturb_index > apex.size()) throw MetricError("recovery_steps: perturbation index past the end");
    const std::size_t n_pre = std::min<std::size_t>(perturb_index, static_cast<std::size_t>(std::max(window, 0)));
    if (n_pre < 3) throw MetricError("recovery_steps: needs at least 3 steps before the perturbation");
    double ref = 0.0;
    for (std::size_t i = perturb_index - n_pre; i < perturb_index; ++i) ref += apex[i];
    ref /= static_cast<double>(n_pre);
    for (std::size_t i = perturb_index; i < apex.size(); ++i) {
        // Same comparison as the band edges quoted in the tables, up to rounding noise.
        const double rel = apex[i] / ref;
        if (rel >= 1.0 - band - 1e-12 && rel <= 1.0 + band + 1e-12) return static_cast<int>(i - perturb_index) + 1;
    }
    return std::nullopt;
}

/// Time from the first spring-force sample above threshold to the first
/// viscous-damper sample above threshold within one stance.
inline std::optional<double> engagement_delay(const std::vector<double>& spring_force,
                                              const std::vector<double>& damper_force, double dt,
                                              double threshold = 0.5) {
    auto first_above = [threshold](const std::vector<double>& v) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] > threshold) return i;
        return std::nullopt;
    };
    const auto d = first_above(damper_force);
    if (!d) return std::nullopt;
    const auto s = first_above(spring_force).value_or(0);
    return std::max(0.0, (static_cast<double>(*d) - static_cast<double>(s)) * dt);
}

/// Sample standard deviation of successive touchdown intervals.
inline double cycle_time_std(const std::vector<double>& touchdowns) {
    if (touchdowns.size() < 3) throw MetricError("cycle_time_std: needs at least 3 touchdowns");
    std::vector<double> dt;
    for (std::size_t i = 1; i < touchdowns.size(); ++i) dt.push_back(touchdowns[i] - touchdowns[i - 1]);
    double mean = 0.0;
    for (double v : dt) mean += v;
    mean /= static_cast<double>(dt.size());
    double ss = 0.0;
    for (double v : dt) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(dt.size() - 1));
}

/// Enclosed area of a (position, force) loop by the trapezoid rule, closing
/// the polygon from the last sample back to the first. Positive when the
/// force is higher while the position increases.
inline double loop_energy(const std::vector<double>& position, const std::vector<double>& force) {
    if (position.size() != force.size()) throw MetricError("loop_energy: series differ in length");
    const std::size_t n = position.size();
    if (n < 2) return 0.0;
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        e += 0.5 * (force[i] + force[j]) * (position[j] - position[i]);
    }
    return e;
}

struct WorkLoop {
    std::vector<double> position;  ///< piston position [m]
    std::vector<double> force;     ///< damper force [N]
    double energy = 0.0;           ///< enclosed area [J]
};

/// Damper work loop of one step, taken from the recorded trace.
inline WorkLoop work_loop(const TrialRecord& r, std::size_t step) {
    if (step >= r.steps.size()) throw MetricError("work_loop: step index out of range");
    const StepSummary& s = r.steps[step];
    WorkLoop w;
    if (std::isnan(s.liftoff_t)) return w;
    for (const auto& p : r.trace) {
        if (p.t < s.touchdown_t) continue;
        if (p.t > s.liftoff_t) break;
        if (!p.stance) continue;
        w.position.push_back(p.piston_pos);
        w.force.push_back(p.f_damper);
    }
    w.energy = loop_energy(w.position, w.force);
    return w;
}

struct FailureCounts {
    int encounters = 0;     ///< perturbation encounters seen
    int slip = 0;           ///< encounters followed by a slip
    int stop = 0;           ///< encounters followed by a stop or a fall
    int failure_steps = 0;  ///< steps carrying a slip or stop flag anywhere in the trial

    int total() const { return slip + stop; }
};

/// Each encounter counts at most once, as a slip or a stop, depending on
/// which flag appears first in the `window` steps from the encounter. A
/// trial that ends abnormally inside that window counts as a stop.
inline FailureCounts classify_failures(const TrialRecord& r, int window = 5) {
    FailureCounts f;
    const std::size_t n = r.steps.size();
    for (const auto& s : r.steps)
        if (s.slip || s.stop) ++f.failure_steps;
    for (std::size_t i = 0; i < n; ++i) {
        if (!r.steps[i].perturbed) continue;
        ++f.encounters;
        bool counted = false;
        for (std::size_t j = i; j < n && j < i + static_cast<std::size_t>(window); ++j) {
            if (r.steps[j].slip) {
                ++f.slip;
                counted = true;
                break;
            }
            if (r.steps[j].stop) {
                ++f.stop;
                counted = true;
                break;
            }
        }
        if (!counted && r.status != TrialStatus::ok && n - i <= static_cast<std::size_t>(window)) ++f.stop;
    }
    return f;
}

struct TrialMetrics {
    TrialStatus status = TrialStatus::ok;
    int steps = 0;              ///< steps inside the analysis window
    double coh = missing;
    double cot = missing;
    double speed = missing;     ///< [m/s]
    double hop_height = missing;  ///< reference apex [m]
    std::optional<double> recovery_steps;  ///< mean over encounters that recovered
    int not_recovered = 0;
    FailureCounts failures;
    double standby_E_d = missing;  ///< [J]
    double extra_E_d = missing;    ///< perturbed-step E_d minus standby [J]
    double delay = missing;        ///< [s], NaN when the damper never engaged
    double cycle_time_std = missing;  ///< [s]
    std::vector<double> apex;      ///< per step [m]
};

namespace detail {

inline bool complete(const StepSummary& s) {
    return !std::isnan(s.liftoff_t) && !std::isnan(s.apex) && !std::isnan(s.E_elec) && !std::isnan(s.cycle_time);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return missing;
    double a = 0.0;
    for (double x : v) a += x;
    return a / static_cast<double>(v.size());
}

/// Standby quantities over the given steps: E_d, delay, CoH, apex, cycle std.
inline void fill_standby(TrialMetrics& m, const std::vector<const StepSummary*>& win, double mass, double g) {
    std::vector<double> ed, delay, c, apex, td;
    for (const auto* s : win) {
        ed.push_back(s->E_d);
        if (!std::isnan(s->delay)) delay.push_back(s->delay);
        apex.push_back(s->apex);
        td.push_back(s->touchdown_t);
        if (s->apex > 0.0) c.push_back(coh(s->E_elec, mass, s->apex, g));
    }
    m.steps = static_cast<int>(win.size());
    m.standby_E_d = mean_of(ed);
    // The damper counts as engaged when it fired in most standby steps.
    if (!delay.empty() && 2 * delay.size() > win.size()) m.delay = mean_of(delay);
    m.hop_height = mean_of(apex);
    m.coh = c.size() == win.size() ? mean_of(c) : missing;
    if (td.size() >= 3) m.cycle_time_std = cycle_time_std(td);
}

}  // namespace detail

/// Metrics of one vertical trial. With a step-down the standby window is the
/// `steady_window` complete steps before the perturbed step. Without one it
/// is the last `steady_window` complete steps.
inline TrialMetrics vertical_metrics(const TrialRecord& r, const ScenarioConfig& c) {
    TrialMetrics m;
    m.status = r.status;
    for (const auto& s : r.steps) m.apex.push_back(s.apex);
    const int w = c.analysis.steady_window;

    std::optional<std::size_t> p;
    for (std::size_t i = 0; i < r.steps.size(); ++i)
        if (r.steps[i].perturbed) {
            p = i;
            break;
        }

    std::vector<const StepSummary*> win;
    const std::size_t end = p ? *p : r.steps.size();
    for (std::size_t i = end; i-- > 0 && static_cast<int>(win.size()) < w;)
        if (detail::complete(r.steps[i])) win.insert(win.begin(), &r.steps[i]);
    detail::fill_standby(m, win, c.body.m, c.body.g);

    if (p) {
        m.failures.encounters = 1;
        if (!std::isnan(r.steps[*p].liftoff_t)) m.extra_E_d = r.steps[*p].E_d - m.standby_E_d;
        std::vector<double> apex;
        for (const auto& s : r.steps) {
            if (std::isnan(s.apex)) break;
            apex.push_back(s.apex);
        }
        if (*p >= 3 && *p <= apex.size()) {
            const auto rs = recovery_steps(apex, *p, c.analysis.recovery_band, w);
            if (rs)
                m.recovery_steps = *rs;
            else
                m.not_recovered = 1;
        } else {
            m.not_recovered = 1;
        }
    }
    return m;
}

/// Metrics of one forward trial, over the steps that touch down after the
/// first and before the last requested revolution. Falls back to all
/// complete steps when that window holds fewer than two.
/// Complete steps used for forward averages: those touching down after the
/// first revolution and before the last one. Short trials use every step.
inline std::vector<const StepSummary*> forward_window(const TrialRecord& r, const ScenarioConfig& c) {
    const double L = c.terrain.track_length;
    const double lo = r.x_start + (c.revolutions > 2.0 ? L : 0.0);
    const double hi = r.x_start + (c.revolutions > 2.0 ? (c.revolutions - 1.0) * L : c.revolutions * L);
    std::vector<const StepSummary*> win, all;
    for (const auto& s : r.steps) {
        if (!detail::complete(s) || std::isnan(s.step_length)) continue;
        all.push_back(&s);
        if (s.touchdown_x >= lo && s.touchdown_x < hi) win.push_back(&s);
    }
    return win.size() < 2 ? all : win;
}

inline TrialMetrics forward_metrics(const TrialRecord& r, const ScenarioConfig& c) {
    TrialMetrics m;
    m.status = r.status;
    for (const auto& s : r.steps) m.apex.push_back(s.apex);
    const auto win = forward_window(r, c);

    double e = 0.0, d = 0.0, t = 0.0;
    for (const auto* s : win) {
        e += s->E_elec;
        d += s->step_length;
        t += s->cycle_time;
    }
    m.steps = static_cast<int>(win.size());
    if (d > 0.0) m.cot = cot(e, c.body.m, d, c.body.g);
    if (t > 0.0) m.speed = d / t;
    if (m.steps == 0 && r.t_end > 0.0) m.speed = (r.x_end - r.x_start) / r.t_end;

    std::vector<double> ed, delay, apex, td;
    for (const auto* s : win) {
        ed.push_back(s->E_d);
        if (!std::isnan(s->delay)) delay.push_back(s->delay);
        apex.push_back(s->apex);
        td.push_back(s->touchdown_t);
    }
    m.standby_E_d = detail::mean_of(ed);
    if (!delay.empty() && 2 * delay.size() > win.size()) m.delay = detail::mean_of(delay);
    m.hop_height = detail::mean_of(apex);
    if (td.size() >= 3) m.cycle_time_std = cycle_time_std(td);

    m.failures = classify_failures(r, c.analysis.failure_window);

    // Recovery after each encounter, against the steps just before it.
    std::vector<double> ap;
    for (const auto& s : r.steps) ap.push_back(s.apex);
    std::vector<double> rec;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (!r.steps[i].perturbed) continue;
        std::size_t stop = i;
        while (stop < ap.size() && !std::isnan(ap[stop])) ++stop;
        std::vector<double> seg(ap.begin(), ap.begin() + static_cast<std::ptrdiff_t>(stop));
        bool pre_ok = i >= 3;
        for (std::size_t k = (i >= 3 ? i - 3 : 0); k < i; ++k) pre_ok = pre_ok && !std::isnan(ap[k]);
        if (!pre_ok) continue;
        std::size_t first = i;
        while (first > 0 && i - first < static_cast<std::size_t>(c.analysis.steady_window) && !std::isnan(ap[first - 1]) &&
               !r.steps[first - 1].perturbed)
            --first;
        if (i - first < 3) continue;
        std::vector<double> local(seg.begin() + static_cast<std::ptrdiff_t>(first), seg.end());
        const auto rs = recovery_steps(local, i - first, c.analysis.recovery_band, c.analysis.steady_window);
        if (rs)
            rec.push_back(*rs);
        else
            ++m.not_recovered;
    }
    if (!rec.empty()) m.recovery_steps = detail::mean_of(rec);
    return m;
}

inline TrialMetrics compute_metrics(const TrialRecord& r, const ScenarioConfig& c) {
    return c.experiment == Experiment::vertical ? vertical_metrics(r, c) : forward_metrics(r, c);
}

}  // namespace slackhop
