#pragma once

// Fits the damper constants to standby dissipation and the winding
// resistance to the flat-track cost of transport.

#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "../analysis/metrics.hpp"
#include "../dynamics.hpp"
#include "config_io.hpp"

namespace slackhop {

inline constexpr const char* targets_schema = "slackhop.targets/1";

struct CalibrationTargets {
    std::vector<double> slacks{0.010, 0.006, 0.003, 0.0};        ///< [m]
    std::vector<double> standby_E_d{0.001, 0.029, 0.086, 0.152};  ///< [J]
    double cot_slack = 0.010;                                    ///< [m]
    double cot = 1.01;

    void validate() const {
        if (slacks.empty()) throw ConfigError("slacks", "must not be empty");
        if (slacks.size() != standby_E_d.size()) throw ConfigError("standby_E_d", "needs one value per slack");
        for (double s : slacks)
            if (!(s >= 0.0)) throw ConfigError("slacks", "must be >= 0");
        for (double e : standby_E_d)
            if (!(e >= 0.0)) throw ConfigError("standby_E_d", "must be >= 0");
        if (!(cot_slack >= 0.0)) throw ConfigError("cot_slack", "must be >= 0");
        if (!(cot > 0.0)) throw ConfigError("cot", "must be > 0");
    }
};

struct CalibrationOptions {
    double trial_duration = 15.0;  ///< vertical trial length per evaluation [s]
    double bracket = 4.0;          ///< line search spans [p / bracket, p * bracket]
    int golden_iterations = 14;
    int max_rounds = 4;
    double tolerance = 5e-3;        ///< relative parameter change that ends the descent
    double improvement_tol = 1e-3;  ///< relative objective decrease per round that ends the descent
    double objective_tol = 1e-12;   ///< objective this small counts as already fitted
    double cot_tol = 1e-9;          ///< relative CoT error accepted without refitting R
    double energy_floor = 1e-4;     ///< [J]; denominator floor for zero targets
    int jobs = 1;
};

struct CalibrationResult {
    DamperParams damper;
    MotorParams motor;
    std::vector<double> slacks;
    std::vector<double> simulated_E_d;  ///< [J]
    std::vector<double> residuals;      ///< relative, per slack
    double objective = 0.0;
    double simulated_cot = missing;
    double cot_residual = missing;  ///< relative
    int evaluations = 0;
    int rounds = 0;
    bool converged = true;
    bool damper_changed = false;
    bool motor_changed = false;
    std::vector<std::string> warnings;
};

inline double relative_error(double sim, double target, double floor) {
    return (sim - target) / std::max(std::abs(target), floor);
}

/// Unperturbed standby E_d at each slack for the given damper constants.
inline std::vector<double> standby_dissipation(const ScenarioConfig& base, const std::vector<double>& slacks, double c,
                                               double k_rec, double duration, int jobs = 1) {
    std::vector<double> out(slacks.size(), missing);
    auto one = [&](std::size_t i) {
        ScenarioConfig cfg = base;
        cfg.experiment = Experiment::vertical;
        cfg.terrain.kind = TerrainKind::flat;
        cfg.duration = duration;
        cfg.record_trace = false;
        cfg.damper.c = c;
        cfg.damper.k_rec = k_rec;
        cfg.damper.slack = slacks[i];
        out[i] = vertical_metrics(simulate(cfg), cfg).standby_E_d;
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < slacks.size(); ++i) one(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < slacks.size(); ++i) pool.emplace_back(one, i);
        for (auto& t : pool) t.join();
    }
    return out;
}

/// Sum of squared relative errors. A missing simulated value costs 1 per slack.
inline double standby_objective(const std::vector<double>& simulated, const CalibrationTargets& t, double floor) {
    double f = 0.0;
    for (std::size_t i = 0; i < simulated.size(); ++i) {
        const double r = std::isnan(simulated[i]) ? 1.0 : relative_error(simulated[i], t.standby_E_d[i], floor);
        f += r * r;
    }
    return f;
}

namespace detail {

/// Golden-section minimum of f on [a, b].
template <class F>
double golden_section(F&& f, double a, double b, int iterations) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

/// Electrical energy split of the forward CoT window for a given trial.
struct CotSplit {
    double shaft = 0.0;     ///< electrical energy minus winding heat [J]
    double joule = 0.0;     ///< integral of squared current [A^2 s]
    double distance = 0.0;  ///< [m]
};

inline CotSplit cot_split(const TrialRecord& r, const ScenarioConfig& c) {
    CotSplit s;
    for (const auto* st : forward_window(r, c)) {
        s.shaft += st->E_elec - c.motor.R * st->E_joule;
        s.joule += st->E_joule;
        s.distance += st->step_length;
    }
    return s;
}

/// Coordinate descent with golden-section line searches on log c and
/// log k_rec, then a closed-form winding resistance.
inline CalibrationResult calibrate(const ScenarioConfig& vertical_base, const ScenarioConfig& forward_base,
                                   const CalibrationTargets& targets, const CalibrationOptions& opt = {}) {
    targets.validate();
    CalibrationResult res;
    res.damper = vertical_base.damper;
    res.motor = forward_base.motor;
    res.slacks = targets.slacks;

    std::map<std::pair<double, double>, std::vector<double>> cache;
    auto sims = [&](double c, double k) -> const std::vector<double>& {
        auto key = std::make_pair(c, k);
        auto it = cache.find(key);
        if (it == cache.end()) {
            ++res.evaluations;
            it = cache.emplace(key, standby_dissipation(vertical_base, targets.slacks, c, k, opt.trial_duration, opt.jobs))
                     .first;
        }
        return it->second;
    };
    auto objective = [&](double c, double k) { return standby_objective(sims(c, k), targets, opt.energy_floor); };

    double c = vertical_base.damper.c, k = vertical_base.damper.k_rec;
    if (!(c > 0.0 && k > 0.0)) throw ConfigError("damper", "c and k_rec must be > 0 to calibrate");
    double best = objective(c, k);
    if (best > opt.objective_tol) {
        const double span = std::log(opt.bracket);
        res.converged = false;
        for (int round = 0; round < opt.max_rounds; ++round) {
            ++res.rounds;
            const double start = best;
            const double lc = detail::golden_section([&](double u) { return objective(std::exp(u), k); },
                                                     std::log(c) - span, std::log(c) + span, opt.golden_iterations);
            double c_new = std::exp(lc);
            if (objective(c_new, k) > best) c_new = c;
            best = objective(c_new, k);
            const double lk = detail::golden_section([&](double u) { return objective(c_new, std::exp(u)); },
                                                     std::log(k) - span, std::log(k) + span, opt.golden_iterations);
            double k_new = std::exp(lk);
            if (objective(c_new, k_new) > best) k_new = k;
            best = objective(c_new, k_new);
            const double change = std::max(std::abs(c_new / c - 1.0), std::abs(k_new / k - 1.0));
            c = c_new;
            k = k_new;
            if (change < opt.tolerance || start - best <= opt.improvement_tol * start) {
                res.converged = true;
                break;
            }
        }
        if (!res.converged) res.warnings.push_back("damper fit did not settle; reporting the best point found");
        res.damper_changed = c != vertical_base.damper.c || k != vertical_base.damper.k_rec;
    }
    res.damper.c = c;
    res.damper.k_rec = k;
    res.simulated_E_d = sims(c, k);
    for (std::size_t i = 0; i < targets.slacks.size(); ++i)
        res.residuals.push_back(std::isnan(res.simulated_E_d[i])
                                    ? missing
                                    : relative_error(res.simulated_E_d[i], targets.standby_E_d[i], opt.energy_floor));
    res.objective = best;

    // Winding heat is linear in R and R does not feed back into the motion.
    ScenarioConfig fwd = forward_base;
    fwd.experiment = Experiment::forward;
    fwd.terrain.kind = TerrainKind::flat;
    fwd.record_trace = false;
    fwd.damper.c = c;
    fwd.damper.k_rec = k;
    fwd.damper.slack = targets.cot_slack;
    const TrialRecord r = simulate(fwd);
    const CotSplit split = cot_split(r, fwd);
    if (!(split.distance > 0.0 && split.joule > 0.0)) {
        res.warnings.push_back("forward trial produced no usable steps; winding resistance left unchanged");
        return res;
    }
    const double weight_dist = fwd.body.m * fwd.body.g * split.distance;
    const double cot_now = (split.shaft + fwd.motor.R * split.joule) / weight_dist;
    if (std::abs(cot_now / targets.cot - 1.0) > opt.cot_tol) {
        double R = (targets.cot * weight_dist - split.shaft) / split.joule;
        if (R < 0.0) {
            res.warnings.push_back("shaft work alone exceeds the CoT target; winding resistance set to 0");
            R = 0.0;
        }
        res.motor.R = R;
        res.motor_changed = R != forward_base.motor.R;
    }
    res.simulated_cot = (split.shaft + res.motor.R * split.joule) / weight_dist;
    res.cot_residual = res.simulated_cot / targets.cot - 1.0;
    return res;
}

/// Partial scenario holding only the fitted constants; loads on top of the
/// defaults of either experiment.
inline json calibration_overlay(const CalibrationResult& r) {
    json j = json::object();
    j["schema"] = scenario_schema;
    j["damper"] = {{"c", r.damper.c}, {"k_rec", r.damper.k_rec}};
    j["motor"] = {{"R", r.motor.R}};
    return j;
}

inline json calibration_report(const CalibrationResult& r, const CalibrationTargets& t) {
    json j = json::object();
    j["damper_c"] = r.damper.c;
    j["damper_k_rec"] = r.damper.k_rec;
    j["motor_R"] = r.motor.R;
    json rows = json::array();
    for (std::size_t i = 0; i < r.slacks.size(); ++i)
        rows.push_back({{"slack_mm", r.slacks[i] * 1e3},
                        {"target_E_d_mJ", t.standby_E_d[i] * 1e3},
                        {"E_d_mJ", std::isnan(r.simulated_E_d[i]) ? json(nullptr) : json(r.simulated_E_d[i] * 1e3)},
                        {"relative_residual", std::isnan(r.residuals[i]) ? json(nullptr) : json(r.residuals[i])}});
    j["standby"] = rows;
    j["objective"] = r.objective;
    j["target_cot"] = t.cot;
    j["cot"] = std::isnan(r.simulated_cot) ? json(nullptr) : json(r.simulated_cot);
    j["cot_relative_residual"] = std::isnan(r.cot_residual) ? json(nullptr) : json(r.cot_residual);
    j["evaluations"] = r.evaluations;
    j["rounds"] = r.rounds;
    j["converged"] = r.converged;
    j["warnings"] = r.warnings;
    return j;
}

inline CalibrationTargets targets_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    CalibrationTargets t;
    auto numbers = [](const json& v, const std::string& key) {
        if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
        std::vector<double> xs;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(key, "expected an array of numbers");
            xs.push_back(x.get<double>());
        }
        return xs;
    };
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        const json& v = item.value();
        if (k == "schema") {
            if (!(v.is_string() && v.get<std::string>() == targets_schema))
                throw ConfigError("schema", std::string("expected \"") + targets_schema + "\"");
        } else if (k == "slacks") {
            t.slacks = numbers(v, k);
        } else if (k == "standby_E_d") {
            t.standby_E_d = numbers(v, k);
        } else if (k == "cot_slack" || k == "cot") {
            if (!v.is_number()) throw ConfigError(k, "expected a number");
            (k == "cot" ? t.cot : t.cot_slack) = v.get<double>();
        } else {
            throw ConfigError(k, "unknown key");
        }
    }
    t.validate();
    return t;
}

inline json to_json(const CalibrationTargets& t) {
    json j = json::object();
    j["schema"] = targets_schema;
    j["slacks"] = t.slacks;
    j["standby_E_d"] = t.standby_E_d;
    j["cot_slack"] = t.cot_slack;
    j["cot"] = t.cot;
    return j;
}

}  // namespace slackhop
