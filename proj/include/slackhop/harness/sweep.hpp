#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "../analysis/metrics.hpp"
#include "../dynamics.hpp"
#include "config_io.hpp"
#include "csv.hpp"

namespace slackhop {

inline constexpr const char* sweep_schema = "slackhop.sweep/1";

/// Grid of trials: every level of the base terrain's perturbation times
/// every slack, repeated with seeds base.seed + rep.
struct SweepSpec {
    std::string name = "sweep";
    ScenarioConfig base;
    std::vector<double> levels;  ///< [m]; block height, sinusoid amplitude or ramp height
    std::vector<double> slacks{0.010, 0.006, 0.003, 0.0};
    int repetitions = 1;

    void validate() const {
        if (levels.empty()) throw ConfigError("levels", "must not be empty");
        if (slacks.empty()) throw ConfigError("slacks", "must not be empty");
        if (repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
        for (double s : slacks)
            if (!(s >= 0.0)) throw ConfigError("slacks", "must be >= 0");
        for (double l : levels)
            if (!(l >= 0.0)) throw ConfigError("levels", "must be >= 0");
        if (base.terrain.kind == TerrainKind::flat) throw ConfigError("base.terrain.kind", "a sweep needs a perturbed terrain");
        base.validate();
    }

    std::size_t size() const { return levels.size() * slacks.size() * static_cast<std::size_t>(repetitions); }
};

inline void apply_level(ScenarioConfig& c, double level) {
    switch (c.terrain.kind) {
        case TerrainKind::step_down: c.terrain.block_height = level; break;
        case TerrainKind::sinusoid: c.terrain.amplitude = level; break;
        case TerrainKind::ramp_step: c.terrain.ramp_height = level; break;
        case TerrainKind::flat: break;
    }
}

struct SweepItem {
    TrialLabel label;
    ScenarioConfig config;
};

/// Work list in output order: level, then slack, then repetition.
inline std::vector<SweepItem> expand(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepItem> items;
    items.reserve(spec.size());
    for (double level : spec.levels)
        for (double slack : spec.slacks)
            for (int rep = 0; rep < spec.repetitions; ++rep) {
                SweepItem it;
                it.config = spec.base;
                apply_level(it.config, level);
                it.config.damper.slack = slack;
                it.config.seed = spec.base.seed + static_cast<std::uint64_t>(rep);
                it.config.repetitions = 1;
                it.config.record_trace = false;
                it.label = {to_string(spec.base.terrain.kind), level, slack, rep, it.config.seed};
                items.push_back(std::move(it));
            }
    return items;
}

struct SweepRow {
    TrialLabel label;
    TrialMetrics metrics;
    std::string message;  ///< simulator or metric failure, empty when clean
};

struct CellSummary {
    double level = 0.0, slack = 0.0;
    int trials = 0, ok = 0;
    double hop_height = missing, standby_E_d = missing, extra_E_d = missing, delay = missing;
    double recovery_steps = missing, coh = missing, cot = missing, speed = missing, cycle_std = missing;
    int not_recovered = 0, slip_failures = 0, stop_failures = 0, encounters = 0, failure_steps = 0;
};

struct SweepResult {
    Experiment experiment = Experiment::vertical;
    std::vector<SweepRow> rows;
    std::vector<CellSummary> cells;
};

inline SweepRow run_item(const SweepItem& it) {
    SweepRow row;
    row.label = it.label;
    try {
        const TrialRecord r = simulate(it.config);
        row.message = r.message;
        row.metrics = compute_metrics(r, it.config);
    } catch (const std::exception& e) {
        row.metrics.status = TrialStatus::event_error;
        row.message = e.what();
    }
    return row;
}

namespace detail {

inline double nan_mean(const std::vector<double>& v) {
    double a = 0.0;
    int n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            a += x;
            ++n;
        }
    return n ? a / n : missing;
}

}  // namespace detail

inline std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows) {
    std::vector<CellSummary> cells;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].label.level == rows[i].label.level && rows[j].label.slack == rows[i].label.slack) ++j;
        CellSummary c;
        c.level = rows[i].label.level;
        c.slack = rows[i].label.slack;
        std::vector<double> h, ed, ex, de, rs, ch, ct, sp, cs;
        for (std::size_t k = i; k < j; ++k) {
            const TrialMetrics& m = rows[k].metrics;
            ++c.trials;
            c.ok += m.status == TrialStatus::ok;
            h.push_back(m.hop_height);
            ed.push_back(m.standby_E_d);
            ex.push_back(m.extra_E_d);
            de.push_back(m.delay);
            rs.push_back(m.recovery_steps.value_or(missing));
            ch.push_back(m.coh);
            ct.push_back(m.cot);
            sp.push_back(m.speed);
            cs.push_back(m.cycle_time_std);
            c.not_recovered += m.not_recovered;
            c.slip_failures += m.failures.slip;
            c.stop_failures += m.failures.stop;
            c.encounters += m.failures.encounters;
            c.failure_steps += m.failures.failure_steps;
        }
        c.hop_height = detail::nan_mean(h);
        c.standby_E_d = detail::nan_mean(ed);
        c.extra_E_d = detail::nan_mean(ex);
        c.delay = detail::nan_mean(de);
        c.recovery_steps = detail::nan_mean(rs);
        c.coh = detail::nan_mean(ch);
        c.cot = detail::nan_mean(ct);
        c.speed = detail::nan_mean(sp);
        c.cycle_std = detail::nan_mean(cs);
        cells.push_back(c);
        i = j;
    }
    return cells;
}

/// Runs the grid on `jobs` worker threads. Workers only fill their own
/// result slot; ordering follows the work list.
inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
    const auto items = expand(spec);
    SweepResult res;
    res.experiment = spec.base.experiment;
    res.rows.resize(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < items.size(); k = next++) res.rows[k] = run_item(items[k]);
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    res.cells = summarize(res.rows);
    return res;
}

inline void write_sweep_rows_csv(std::ostream& out, const SweepResult& r) {
    CsvWriter w(out);
    std::vector<std::string> header = metrics_columns();
    header.push_back("message");
    w.row(header);
    for (const auto& row : r.rows) {
        auto cells = metrics_cells(r.experiment, row.label, row.metrics);
        std::string msg = row.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        cells.push_back(msg);
        w.row(cells);
    }
}

inline void write_sweep_cells_csv(std::ostream& out, const SweepResult& r) {
    CsvWriter w(out);
    w.row({"level_mm", "slack_mm", "trials", "ok", "hop_height_mm", "E_d_mJ", "extra_E_d_mJ", "delay_ms",
           "recovery_steps", "not_recovered", "CoH", "CoT", "speed_m_s", "cycle_std_ms", "slip_failures",
           "stop_failures", "encounters", "failure_steps"});
    for (const auto& c : r.cells)
        w.row({fmt(c.level * 1e3), fmt(c.slack * 1e3), fmt(c.trials), fmt(c.ok), fmt(c.hop_height * 1e3),
               fmt(c.standby_E_d * 1e3), fmt(c.extra_E_d * 1e3), fmt(c.delay * 1e3), fmt(c.recovery_steps),
               fmt(c.not_recovered), fmt(c.coh), fmt(c.cot), fmt(c.speed), fmt(c.cycle_std * 1e3),
               fmt(c.slip_failures), fmt(c.stop_failures), fmt(c.encounters), fmt(c.failure_steps)});
}

// Protocol grids.

/// Step-down on the vertical rig: 10 % and 15 % of leg length.
inline SweepSpec vertical_sweep_spec() {
    SweepSpec s;
    s.name = "vertical_step_down";
    s.base = vertical_scenario();
    s.base.terrain.kind = TerrainKind::step_down;
    s.levels = {0.031, 0.047};
    s.repetitions = 10;
    return s;
}

/// Sinusoidal blocks on the boom: flat, 5 mm and 10 mm amplitude.
inline SweepSpec rough_sweep_spec() {
    SweepSpec s;
    s.name = "forward_rough";
    s.base = forward_scenario();
    s.base.terrain.kind = TerrainKind::sinusoid;
    s.base.revolutions = 6.0;
    s.levels = {0.0, 0.005, 0.010};
    s.repetitions = 4;
    return s;
}

/// Ramp-up-step-down on the boom: 15 % and 30 % of leg length. The ramp
/// starts 4 m into the track and a trial covers 1.5 revolutions, so each
/// trial meets the drop once, with room for steady steps on both sides.
inline SweepSpec ramp_sweep_spec() {
    SweepSpec s;
    s.name = "forward_ramp";
    s.base = forward_scenario();
    s.base.terrain.kind = TerrainKind::ramp_step;
    s.base.terrain.start = 4.0;
    s.base.revolutions = 1.5;
    s.levels = {0.0465, 0.093};
    s.repetitions = 10;
    return s;
}

inline json to_json(const SweepSpec& s) {
    json j = json::object();
    j["schema"] = sweep_schema;
    j["name"] = s.name;
    j["base"] = to_json(s.base);
    j["levels"] = s.levels;
    j["slacks"] = s.slacks;
    j["repetitions"] = s.repetitions;
    return j;
}

inline SweepSpec sweep_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    SweepSpec s;
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        const json& v = item.value();
        if (k == "schema") {
            if (!(v.is_string() && v.get<std::string>() == sweep_schema))
                throw ConfigError("schema", std::string("expected \"") + sweep_schema + "\"");
        } else if (k == "name") {
            if (!v.is_string()) throw ConfigError("name", "expected a string");
            s.name = v.get<std::string>();
        } else if (k == "base") {
            try {
                s.base = scenario_from_json(v);
            } catch (const ConfigError& e) {
                throw ConfigError("base." + e.field(), e.reason());
            }
        } else if (k == "levels" || k == "slacks") {
            if (!v.is_array()) throw ConfigError(k, "expected an array of numbers");
            std::vector<double> xs;
            for (const auto& x : v) {
                if (!x.is_number()) throw ConfigError(k, "expected an array of numbers");
                xs.push_back(x.get<double>());
            }
            (k == "levels" ? s.levels : s.slacks) = xs;
        } else if (k == "repetitions") {
            if (!v.is_number_integer()) throw ConfigError("repetitions", "expected an integer");
            s.repetitions = v.get<int>();
        } else {
            throw ConfigError(k, "unknown key");
        }
    }
    s.validate();
    return s;
}

inline SweepSpec load_sweep(const std::string& path) { return sweep_from_json(parse_json_text(read_text_file(path), path)); }

}  // namespace slackhop
