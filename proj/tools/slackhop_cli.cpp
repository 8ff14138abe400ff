// Command-line front end: run, sweep, calibrate, analyze, plot, defaults.
//
// Exit codes: 0 success, 1 usage error, 2 invalid configuration or input,
// 3 a simulation aborted (its record is still written).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <slackhop/slackhop.hpp>

namespace fs = std::filesystem;
using namespace slackhop;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_config = 2;
constexpr int exit_aborted = 3;

struct Common {
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::optional<double> dt;
};

std::ofstream open_out(const Common& c, const std::string& file) {
    fs::create_directories(c.out);
    const fs::path p = fs::path(c.out) / file;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DomainError("cannot write " + p.string());
    return f;
}

void apply_overrides(ScenarioConfig& cfg, const Common& c) {
    if (c.seed) cfg.seed = *c.seed;
    if (c.dt) {
        cfg.integrator.dt = *c.dt;
        cfg.integrator.event_tol = std::min(cfg.integrator.event_tol, 1e-3 * *c.dt);
    }
    cfg.validate();
}

int cmd_run(const std::string& path, const Common& c) {
    ScenarioConfig cfg = load_scenario(path);
    apply_overrides(cfg, c);
    bool aborted = false;
    auto metrics_file = open_out(c, "metrics.csv");
    CsvWriter mw(metrics_file);
    mw.row(metrics_columns());
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        ScenarioConfig one = cfg;
        one.seed = cfg.seed + static_cast<std::uint64_t>(rep);
        one.repetitions = 1;
        const TrialRecord r = simulate(one);
        const std::string suffix = cfg.repetitions > 1 ? "_rep" + std::to_string(rep) : "";
        {
            auto f = open_out(c, "trace" + suffix + ".csv");
            write_trace_csv(f, r);
        }
        {
            auto f = open_out(c, "steps" + suffix + ".csv");
            write_steps_csv(f, r);
        }
        TrialMetrics m;
        try {
            m = compute_metrics(r, one);
        } catch (const MetricError& e) {
            m.status = r.status;
            std::cerr << "warning: metrics for repetition " << rep << ": " << e.what() << "\n";
        }
        const double level = one.terrain.kind == TerrainKind::step_down ? one.terrain.block_height
                             : one.terrain.kind == TerrainKind::sinusoid ? one.terrain.amplitude
                             : one.terrain.kind == TerrainKind::ramp_step ? one.terrain.ramp_height
                                                                          : 0.0;
        mw.row(metrics_cells(one.experiment, {to_string(one.terrain.kind), level, one.damper.slack, rep, one.seed}, m));
        std::cout << "repetition " << rep << ": " << to_string(r.status) << ", " << r.steps.size() << " steps"
                  << (r.message.empty() ? "" : " (" + r.message + ")") << "\n";
        if (r.status == TrialStatus::event_error) aborted = true;
    }
    return aborted ? exit_aborted : 0;
}

int cmd_sweep(const std::string& spec_arg, const Common& c) {
    SweepSpec spec;
    if (spec_arg == "vertical") spec = vertical_sweep_spec();
    else if (spec_arg == "rough") spec = rough_sweep_spec();
    else if (spec_arg == "ramp") spec = ramp_sweep_spec();
    else spec = load_sweep(spec_arg);
    apply_overrides(spec.base, c);
    spec.validate();
    const SweepResult res = run_sweep(spec, c.jobs);
    {
        auto f = open_out(c, spec.name + "_rows.csv");
        write_sweep_rows_csv(f, res);
    }
    {
        auto f = open_out(c, spec.name + "_cells.csv");
        write_sweep_cells_csv(f, res);
    }
    int failed = 0;
    for (const auto& r : res.rows) failed += r.metrics.status == TrialStatus::event_error;
    std::cout << spec.name << ": " << res.rows.size() << " trials in " << res.cells.size() << " cells";
    if (failed) std::cout << ", " << failed << " aborted";
    std::cout << "\n";
    return 0;
}

int cmd_calibrate(const std::string& targets_path, const std::string& vertical_path, const std::string& forward_path,
                  const Common& c) {
    const CalibrationTargets targets =
        targets_path.empty() ? CalibrationTargets{} : targets_from_json(parse_json_text(read_text_file(targets_path), targets_path));
    ScenarioConfig v = vertical_path.empty() ? vertical_scenario() : load_scenario(vertical_path);
    ScenarioConfig f = forward_path.empty() ? forward_scenario() : load_scenario(forward_path);
    apply_overrides(v, c);
    apply_overrides(f, c);
    CalibrationOptions opt;
    opt.jobs = c.jobs;
    const CalibrationResult r = calibrate(v, f, targets, opt);
    const json report = calibration_report(r, targets);
    {
        auto out = open_out(c, "calibration.json");
        out << calibration_overlay(r).dump(2) << "\n";
    }
    {
        auto out = open_out(c, "calibration_report.json");
        out << report.dump(2) << "\n";
    }
    std::cout << report.dump(2) << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_analyze(const std::string& path, const Common& c) {
    const TraceAnalysis a = analyze_trace(read_csv(path));
    {
        auto f = open_out(c, "analysis_steps.csv");
        write_analysis_csv(f, a);
    }
    json j = json::object();
    auto val = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
    j["sample_rate_hz"] = a.sample_rate;
    j["cutoff_hz"] = a.cutoff;
    j["stances"] = a.stances.size();
    j["mean_E_d_mJ"] = val(a.mean_E_d * 1e3);
    j["mean_delay_ms"] = val(a.mean_delay * 1e3);
    j["mean_apex_mm"] = val(a.mean_apex * 1e3);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_plot(const std::string& path, const std::string& kind, int stance, const Common& c) {
    const CsvTable t = read_csv(path);
    Chart chart;
    if (kind == "workloop") chart = workloop_chart(t, stance);
    else if (kind == "phase") chart = phase_chart(t);
    else chart = apex_chart(t);
    auto f = open_out(c, kind + ".svg");
    f << render_svg(chart);
    return 0;
}

int cmd_defaults(const std::string& which, const Common& c) {
    json j;
    if (which == "vertical") j = to_json(vertical_scenario());
    else if (which == "forward") j = to_json(forward_scenario());
    else if (which == "sweep-vertical") j = to_json(vertical_sweep_spec());
    else if (which == "sweep-rough") j = to_json(rough_sweep_spec());
    else if (which == "sweep-ramp") j = to_json(ramp_sweep_spec());
    else j = to_json(CalibrationTargets{});
    if (c.out == "-") {
        std::cout << j.dump(2) << "\n";
    } else {
        auto f = open_out(c, which + ".json");
        f << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slack-damper hopping leg simulator"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", common.seed, "Override the scenario seed");
        sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--dt", common.dt, "Override the integrator step [s]")->check(CLI::PositiveNumber);
    };

    std::string input, kind = "workloop", targets, vertical_cfg, forward_cfg;
    int stance = -1;

    auto* run = app.add_subcommand("run", "Simulate one scenario and write trace, steps and metrics CSVs");
    run->add_option("config", input, "Scenario JSON")->required();
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "Run a sweep spec (or a preset: vertical, rough, ramp)");
    sweep->add_option("spec", input, "Sweep JSON or preset name")->required();
    add_common(sweep);

    auto* cal = app.add_subcommand("calibrate", "Fit damper c, k_rec and winding resistance R");
    cal->add_option("--targets", targets, "Targets JSON");
    cal->add_option("--vertical", vertical_cfg, "Vertical base scenario JSON");
    cal->add_option("--forward", forward_cfg, "Forward base scenario JSON");
    add_common(cal);

    auto* analyze = app.add_subcommand("analyze", "Filter a trace CSV and report per-stance dissipation and delays");
    analyze->add_option("trace", input, "Trace CSV")->required();
    add_common(analyze);

    auto* plot = app.add_subcommand("plot", "Render an SVG from a trace or steps CSV");
    plot->add_option("input", input, "Trace CSV (workloop, phase) or steps CSV (apex)")->required();
    plot->add_option("--kind", kind, "Chart kind")->check(CLI::IsMember({"workloop", "phase", "apex"}))->capture_default_str();
    plot->add_option("--stance", stance, "Stance for the work loop; negative counts from the end")->capture_default_str();
    add_common(plot);

    std::string which;
    auto* defaults = app.add_subcommand("defaults", "Write a built-in scenario, sweep or targets file ('--out -' prints it)");
    defaults->add_option("which", which, "Preset")
        ->required()
        ->check(CLI::IsMember({"vertical", "forward", "sweep-vertical", "sweep-rough", "sweep-ramp", "targets"}));
    add_common(defaults);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*run) return cmd_run(input, common);
        if (*sweep) return cmd_sweep(input, common);
        if (*cal) return cmd_calibrate(targets, vertical_cfg, forward_cfg, common);
        if (*analyze) return cmd_analyze(input, common);
        if (*plot) return cmd_plot(input, kind, stance, common);
        if (*defaults) return cmd_defaults(which, common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    }
    return exit_usage;
}
