#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include <slackhop/slackhop.hpp>

using namespace slackhop;
using Catch::Approx;

namespace {

std::string source_path(const std::string& rel) { return std::string(SLACKHOP_SOURCE_DIR) + "/" + rel; }

template <class F> std::string field_of(F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

SweepSpec tiny_vertical_sweep() {
    SweepSpec s = vertical_sweep_spec();
    s.name = "tiny";
    s.base.duration = 6.0;
    s.base.terrain.removal_step = 6;
    s.levels = {0.031, 0.047};
    s.slacks = {0.006, 0.0};
    s.repetitions = 2;
    return s;
}

}  // namespace

TEST_CASE("scenario JSON round-trips for both presets", "[harness]") {
    for (const ScenarioConfig& c : {vertical_scenario(), forward_scenario()}) {
        const ScenarioConfig back = scenario_from_json(to_json(c));
        CHECK(back == c);
        CHECK(dump_scenario(back) == dump_scenario(c));
    }
}

TEST_CASE("scenario JSON round-trips perturbed values", "[harness][property]") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        ScenarioConfig c = i % 2 ? forward_scenario() : vertical_scenario();
        c.damper.c *= u(rng);
        c.damper.slack = 0.01 * (u(rng) - 0.5);
        c.damper.slack = std::abs(c.damper.slack);
        c.motor.R *= u(rng);
        c.cpg.D_vir = 0.4 * u(rng);
        if (i % 2)
            c.terrain.kind = i % 3 ? TerrainKind::sinusoid : TerrainKind::ramp_step;
        else
            c.terrain.kind = i % 4 ? TerrainKind::step_down : TerrainKind::flat;
        c.body.mu = i % 3 == 0 ? std::numeric_limits<double>::infinity() : 0.6 * u(rng);
        c.seed = rng();
        const ScenarioConfig back = scenario_from_json(parse_json_text(dump_scenario(c), "round trip"));
        CHECK(back == c);
    }
}

TEST_CASE("scenario overlays apply on the experiment defaults", "[harness]") {
    const ScenarioConfig c = scenario_from_json(json::parse(R"({"experiment": "forward", "damper": {"slack": 0.003}})"));
    ScenarioConfig expect = forward_scenario();
    expect.damper.slack = 0.003;
    CHECK(c == expect);
    CHECK(scenario_from_json(json::object()) == vertical_scenario());
}

TEST_CASE("scenario errors name the field", "[harness]") {
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"damper": {"cc": 1}})")); }) == "damper.cc");
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"damper": {"slack": -0.001}})")); }) == "damper.slack");
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"damper": {"c": "big"}})")); }) == "damper.c");
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"terrain": {"kind": "stairs"}})")); }) == "terrain.kind");
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"experiment": "sideways"})")); }) == "experiment");
    CHECK(field_of([] { scenario_from_json(json::parse(R"({"schema": "other/1"})")); }) == "schema");
    CHECK(field_of([] {
              scenario_from_json(json::parse(R"({"knee_torque_by_slack": [{"slack": 0, "tau": 4, "x": 1}]})"));
          }) == "knee_torque_by_slack[0].x");
    CHECK(field_of([] { parse_json_text("{not json", "input"); }) == "<root>");
}

TEST_CASE("shipped configs load", "[harness]") {
    for (const char* f : {"configs/vertical.json", "configs/forward.json", "configs/vertical_step_down_3mm.json"})
        CHECK_NOTHROW(load_scenario(source_path(f)));
    CHECK(load_scenario(source_path("configs/vertical.json")) == vertical_scenario());
    CHECK(load_scenario(source_path("configs/forward.json")) == forward_scenario());
    for (const char* f : {"configs/sweep-vertical.json", "configs/sweep-rough.json", "configs/sweep-ramp.json"})
        CHECK_NOTHROW(load_sweep(source_path(f)));
    CHECK(load_sweep(source_path("configs/sweep-vertical.json")).size() == 80);
    CHECK_NOTHROW(targets_from_json(parse_json_text(read_text_file(source_path("configs/targets.json")), "targets")));
}

TEST_CASE("sweep presets match the protocol grid", "[harness]") {
    const SweepSpec v = vertical_sweep_spec();
    CHECK(v.size() == 80);
    CHECK(expand(v).size() == 80);
    const SweepSpec r = rough_sweep_spec();
    CHECK(r.size() == 48);
    CHECK(expand(r).size() == 48);
    const SweepSpec p = ramp_sweep_spec();
    CHECK(expand(p).size() == 80);
    CHECK(v.base.experiment == Experiment::vertical);
    CHECK(r.base.experiment == Experiment::forward);
    CHECK(p.base.terrain.kind == TerrainKind::ramp_step);
}

TEST_CASE("sweep expansion order and seeds", "[harness]") {
    SweepSpec s = tiny_vertical_sweep();
    s.base.seed = 100;
    const auto items = expand(s);
    REQUIRE(items.size() == 8);
    std::size_t i = 0;
    for (double level : s.levels)
        for (double slack : s.slacks)
            for (int rep = 0; rep < 2; ++rep, ++i) {
                CHECK(items[i].config.terrain.block_height == level);
                CHECK(items[i].config.damper.slack == slack);
                CHECK(items[i].config.seed == 100u + static_cast<unsigned>(rep));
                CHECK(items[i].label.rep == rep);
                CHECK_FALSE(items[i].config.record_trace);
            }
}

TEST_CASE("sweep spec validation", "[harness]") {
    SweepSpec s = tiny_vertical_sweep();
    s.levels.clear();
    CHECK(field_of([&] { s.validate(); }) == "levels");
    s = tiny_vertical_sweep();
    s.base.terrain.kind = TerrainKind::flat;
    CHECK(field_of([&] { s.validate(); }) == "base.terrain.kind");
    CHECK(field_of([] { sweep_from_json(json::parse(R"({"base": {"damper": {"c": -1}}, "levels": [0.01]})")); }) ==
          "base.damper.c");
}

TEST_CASE("sweep JSON round-trips", "[harness]") {
    for (const SweepSpec& s : {vertical_sweep_spec(), rough_sweep_spec(), ramp_sweep_spec()}) {
        const SweepSpec back = sweep_from_json(to_json(s));
        CHECK(back.name == s.name);
        CHECK(back.base == s.base);
        CHECK(back.levels == s.levels);
        CHECK(back.slacks == s.slacks);
        CHECK(back.repetitions == s.repetitions);
    }
}

TEST_CASE("sweep output does not depend on the worker count", "[harness][slow]") {
    const SweepSpec s = tiny_vertical_sweep();
    auto text = [&](int jobs) {
        const SweepResult r = run_sweep(s, jobs);
        std::ostringstream rows, cells;
        write_sweep_rows_csv(rows, r);
        write_sweep_cells_csv(cells, r);
        return rows.str() + "\n" + cells.str();
    };
    const std::string one = text(1);
    CHECK(one == text(3));
    CHECK(one == text(1));

    std::istringstream in(one.substr(0, one.find("\n\n") + 1));
    const CsvTable t = parse_csv(in);
    CHECK(t.rows.size() == 8);
    for (const auto& st : t.rows) CHECK(st[*t.column("status")] == "ok");
}

TEST_CASE("sweep summaries average per cell", "[harness]") {
    std::vector<SweepRow> rows(4);
    for (int i = 0; i < 4; ++i) {
        rows[i].label.level = 0.047;
        rows[i].label.slack = i < 2 ? 0.006 : 0.0;
        rows[i].label.rep = i % 2;
        rows[i].metrics.standby_E_d = 0.01 * (i + 1);
        rows[i].metrics.hop_height = i == 1 ? missing : 0.05;
        rows[i].metrics.failures.slip = 1;
    }
    rows[3].metrics.status = TrialStatus::stopped;
    const auto cells = summarize(rows);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].slack == 0.006);
    CHECK(cells[0].trials == 2);
    CHECK(cells[0].standby_E_d == Approx(0.015));
    CHECK(cells[0].hop_height == Approx(0.05));
    CHECK(cells[0].slip_failures == 2);
    CHECK(cells[1].ok == 1);
}

TEST_CASE("CSV outputs read back exactly", "[harness]") {
    ScenarioConfig c = vertical_scenario();
    c.duration = 3.0;
    c.damper.slack = 0.003;
    const TrialRecord r = simulate(c);
    std::stringstream steps, trace;
    write_steps_csv(steps, r);
    write_trace_csv(trace, r);
    const CsvTable st = parse_csv(steps);
    const CsvTable tr = parse_csv(trace);
    CHECK(st.header == steps_columns());
    CHECK(tr.header == trace_columns());
    REQUIRE(st.rows.size() == r.steps.size());
    const auto ed = st.numbers("E_d");
    const auto apex = st.numbers("apex");
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        CHECK(ed[i] == r.steps[i].E_d);
        if (std::isnan(r.steps[i].apex))
            CHECK(std::isnan(apex[i]));
        else
            CHECK(apex[i] == r.steps[i].apex);
    }
    const auto y = tr.numbers("y");
    REQUIRE(y.size() == r.trace.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == r.trace[i].y);

    std::istringstream bad("a,b\n1,2,3\n");
    CHECK_THROWS_AS(parse_csv(bad), DomainError);
}

TEST_CASE("metrics row has one cell per column", "[harness]") {
    TrialMetrics m;
    CHECK(metrics_cells(Experiment::vertical, TrialLabel{}, m).size() == metrics_columns().size());
}

TEST_CASE("calibration keeps an exact fit unchanged", "[harness][slow]") {
    ScenarioConfig v = vertical_scenario();
    ScenarioConfig f = forward_scenario();
    f.revolutions = 1.0;
    CalibrationOptions opt;
    opt.trial_duration = 6.0;

    CalibrationTargets t;
    t.slacks = {0.006, 0.0};
    t.standby_E_d = standby_dissipation(v, t.slacks, v.damper.c, v.damper.k_rec, opt.trial_duration);
    ScenarioConfig fw = f;
    fw.damper.slack = t.cot_slack;
    fw.record_trace = false;
    const CotSplit split = cot_split(simulate(fw), fw);
    t.cot = (split.shaft + f.motor.R * split.joule) / (f.body.m * f.body.g * split.distance);

    const CalibrationResult r = calibrate(v, f, t, opt);
    CHECK(r.evaluations == 1);
    CHECK_FALSE(r.damper_changed);
    CHECK_FALSE(r.motor_changed);
    CHECK(r.damper == v.damper);
    CHECK(r.motor.R == f.motor.R);
    CHECK(r.objective <= opt.objective_tol);
    CHECK(r.converged);
}

TEST_CASE("calibration objective grows away from the fit and the fit is recovered", "[harness][slow]") {
    ScenarioConfig v = vertical_scenario();
    ScenarioConfig f = forward_scenario();
    f.revolutions = 1.0;
    CalibrationOptions opt;
    opt.trial_duration = 6.0;
    CalibrationTargets t;
    t.slacks = {0.006, 0.003, 0.0};
    t.standby_E_d = standby_dissipation(v, t.slacks, v.damper.c, v.damper.k_rec, opt.trial_duration);

    const double at_fit = standby_objective(t.standby_E_d, t, opt.energy_floor);
    const double doubled = standby_objective(
        standby_dissipation(v, t.slacks, 2.0 * v.damper.c, v.damper.k_rec, opt.trial_duration), t, opt.energy_floor);
    CHECK(at_fit == 0.0);
    CHECK(doubled > 0.01);

    ScenarioConfig start = v;
    start.damper.c *= 1.6;
    const CalibrationResult r = calibrate(start, f, t, opt);
    CHECK(r.damper_changed);
    CHECK(r.damper.c == Approx(v.damper.c).epsilon(0.05));
    for (double res : r.residuals) CHECK(std::abs(res) < 0.05);
    CHECK(r.simulated_cot == Approx(t.cot).epsilon(1e-9));
}

TEST_CASE("calibration overlay and targets JSON", "[harness]") {
    CalibrationResult r;
    r.damper.c = 123.0;
    r.damper.k_rec = 456.0;
    r.motor.R = 0.5;
    for (const char* e : {"vertical", "forward"}) {
        json j = calibration_overlay(r);
        j["experiment"] = e;
        const ScenarioConfig c = scenario_from_json(j);
        CHECK(c.damper.c == 123.0);
        CHECK(c.damper.k_rec == 456.0);
        CHECK(c.motor.R == 0.5);
    }
    const CalibrationTargets t;
    const CalibrationTargets back = targets_from_json(to_json(t));
    CHECK(back.slacks == t.slacks);
    CHECK(back.standby_E_d == t.standby_E_d);
    CHECK(back.cot == t.cot);
    CHECK(field_of([] { targets_from_json(json::parse(R"({"slacks": [0.01], "standby_E_d": [1, 2]})")); }) ==
          "standby_E_d");
    CHECK(field_of([] { targets_from_json(json::parse(R"({"target": 1})")); }) == "target");
}

TEST_CASE("golden_section finds a parabola minimum", "[harness]") {
    const double x = detail::golden_section([](double u) { return (u - 0.37) * (u - 0.37); }, -2.0, 3.0, 60);
    CHECK(x == Approx(0.37).margin(1e-9));
}

TEST_CASE("trace analysis agrees with the engine", "[harness][slow]") {
    ScenarioConfig c = vertical_scenario();
    c.duration = 10.0;
    c.damper.slack = 0.0;
    const TrialRecord r = simulate(c);
    std::stringstream ss;
    write_trace_csv(ss, r);
    const TraceAnalysis a = analyze_trace(parse_csv(ss));
    CHECK(a.sample_rate == Approx(1000.0));
    CHECK(a.cutoff >= 2.0);
    CHECK(a.cutoff <= 60.0);
    std::size_t complete = 0;
    double ed = 0.0, apex = 0.0;
    int n_apex = 0;
    for (const auto& s : r.steps)
        if (!std::isnan(s.liftoff_t)) {
            ++complete;
            ed += s.E_d;
            if (!std::isnan(s.apex)) {
                apex += s.apex;
                ++n_apex;
            }
        }
    CHECK(static_cast<double>(a.stances.size()) == Approx(static_cast<double>(complete)).margin(1.0));
    CHECK(a.mean_E_d == Approx(ed / static_cast<double>(complete)).epsilon(0.25));
    CHECK(a.mean_apex == Approx(apex / n_apex).margin(1e-3));

    std::stringstream out;
    write_analysis_csv(out, a);
    CHECK(parse_csv(out).header == steps_columns());
}

TEST_CASE("SVG charts", "[harness]") {
    Chart ch{"a < b & c", "x", "y", {Series{"s", {0.0, 1.0, std::nan(""), 2.0, 3.0}, {0.0, 1.0, 5.0, 4.0, 9.0}}}};
    const std::string s = render_svg(ch);
    CHECK(s.rfind("<?xml", 0) == 0);
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(s.find("nan") == std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1)) ++polylines;
    CHECK(polylines == 2);

    CHECK(svg::nice_step(1.0) == Approx(0.2));
    CHECK(svg::nice_step(37.0) == Approx(5.0));

    CsvTable flat;
    flat.header = {"grf", "piston_pos", "f_damper"};
    flat.rows = {{"0", "0", "0"}, {"0", "0", "0"}};
    CHECK(workloop_chart(flat).title.find("no stance") != std::string::npos);
    CHECK_NOTHROW(render_svg(workloop_chart(flat)));

    const std::vector<double> grf{0, 1, 2, 0, 0, 3, 3, 0, 4};
    const auto runs = stance_runs(grf);
    REQUIRE(runs.size() == 3);
    CHECK(runs[0] == std::make_pair<std::size_t, std::size_t>(1, 3));
    CHECK(runs[2] == std::make_pair<std::size_t, std::size_t>(8, 9));
}
