#include <catch_amalgamated.hpp>

#include <random>

#include <slackhop/analysis/filter.hpp>
#include <slackhop/analysis/metrics.hpp>

using namespace slackhop;
using Catch::Approx;

namespace {

std::vector<double> sine(std::size_t n, double f, double fs, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(two_pi * f * static_cast<double>(i) / fs + phase);
    return x;
}

/// Lag (in samples) of the cross-correlation peak of b against a.
int xcorr_peak_lag(const std::vector<double>& a, const std::vector<double>& b, int max_lag) {
    int best = 0;
    double best_v = -1e300;
    const int n = static_cast<int>(a.size());
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (int i = std::max(0, -lag); i < std::min(n, n - lag); ++i) s += a[i] * b[i + lag];
        if (s > best_v) {
            best_v = s;
            best = lag;
        }
    }
    return best;
}

double rms_mid(const std::vector<double>& x) {
    const std::size_t a = x.size() / 4, b = 3 * x.size() / 4;
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += x[i] * x[i];
    return std::sqrt(s / static_cast<double>(b - a));
}

TrialRecord synthetic_forward(const std::vector<int>& perturbed, const std::vector<int>& slip,
                              const std::vector<int>& stop, int n) {
    TrialRecord r;
    r.experiment = Experiment::forward;
    for (int i = 0; i < n; ++i) {
        StepSummary s;
        s.index = i + 1;
        r.steps.push_back(s);
    }
    for (int i : perturbed) r.steps[i].perturbed = true;
    for (int i : slip) r.steps[i].slip = true;
    for (int i : stop) r.steps[i].stop = true;
    return r;
}

}  // namespace

TEST_CASE("coh and cot hand values", "[analysis]") {
    CHECK(coh(1.94 * 9.81 * 0.05, 1.94, 0.05) == Approx(1.0));
    CHECK(coh(6.39, 1.94, 0.0533) == Approx(6.30).margin(0.005));
    CHECK(cot(0.94 * 9.81 * 10.0, 0.94, 10.0) == Approx(1.0));
    CHECK(cot(93.1, 0.94, 10.0) == Approx(1.01).margin(0.005));
    CHECK(cot(0.0, 0.94, 10.0) == 0.0);
    CHECK_THROWS_AS(coh(1.0, 1.94, 0.0), MetricError);
    CHECK_THROWS_AS(cot(1.0, 0.94, 0.0), MetricError);
}

TEST_CASE("coh and cot are scale invariant", "[analysis][property]") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double E = u(rng), m = u(rng), h = u(rng) * 0.01, k = u(rng);
        CHECK(coh(k * E, k * m, h) == Approx(coh(E, m, h)).epsilon(1e-12));
        CHECK(coh(k * E, m, k * h) == Approx(coh(E, m, h)).epsilon(1e-12));
        CHECK(cot(k * E, m, k * h) == Approx(cot(E, m, h)).epsilon(1e-12));
    }
}

TEST_CASE("recovery_steps band logic", "[analysis]") {
    const std::vector<double> pre(10, 50.0);
    auto with_post = [&](std::vector<double> post) {
        std::vector<double> a = pre;
        a.insert(a.end(), post.begin(), post.end());
        return a;
    };
    CHECK(recovery_steps(with_post({50.0, 50.0}), 10) == 1);
    CHECK(recovery_steps(with_post({44.0, 47.0, 48.3, 49.5}), 10) == 3);
    CHECK(recovery_steps(with_post({44.0, 47.0, 48.0, 49.5}), 10) == 3);
    CHECK(recovery_steps(with_post({44.0, 47.0, 47.99, 49.5}), 10) == 4);
    CHECK(recovery_steps(with_post({60.0, 52.0}), 10) == 2);
    CHECK_FALSE(recovery_steps(with_post({45.0, 45.0, 45.0}), 10).has_value());
    CHECK_THROWS_AS(recovery_steps({50.0, 50.0, 40.0}, 2), MetricError);
    CHECK_THROWS_AS(recovery_steps({50.0}, 5), MetricError);
}

TEST_CASE("recovery_steps uses only the window before the perturbation", "[analysis]") {
    // Early transient outside the 10-step window is ignored.
    std::vector<double> a{10.0, 10.0, 10.0};
    for (int i = 0; i < 10; ++i) a.push_back(50.0);
    a.push_back(40.0);
    a.push_back(49.0);
    CHECK(recovery_steps(a, 13) == 2);
}

TEST_CASE("recovery_steps is invariant to uniform scaling", "[analysis][property]") {
    std::mt19937 rng(62);
    std::uniform_real_distribution<double> u(0.8, 1.2), s(0.01, 100.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a;
        for (int i = 0; i < 20; ++i) a.push_back(50.0 * u(rng));
        const double k = s(rng);
        std::vector<double> b = a;
        for (double& v : b) v *= k;
        CHECK(recovery_steps(a, 10) == recovery_steps(b, 10));
    }
}

TEST_CASE("engagement_delay", "[analysis]") {
    std::vector<double> spring{0, 0.2, 1, 5, 10, 20, 10, 0};
    std::vector<double> damper{0, 0.2, 1, 5, 10, 20, 10, 0};
    CHECK(engagement_delay(spring, damper, 1e-3) == 0.0);
    std::vector<double> late{0, 0, 0, 0, 0.3, 0.9, 2, 0};
    CHECK(*engagement_delay(spring, late, 1e-3) == Approx(3e-3));
    CHECK_FALSE(engagement_delay(spring, std::vector<double>(8, 0.0), 1e-3).has_value());
}

TEST_CASE("cycle_time_std", "[analysis]") {
    CHECK(cycle_time_std({0.0, 0.5, 1.0, 1.5}) == Approx(0.0).margin(1e-15));
    CHECK(cycle_time_std({0.0, 0.5, 1.1, 1.6, 2.2}) == Approx(0.0577).margin(5e-5));
    CHECK_THROWS_AS(cycle_time_std({0.0, 0.5}), MetricError);
}

TEST_CASE("loop_energy matches closed-form loops", "[analysis][property]") {
    // Ellipse x = a cos t, F = F0 + b sin(-t) traversed with force high on the way up: area pi a b.
    for (int n : {200, 1000}) {
        const double a = 0.004, b = 12.0;
        std::vector<double> x, f;
        for (int i = 0; i < n; ++i) {
            const double t = two_pi * i / n;
            x.push_back(-a * std::cos(t));
            f.push_back(20.0 + b * std::sin(t));
        }
        CHECK(std::abs(loop_energy(x, f) - pi * a * b) / (pi * a * b) < 0.005);
    }
    // Rectangle traversed counter to the dissipative sense gives a negative area.
    CHECK(loop_energy({0, 1, 1, 0}, {2, 2, 1, 1}) == Approx(1.0));
    CHECK(loop_energy({0, 1, 1, 0}, {1, 1, 2, 2}) == Approx(-1.0));
    CHECK_THROWS_AS(loop_energy({0, 1}, {1}), MetricError);
}

TEST_CASE("classify_failures", "[analysis]") {
    CHECK(classify_failures(synthetic_forward({}, {}, {}, 20)).total() == 0);

    std::vector<int> enc{5, 15, 25, 35, 45, 55, 65, 75, 85, 95};
    auto r = synthetic_forward(enc, {}, {48}, 100);
    const auto f = classify_failures(r);
    CHECK(f.encounters == 10);
    CHECK(f.stop == 1);
    CHECK(f.slip == 0);
    CHECK(f.total() == 1);

    // First flag wins; flags outside the window are not attributed.
    auto s = synthetic_forward({5, 30}, {7, 8}, {6, 20}, 40);
    const auto g = classify_failures(s);
    CHECK(g.stop == 1);
    CHECK(g.slip == 0);
    CHECK(g.failure_steps == 4);

    // Abnormal end close to an encounter counts as a stop.
    auto t = synthetic_forward({18}, {}, {}, 20);
    t.status = TrialStatus::bottomed_out;
    CHECK(classify_failures(t).stop == 1);
}

TEST_CASE("butterworth sections have unit DC gain and half power at the cutoff", "[analysis]") {
    for (int order : {1, 2, 3, 4, 6}) {
        const FilterSpec spec{order, 25.0, 1000.0};
        const auto sos = butterworth_sections(spec);
        double dc = 1.0;
        for (const auto& b : sos) dc *= b.dc_gain();
        CHECK(dc == Approx(1.0).epsilon(1e-12));
        const double h = magnitude_response(sos, 25.0, 1000.0);
        CHECK(h * h == Approx(0.5).epsilon(1e-9));
        CHECK(magnitude_response(sos, 5.0, 1000.0) > h);
        CHECK(magnitude_response(sos, 100.0, 1000.0) < h);
    }
}

TEST_CASE("zero-lag filter keeps constants", "[analysis]") {
    const std::vector<double> x(500, 3.25);
    for (double v : butterworth_zero_lag(x, {4, 10.0, 1000.0})) CHECK(v == Approx(3.25).epsilon(1e-12));
    CHECK_THROWS_AS(butterworth_zero_lag(std::vector<double>(10, 1.0), {4, 10.0, 1000.0}), DomainError);
    CHECK_THROWS_AS(butterworth_zero_lag(x, {4, 600.0, 1000.0}), DomainError);
}

TEST_CASE("zero-lag filter has zero phase", "[analysis][property]") {
    for (double f : {2.0, 5.0, 8.0}) {
        const auto x = sine(4000, f, 1000.0, 1.0, 0.3);
        const auto y = butterworth_zero_lag(x, {4, 20.0, 1000.0});
        CHECK(xcorr_peak_lag(x, y, 50) == 0);
    }
    // Broadband input: the composed operator is symmetric, so an impulse
    // response in the middle of a long record is even about its centre.
    std::vector<double> imp(2001, 0.0);
    imp[1000] = 1.0;
    const auto h = butterworth_zero_lag(imp, {4, 30.0, 1000.0});
    for (int k = 1; k < 200; ++k) CHECK(h[1000 + k] == Approx(h[1000 - k]).margin(1e-12));
}

TEST_CASE("forward-backward 4th order filter halves the amplitude at the cutoff", "[analysis]") {
    const double fc = 20.0, fs = 1000.0;
    const auto x = sine(20000, fc, fs);
    const auto y = butterworth_zero_lag(x, {4, fc, fs});
    const double ratio = rms_mid(y) / rms_mid(x);
    CHECK(std::abs(ratio - 0.50) <= 0.02);
}

TEST_CASE("residual_cutoff", "[analysis]") {
    const double fs = 1000.0;
    const auto grid = cutoff_grid(2.0, 60.0, 1.0);
    REQUIRE(grid.size() == 59);

    // Noise-free ramp: degenerate, highest candidate.
    std::vector<double> ramp(1000);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.01 * static_cast<double>(i);
    CHECK(residual_cutoff(ramp, grid, fs) == grid.back());

    // White noise only: the residual curve is a nearly flat line at the noise
    // level, so the first candidates already reach the intercept.
    std::mt19937 rng(63);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> w(4000);
    for (double& v : w) v = noise(rng);
    const ResidualCurve rc = residual_curve(w, grid, fs);
    CHECK(rc.intercept == Approx(1.0).margin(0.05));
    CHECK(std::abs(rc.slope) * (grid.back() - grid.front()) < 0.1 * rc.intercept);
    CHECK(residual_cutoff(w, grid, fs) <= grid.front() + (grid.back() - grid.front()) / 6.0);

    // Band-limited signal with a 10 Hz edge plus unit white noise.
    const double edge = 10.0;
    std::vector<double> sig(4000, 0.0);
    for (double f : {3.0, 6.0, edge}) {
        const auto s = sine(sig.size(), f, fs, 0.5, 0.7 * f);
        for (std::size_t i = 0; i < sig.size(); ++i) sig[i] += s[i];
    }
    for (double& v : sig) v += noise(rng);
    CHECK(std::abs(residual_cutoff(sig, grid, fs) - edge) <= 2.0);
    CHECK_THROWS_AS(residual_cutoff(sig, {5.0, 10.0}, fs), DomainError);
}

TEST_CASE("moving_average", "[analysis]") {
    for (double v : moving_average(std::vector<double>(11, 1.0))) CHECK(v == Approx(1.0));
    std::vector<double> imp(11, 0.0);
    imp[5] = 1.0;
    const auto y = moving_average(imp);
    CHECK(y[5] == Approx(0.2));
    CHECK(y[3] == Approx(0.2));
    CHECK(y[2] == 0.0);
    std::vector<double> ramp(20);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 3.0 * static_cast<double>(i) - 1.0;
    const auto r = moving_average(ramp);
    for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(r[i] == Approx(ramp[i]));
    CHECK_THROWS_AS(moving_average(ramp, 4), DomainError);
}

TEST_CASE("vertical metrics on a synthetic record", "[analysis]") {
    ScenarioConfig c = vertical_scenario();
    TrialRecord r;
    for (int i = 0; i < 16; ++i) {
        StepSummary s;
        s.index = i + 1;
        s.touchdown_t = 0.5 * i;
        s.liftoff_t = s.touchdown_t + 0.15;
        s.cycle_time = 0.5;
        s.apex = i == 12 ? 0.040 : (i == 13 ? 0.046 : 0.050);
        s.E_elec = 6.0;
        s.E_d = i == 12 ? 0.090 : 0.030;
        s.delay = 0.02;
        s.perturbed = i == 12;
        r.steps.push_back(s);
    }
    const TrialMetrics m = vertical_metrics(r, c);
    CHECK(m.steps == 10);
    CHECK(m.standby_E_d == Approx(0.030));
    CHECK(m.extra_E_d == Approx(0.060));
    CHECK(m.delay == Approx(0.02));
    CHECK(m.hop_height == Approx(0.050));
    CHECK(m.coh == Approx(6.0 / (1.94 * 9.81 * 0.050)));
    REQUIRE(m.recovery_steps.has_value());
    CHECK(*m.recovery_steps == 3.0);
    CHECK(m.cycle_time_std == Approx(0.0).margin(1e-12));
}
