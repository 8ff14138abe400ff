#pragma once

// Post-processing of a recorded trace CSV: residual-selected zero-lag
// filtering of the force channels, then per-stance work loops, engagement
// delays and apex heights.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "../analysis/filter.hpp"
#include "../analysis/metrics.hpp"
#include "csv.hpp"
#include "plot.hpp"

namespace slackhop {

struct TraceAnalysisOptions {
    double cutoff_lo = 2.0;   ///< [Hz]
    double cutoff_hi = 60.0;  ///< [Hz]
    double cutoff_step = 1.0; ///< [Hz]
    int order = 4;
    int span = 5;                  ///< moving-average span for the piston position
    double onset_threshold = 0.5;  ///< [N]
    double rest_length = 0.310;    ///< subtracted from the hip height for apex values [m]
};

struct StanceAnalysis {
    int index = 0;
    double touchdown_t = missing, liftoff_t = missing;
    double apex = missing;   ///< highest hip point of the following flight minus rest_length [m]
    double E_d = missing;    ///< [J]
    double delay = missing;  ///< [s]
};

struct TraceAnalysis {
    double sample_rate = 0.0;  ///< [Hz]
    double cutoff = 0.0;       ///< residual-selected force cutoff [Hz]
    std::vector<StanceAnalysis> stances;
    double mean_E_d = missing, mean_delay = missing, mean_apex = missing;
};

inline TraceAnalysis analyze_trace(const CsvTable& trace, const TraceAnalysisOptions& opt = {}) {
    const auto t = trace.numbers("t");
    const auto y = trace.numbers("y");
    const auto grf = trace.numbers("grf");
    if (t.size() < 2) throw DomainError("analyze: trace needs at least two samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw DomainError("analyze: time column must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-3 * dt) throw DomainError("analyze: trace must be uniformly sampled");

    TraceAnalysis a;
    a.sample_rate = 1.0 / dt;
    const double hi = std::min(opt.cutoff_hi, 0.45 * a.sample_rate);
    a.cutoff = residual_cutoff(grf, cutoff_grid(opt.cutoff_lo, hi, opt.cutoff_step), a.sample_rate, opt.order);
    const FilterSpec spec{opt.order, a.cutoff, a.sample_rate};
    const auto spring = butterworth_zero_lag(trace.numbers("f_spring"), spec);
    const auto damper = butterworth_zero_lag(trace.numbers("f_damper"), spec);
    const auto piston = moving_average(trace.numbers("piston_pos"), opt.span);

    auto runs = stance_runs(grf);
    std::vector<double> ed, de, ap;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto [b, e] = runs[k];
        StanceAnalysis s;
        s.index = static_cast<int>(k) + 1;
        s.touchdown_t = t[b];
        if (e < t.size()) s.liftoff_t = t[e];
        const std::vector<double> pos(piston.begin() + static_cast<std::ptrdiff_t>(b), piston.begin() + static_cast<std::ptrdiff_t>(e));
        const std::vector<double> fd(damper.begin() + static_cast<std::ptrdiff_t>(b), damper.begin() + static_cast<std::ptrdiff_t>(e));
        const std::vector<double> fs(spring.begin() + static_cast<std::ptrdiff_t>(b), spring.begin() + static_cast<std::ptrdiff_t>(e));
        if (e < t.size()) {
            s.E_d = loop_energy(pos, fd);
            ed.push_back(s.E_d);
            if (auto d = engagement_delay(fs, fd, dt, opt.onset_threshold)) {
                s.delay = *d;
                de.push_back(*d);
            }
            const std::size_t next = k + 1 < runs.size() ? runs[k + 1].first : t.size();
            if (k + 1 < runs.size()) {
                s.apex = *std::max_element(y.begin() + static_cast<std::ptrdiff_t>(e), y.begin() + static_cast<std::ptrdiff_t>(next)) -
                         opt.rest_length;
                ap.push_back(s.apex);
            }
        }
        a.stances.push_back(s);
    }
    a.mean_E_d = detail::mean_of(ed);
    a.mean_delay = detail::mean_of(de);
    a.mean_apex = detail::mean_of(ap);
    return a;
}

/// Stance table in the steps schema; slip and stop are not recoverable from
/// a trace and are written as 0.
inline void write_analysis_csv(std::ostream& out, const TraceAnalysis& a) {
    CsvWriter w(out);
    w.row(steps_columns());
    for (const auto& s : a.stances)
        w.row({fmt(s.index), fmt(s.touchdown_t), fmt(s.liftoff_t), fmt(s.apex), fmt(s.E_d), fmt(s.delay * 1e3), "0", "0"});
}

}  // namespace slackhop
