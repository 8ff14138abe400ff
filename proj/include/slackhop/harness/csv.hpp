#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "../analysis/metrics.hpp"
#include "../dynamics.hpp"
#include "../errors.hpp"

namespace slackhop {

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

inline const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols{"t",          "x",        "y",       "vy",       "alpha",
                                               "grf",        "f_spring", "f_damper", "piston_pos", "tau_hip",
                                               "tau_knee",   "p_elec"};
    return cols;
}

inline void write_trace_csv(std::ostream& out, const TrialRecord& r) {
    CsvWriter w(out);
    w.row(trace_columns());
    for (const auto& s : r.trace)
        w.row({fmt(s.t), fmt(s.x), fmt(s.y), fmt(s.vy), fmt(s.alpha), fmt(s.grf), fmt(s.f_spring), fmt(s.f_damper),
               fmt(s.piston_pos), fmt(s.tau_hip), fmt(s.tau_knee), fmt(s.p_elec)});
}

inline const std::vector<std::string>& steps_columns() {
    static const std::vector<std::string> cols{"step", "touchdown_t", "liftoff_t", "apex", "E_d", "delay_ms", "slip", "stop"};
    return cols;
}

inline void write_steps_csv(std::ostream& out, const TrialRecord& r) {
    CsvWriter w(out);
    w.row(steps_columns());
    for (const auto& s : r.steps)
        w.row({fmt(s.index), fmt(s.touchdown_t), fmt(s.liftoff_t), fmt(s.apex), fmt(s.E_d), fmt(s.delay * 1e3),
               fmt(s.slip ? 1 : 0), fmt(s.stop ? 1 : 0)});
}

/// Where a trial sits in a sweep. Single runs use the defaults.
struct TrialLabel {
    std::string terrain = "flat";
    double level = 0.0;  ///< perturbation size [m]
    double slack = 0.0;  ///< [m]
    int rep = 0;
    std::uint64_t seed = 0;
};

inline const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols{
        "experiment",   "terrain",      "level_mm",       "slack_mm",     "rep",         "seed",
        "status",       "steps",        "hop_height_mm",  "E_d_mJ",       "extra_E_d_mJ", "delay_ms",
        "recovery_steps", "not_recovered", "CoH",          "CoT",          "speed_m_s",   "cycle_std_ms",
        "slip_failures", "stop_failures", "encounters",     "failure_steps"};
    return cols;
}

inline std::vector<std::string> metrics_cells(Experiment e, const TrialLabel& l, const TrialMetrics& m) {
    return {to_string(e),
            l.terrain,
            fmt(l.level * 1e3),
            fmt(l.slack * 1e3),
            fmt(l.rep),
            std::to_string(l.seed),
            to_string(m.status),
            fmt(m.steps),
            fmt(m.hop_height * 1e3),
            fmt(m.standby_E_d * 1e3),
            fmt(m.extra_E_d * 1e3),
            fmt(m.delay * 1e3),
            fmt(m.recovery_steps.value_or(missing)),
            fmt(m.not_recovered),
            fmt(m.coh),
            fmt(m.cot),
            fmt(m.speed),
            fmt(m.cycle_time_std * 1e3),
            fmt(m.failures.slip),
            fmt(m.failures.stop),
            fmt(m.failures.encounters),
            fmt(m.failures.failure_steps)};
}

/// Header plus numeric columns read back from one of the CSV files above.
/// Non-numeric cells (status, labels) are kept as text.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }

    std::vector<double> numbers(const std::string& name) const {
        const auto c = column(name);
        if (!c) throw DomainError("csv: missing column '" + name + "'");
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::string& s = rows[r][*c];
            double v = 0.0;
            if (s == "nan") v = missing;
            else if (s == "inf") v = std::numeric_limits<double>::infinity();
            else if (s == "-inf") v = -std::numeric_limits<double>::infinity();
            else {
                const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
                if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                    throw DomainError("csv: row " + std::to_string(r + 2) + " column '" + name + "' is not a number");
            }
            out.push_back(v);
        }
        return out;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable parse_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw DomainError("csv: missing header");
    if (line.back() == '\r') line.pop_back();
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw DomainError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    return parse_csv(in);
}

}  // namespace slackhop
