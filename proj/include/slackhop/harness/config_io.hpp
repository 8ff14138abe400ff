#pragma once

// JSON form of ScenarioConfig. A file is an overlay on the defaults for its
// experiment: keys that are present replace the default, unknown keys are
// rejected with their full path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../scenario.hpp"

namespace slackhop {

using json = nlohmann::ordered_json;

inline constexpr const char* scenario_schema = "slackhop.scenario/1";

namespace io {

template <class V> void visit(V& v, BodyParams& p) {
    v("m", p.m);
    v("g", p.g);
    v("mu", p.mu);
    v("slip_hold", p.slip_hold);
}
template <class V> void visit(V& v, LegGeometry& p) {
    v("l0", p.l0);
    v("l1", p.l1);
    v("l2", p.l2);
    v("l3", p.l3);
    v("r_k", p.r_k);
    v("r_d", p.r_d);
    v("r_pk", p.r_pk);
    v("alpha0", p.alpha0);
}
template <class V> void visit(V& v, SpringParams& p) { v("k_k", p.k_k); }
template <class V> void visit(V& v, DamperParams& p) {
    v("c", p.c);
    v("exponent", p.exponent);
    v("k_rec", p.k_rec);
    v("slack", p.slack);
}
template <class V> void visit(V& v, MotorParams& p) {
    v("kt", p.kt);
    v("R", p.R);
    v("tau_max_motor", p.tau_max_motor);
    v("gear_hip", p.gear_hip);
    v("gear_knee", p.gear_knee);
    v("allow_regen", p.allow_regen);
    v("knee_drag", p.knee_drag);
}
template <class V> void visit(V& v, VerticalSchedule& p) {
    v("f_v", p.f_v);
    v("tau_v", p.tau_v);
    v("duty", p.duty);
    v("phase0", p.phase0);
}
template <class V> void visit(V& v, PdGains& p) {
    v("kp", p.kp);
    v("kd", p.kd);
}
template <class V> void visit(V& v, CpgParams& p) {
    v("A_hip", p.A_hip);
    v("O_hip", p.O_hip);
    v("f_f", p.f_f);
    v("D_vir", p.D_vir);
    v("tau_f", p.tau_f);
    v("knee_phase_shift", p.knee_phase_shift);
    v("knee_duty", p.knee_duty);
    v("phase0", p.phase0);
    v("swing_inertia", p.swing_inertia);
    v.object("hip_gains", p.hip_gains);
}
template <class V> void visit(V& v, TerrainProfile& p) {
    v.enumeration("kind", p.kind, [](TerrainKind k) { return std::string(to_string(k)); }, terrain_kind_from_string);
    v("block_height", p.block_height);
    v("removal_step", p.removal_step);
    v("amplitude", p.amplitude);
    v("wavelength", p.wavelength);
    v("n_blocks", p.n_blocks);
    v("ramp_length", p.ramp_length);
    v("ramp_height", p.ramp_height);
    v("track_length", p.track_length);
    v("start", p.start);
}
template <class V> void visit(V& v, IntegratorConfig& p) {
    v("dt", p.dt);
    v("event_tol", p.event_tol);
    v("sample_rate", p.sample_rate);
}
template <class V> void visit(V& v, AnalysisOptions& p) {
    v("onset_threshold", p.onset_threshold);
    v("steady_window", p.steady_window);
    v("recovery_band", p.recovery_band);
    v("failure_window", p.failure_window);
    v("stop_progress", p.stop_progress);
    v("stop_cycles", p.stop_cycles);
}
template <class V> void visit(V& v, SlackTorque& p) {
    v("slack", p.slack);
    v("tau", p.tau);
}

/// Everything except `experiment`, which selects the defaults and is handled
/// by the callers.
template <class V> void visit(V& v, ScenarioConfig& c) {
    v("name", c.name);
    v.object("body", c.body);
    v.object("geometry", c.geometry);
    v.object("spring", c.spring);
    v.object("damper", c.damper);
    v.object("motor", c.motor);
    v.object("vertical", c.vertical);
    v.array("knee_torque_by_slack", c.knee_torque_by_slack);
    v.object("cpg", c.cpg);
    v.object("terrain", c.terrain);
    v.object("integrator", c.integrator);
    v.object("analysis", c.analysis);
    v("repetitions", c.repetitions);
    v("seed", c.seed);
    v("duration", c.duration);
    v("revolutions", c.revolutions);
    v("max_duration", c.max_duration);
    v("drop_height", c.drop_height);
    v("initial_speed", c.initial_speed);
    v("initial_vy", c.initial_vy);
    v("alpha_min", c.alpha_min);
    v("record_trace", c.record_trace);
}

class Writer {
public:
    explicit Writer(json& j) : j_(j) {}

    void operator()(const char* key, double& v) {
        if (std::isinf(v))
            j_[key] = v > 0 ? "inf" : "-inf";
        else
            j_[key] = v;
    }
    void operator()(const char* key, int& v) { j_[key] = v; }
    void operator()(const char* key, bool& v) { j_[key] = v; }
    void operator()(const char* key, std::uint64_t& v) { j_[key] = v; }
    void operator()(const char* key, std::string& v) { j_[key] = v; }

    template <class T> void object(const char* key, T& sub) {
        json& o = j_[key];
        o = json::object();
        Writer w(o);
        visit(w, sub);
    }
    template <class T> void array(const char* key, std::vector<T>& items) {
        json a = json::array();
        for (auto& it : items) {
            json o = json::object();
            Writer w(o);
            visit(w, it);
            a.push_back(std::move(o));
        }
        j_[key] = std::move(a);
    }
    template <class E, class ToS, class FromS> void enumeration(const char* key, E& v, ToS to_s, FromS) {
        j_[key] = to_s(v);
    }

private:
    json& j_;
};

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void operator()(const char* key, double& v) {
        const json* n = find(key);
        if (!n) return;
        if (n->is_string()) {
            const auto s = n->get<std::string>();
            if (s == "inf") v = std::numeric_limits<double>::infinity();
            else if (s == "-inf") v = -std::numeric_limits<double>::infinity();
            else throw ConfigError(field(key), "expected a number");
            return;
        }
        if (!n->is_number()) throw ConfigError(field(key), "expected a number");
        v = n->get<double>();
    }
    void operator()(const char* key, int& v) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        v = n->get<int>();
    }
    void operator()(const char* key, bool& v) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_boolean()) throw ConfigError(field(key), "expected true or false");
        v = n->get<bool>();
    }
    void operator()(const char* key, std::uint64_t& v) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_number_unsigned() && !(n->is_number_integer() && n->get<long long>() >= 0))
            throw ConfigError(field(key), "expected a non-negative integer");
        v = n->get<std::uint64_t>();
    }
    void operator()(const char* key, std::string& v) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_string()) throw ConfigError(field(key), "expected a string");
        v = n->get<std::string>();
    }

    template <class T> void object(const char* key, T& sub) {
        const json* n = find(key);
        if (!n) return;
        Reader r(*n, field(key));
        visit(r, sub);
        r.finish();
    }
    template <class T> void array(const char* key, std::vector<T>& items) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_array()) throw ConfigError(field(key), "expected an array");
        items.clear();
        for (std::size_t i = 0; i < n->size(); ++i) {
            T it{};
            Reader r((*n)[i], field(key) + "[" + std::to_string(i) + "]");
            visit(r, it);
            r.finish();
            items.push_back(it);
        }
    }
    template <class E, class ToS, class FromS> void enumeration(const char* key, E& v, ToS, FromS from_s) {
        const json* n = find(key);
        if (!n) return;
        if (!n->is_string()) throw ConfigError(field(key), "expected a string");
        try {
            v = from_s(n->get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(field(key), e.reason());
        }
    }

    /// Marks keys handled outside the visitor.
    void skip(const char* key) { seen_.insert(key); }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigError(field(item.key().c_str()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;

    std::string field(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
};

}  // namespace io

inline json to_json(const ScenarioConfig& config) {
    ScenarioConfig c = config;
    json j = json::object();
    j["schema"] = scenario_schema;
    j["experiment"] = to_string(c.experiment);
    io::Writer w(j);
    io::visit(w, c);
    return j;
}

/// Defaults for the experiment named in the document, then the overlay.
inline ScenarioConfig scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    if (auto s = j.find("schema"); s != j.end() && !(s->is_string() && s->get<std::string>() == scenario_schema))
        throw ConfigError("schema", std::string("expected \"") + scenario_schema + "\"");
    Experiment e = Experiment::vertical;
    if (auto it = j.find("experiment"); it != j.end()) {
        if (!it->is_string()) throw ConfigError("experiment", "expected a string");
        e = experiment_from_string(it->get<std::string>());
    }
    ScenarioConfig c = e == Experiment::vertical ? vertical_scenario() : forward_scenario();
    io::Reader r(j, "");
    r.skip("schema");
    r.skip("experiment");
    io::visit(r, c);
    r.finish();
    c.validate();
    return c;
}

inline std::string dump_scenario(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", what + " is not valid JSON: " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ScenarioConfig load_scenario(const std::string& path) {
    return scenario_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace slackhop
