#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace slackhop {

enum class TerrainKind { flat, step_down, sinusoid, ramp_step };

inline const char* to_string(TerrainKind k) {
    switch (k) {
        case TerrainKind::flat: return "flat";
        case TerrainKind::step_down: return "step_down";
        case TerrainKind::sinusoid: return "sinusoid";
        case TerrainKind::ramp_step: return "ramp_step";
    }
    return "flat";
}

inline TerrainKind terrain_kind_from_string(const std::string& s) {
    if (s == "flat") return TerrainKind::flat;
    if (s == "step_down") return TerrainKind::step_down;
    if (s == "sinusoid") return TerrainKind::sinusoid;
    if (s == "ramp_step") return TerrainKind::ramp_step;
    throw ConfigError("terrain.kind", "unknown terrain kind '" + s + "'");
}

struct TerrainProfile {
    TerrainKind kind = TerrainKind::flat;

    // step_down: the block is removed at the removal_step-th flight apex
    // (counted from 1), so that hop lands on the lowered ground.
    double block_height = 0.047;
    int removal_step = 20;

    // sinusoid: n_blocks blocks of one wavelength each, then a flat connector
    // filling the rest of the track.
    double amplitude = 0.010;
    double wavelength = 0.36;
    int n_blocks = 27;

    // ramp_step: linear rise over ramp_length, then a drop back to zero.
    double ramp_length = 3.0;
    double ramp_height = 0.093;

    double track_length = two_pi * 1.613;
    /// Arc position where the block region or ramp begins [m].
    double start = 0.0;

    double connector_length() const { return track_length - n_blocks * wavelength; }

    void validate() const {
        if (!(track_length > 0.0)) throw ConfigError("terrain.track_length", "must be > 0");
        switch (kind) {
            case TerrainKind::flat: break;
            case TerrainKind::step_down:
                if (!(block_height >= 0.0)) throw ConfigError("terrain.block_height", "must be >= 0");
                if (removal_step < 1) throw ConfigError("terrain.removal_step", "must be >= 1");
                break;
            case TerrainKind::sinusoid:
                if (!(amplitude >= 0.0)) throw ConfigError("terrain.amplitude", "must be >= 0");
                if (!(wavelength > 0.0)) throw ConfigError("terrain.wavelength", "must be > 0");
                if (n_blocks < 0) throw ConfigError("terrain.n_blocks", "must be >= 0");
                if (connector_length() < 0.0)
                    throw ConfigError("terrain.n_blocks", "blocks do not fit on the track");
                break;
            case TerrainKind::ramp_step:
                if (!(ramp_length > 0.0 && ramp_length < track_length))
                    throw ConfigError("terrain.ramp_length", "must lie in (0, track_length)");
                if (!(ramp_height >= 0.0)) throw ConfigError("terrain.ramp_height", "must be >= 0");
                break;
        }
    }

    bool operator==(const TerrainProfile&) const = default;
};

/// Position relative to the profile start, wrapped onto [0, track_length).
inline double track_position(const TerrainProfile& t, double x) {
    double s = std::fmod(x - t.start, t.track_length);
    if (s < 0.0) s += t.track_length;
    return s;
}

/// Ground height under arc position x. apex_count is the number of flight
/// apexes reached so far and only matters for step_down.
inline double height_at(const TerrainProfile& t, double x, int apex_count = 0) {
    switch (t.kind) {
        case TerrainKind::flat: return 0.0;
        case TerrainKind::step_down: return apex_count < t.removal_step ? t.block_height : 0.0;
        case TerrainKind::sinusoid: {
            const double s = track_position(t, x);
            if (s >= t.n_blocks * t.wavelength) return 0.0;
            return t.amplitude * std::sin(two_pi * s / t.wavelength);
        }
        case TerrainKind::ramp_step: {
            const double s = track_position(t, x);
            return s < t.ramp_length ? t.ramp_height * s / t.ramp_length : 0.0;
        }
    }
    return 0.0;
}

/// Arc positions in [0, track_length) where the profile changes piecewise
/// definition. step_down changes in time, not position, and reports none.
inline std::vector<double> discontinuities(const TerrainProfile& t) {
    auto wrap = [&](double s) {
        double x = std::fmod(t.start + s, t.track_length);
        return x < 0.0 ? x + t.track_length : x;
    };
    switch (t.kind) {
        case TerrainKind::flat:
        case TerrainKind::step_down: return {};
        case TerrainKind::sinusoid:
            if (t.n_blocks == 0 || t.connector_length() <= 0.0) return {wrap(0.0)};
            return {wrap(0.0), wrap(t.n_blocks * t.wavelength)};
        case TerrainKind::ramp_step: return {wrap(t.ramp_length)};
    }
    return {};
}

}  // namespace slackhop
