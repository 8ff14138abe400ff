#pragma once

// Zero-lag Butterworth low-pass, Winter residual analysis and a centred
// moving average.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "../errors.hpp"
#include "../units.hpp"

namespace slackhop {

struct FilterSpec {
    int order = 4;
    double cutoff = 12.0;         ///< [Hz]
    double sample_rate = 1000.0;  ///< [Hz]

    void validate() const {
        if (order < 1) throw DomainError("filter order must be >= 1");
        if (!(sample_rate > 0.0)) throw DomainError("filter sample rate must be > 0");
        if (!(cutoff > 0.0 && cutoff < 0.5 * sample_rate)) throw DomainError("filter cutoff must lie in (0, fs/2)");
    }
};

/// One direct-form-II-transposed section, normalised so a0 = 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Digital Butterworth low-pass as a cascade of sections (bilinear
/// transform with pre-warping). Odd orders get one first-order section.
inline std::vector<Biquad> butterworth_sections(const FilterSpec& spec) {
    spec.validate();
    const double K = std::tan(pi * spec.cutoff / spec.sample_rate);
    const int n = spec.order;
    std::vector<Biquad> out;
    for (int k = 0; k < n / 2; ++k) {
        const double theta = pi * (2.0 * k + 1.0) / (2.0 * n);
        const double q_inv = 2.0 * std::sin(theta);  // 1/Q of the analog pole pair
        const double norm = 1.0 / (1.0 + K * q_inv + K * K);
        Biquad s;
        s.b0 = K * K * norm;
        s.b1 = 2.0 * s.b0;
        s.b2 = s.b0;
        s.a1 = 2.0 * (K * K - 1.0) * norm;
        s.a2 = (1.0 - K * q_inv + K * K) * norm;
        out.push_back(s);
    }
    if (n % 2 == 1) {
        const double norm = 1.0 / (1.0 + K);
        Biquad s;
        s.b0 = K * norm;
        s.b1 = s.b0;
        s.a1 = (K - 1.0) * norm;
        out.push_back(s);
    }
    return out;
}

/// |H(e^{jw})| of the cascade at frequency f (single pass).
inline double magnitude_response(const std::vector<Biquad>& sos, double f, double fs) {
    const double w = two_pi * f / fs;
    double mag = 1.0;
    for (const auto& s : sos) {
        const double c1 = std::cos(w), s1 = std::sin(w), c2 = std::cos(2.0 * w), s2 = std::sin(2.0 * w);
        const double nr = s.b0 + s.b1 * c1 + s.b2 * c2, ni = -(s.b1 * s1 + s.b2 * s2);
        const double dr = 1.0 + s.a1 * c1 + s.a2 * c2, di = -(s.a1 * s1 + s.a2 * s2);
        mag *= std::sqrt((nr * nr + ni * ni) / (dr * dr + di * di));
    }
    return mag;
}

namespace detail {

/// Runs the cascade over x in place, starting each section from the
/// steady state it would have under a constant input equal to x[0].
inline void sos_filter(const std::vector<Biquad>& sos, std::vector<double>& x) {
    if (x.empty()) return;
    double level = x.front();
    for (const auto& s : sos) {
        const double g = s.dc_gain();
        double z1 = g * level - s.b0 * level;
        double z2 = s.b2 * level - s.a2 * g * level;
        for (double& v : x) {
            const double in = v;
            const double y = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * y + z2;
            z2 = s.b2 * in - s.a2 * y;
            v = y;
        }
        level *= g;
    }
}

}  // namespace detail

/// Forward-backward filtering with odd reflection padding at both ends.
inline std::vector<double> butterworth_zero_lag(const std::vector<double>& x, const FilterSpec& spec) {
    spec.validate();
    const std::size_t n = x.size();
    if (n <= static_cast<std::size_t>(6 * spec.order))
        throw DomainError("series too short for zero-lag filtering: need more than 6 x order samples");
    const auto sos = butterworth_sections(spec);
    // Pad long enough for the start-up transient (about fs / fc samples) to
    // die out inside the discarded region. Pads longer than the series keep
    // reflecting about the end points, which extends a straight line exactly.
    const auto settle = static_cast<std::ptrdiff_t>(std::ceil(3.0 * spec.sample_rate / spec.cutoff));
    const std::ptrdiff_t pad = std::max<std::ptrdiff_t>(3 * (spec.order + 1), settle);
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    auto at = [&](std::ptrdiff_t j) {
        double offset = 0.0, sign = 1.0;
        while (j < 0 || j > last) {
            if (j < 0) {
                offset += sign * 2.0 * x.front();
                j = -j;
            } else {
                offset += sign * 2.0 * x.back();
                j = 2 * last - j;
            }
            sign = -sign;
        }
        return offset + sign * x[static_cast<std::size_t>(j)];
    };

    std::vector<double> ext;
    ext.reserve(n + 2 * static_cast<std::size_t>(pad));
    for (std::ptrdiff_t j = -pad; j < last + 1 + pad; ++j) ext.push_back(at(j));

    detail::sos_filter(sos, ext);
    std::reverse(ext.begin(), ext.end());
    detail::sos_filter(sos, ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + pad, ext.begin() + pad + static_cast<std::ptrdiff_t>(n)};
}

inline double rms_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return a.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(a.size()));
}

struct ResidualCurve {
    std::vector<double> cutoff;    ///< [Hz]
    std::vector<double> residual;  ///< RMS of raw minus filtered
    double intercept = 0.0;        ///< noise line evaluated at 0 Hz
    double slope = 0.0;
};

/// Residual curve with a least-squares line through its upper tail
/// (the last tail_fraction of the candidates).
inline ResidualCurve residual_curve(const std::vector<double>& x, const std::vector<double>& candidates,
                                    double sample_rate, int order = 4, double tail_fraction = 0.5) {
    if (candidates.size() < 3) throw DomainError("residual analysis needs at least three candidate cutoffs");
    if (!std::is_sorted(candidates.begin(), candidates.end())) throw DomainError("candidate cutoffs must be ascending");
    ResidualCurve rc;
    rc.cutoff = candidates;
    for (double fc : candidates) rc.residual.push_back(rms_difference(x, butterworth_zero_lag(x, {order, fc, sample_rate})));

    const std::size_t m = candidates.size();
    const std::size_t first = std::min(m - 2, static_cast<std::size_t>(std::floor((1.0 - tail_fraction) * m)));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double cnt = static_cast<double>(m - first);
    for (std::size_t i = first; i < m; ++i) {
        sx += rc.cutoff[i];
        sy += rc.residual[i];
        sxx += rc.cutoff[i] * rc.cutoff[i];
        sxy += rc.cutoff[i] * rc.residual[i];
    }
    const double den = cnt * sxx - sx * sx;
    rc.slope = den != 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
    rc.intercept = (sy - rc.slope * sx) / cnt;
    return rc;
}

/// Winter's residual method: the lowest candidate whose residual has fallen
/// to the noise intercept. A noise-free series returns the highest candidate.
inline double residual_cutoff(const std::vector<double>& x, const std::vector<double>& candidates, double sample_rate,
                              int order = 4, double tail_fraction = 0.5) {
    const ResidualCurve rc = residual_curve(x, candidates, sample_rate, order, tail_fraction);
    // Residuals at round-off level relative to the signal spread mean there
    // is no noise floor to find.
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double spread = std::sqrt(var / static_cast<double>(x.size()));
    const double peak = *std::max_element(rc.residual.begin(), rc.residual.end());
    if (!(rc.intercept > 0.0) || peak <= 1e-4 * spread) return candidates.back();
    for (std::size_t i = 0; i < rc.cutoff.size(); ++i)
        if (rc.residual[i] <= rc.intercept) return rc.cutoff[i];
    return candidates.back();
}

/// Evenly spaced candidate cutoffs lo, lo + step, ..., <= hi.
inline std::vector<double> cutoff_grid(double lo, double hi, double step) {
    if (!(lo > 0.0 && hi >= lo && step > 0.0)) throw DomainError("cutoff grid needs 0 < lo <= hi and step > 0");
    std::vector<double> g;
    for (int i = 0;; ++i) {
        const double f = lo + i * step;
        if (f > hi + 1e-9 * step) break;
        g.push_back(f);
    }
    return g;
}

/// Centred moving average. Near the ends the window shrinks symmetrically
/// so it stays centred on the sample.
inline std::vector<double> moving_average(const std::vector<double>& x, int span = 5) {
    if (span < 1 || span % 2 == 0) throw DomainError("moving average span must be a positive odd number");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t half = span / 2;
    std::vector<double> y(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (std::ptrdiff_t j = i - h; j <= i + h; ++j) acc += x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = acc / static_cast<double>(2 * h + 1);
    }
    return y;
}

}  // namespace slackhop
