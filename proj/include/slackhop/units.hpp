#pragma once

#include <numbers>

namespace slackhop {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

constexpr double mm(double v) { return v * 1e-3; }

}  // namespace slackhop
