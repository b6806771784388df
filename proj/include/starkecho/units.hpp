#pragma once

#include <numbers>

namespace starkecho {

// User-facing frequencies are linear (MHz, kHz); the propagator works in
// angular units of rad/us with hbar absorbed into H.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double angular_from_mhz(double mhz) { return kTwoPi * mhz; }
constexpr double mhz_from_khz(double khz) { return khz * 1e-3; }

}  // namespace starkecho
