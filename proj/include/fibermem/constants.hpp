#pragma once

#include <limits>
#include <numbers>

namespace fibermem {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2 ln 2)

}  // namespace fibermem
