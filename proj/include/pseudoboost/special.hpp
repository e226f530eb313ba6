#pragma once

#include <cmath>

namespace pseudoboost {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal density.
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Standard normal CDF, accurate to ~1e-15 absolute over the double range.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Upper tail P(Z >= x); erfc keeps precision for large x where 1 - Phi underflows.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// log of the surface area of the unit sphere in R^m (m >= 1): 2 pi^{m/2} / Gamma(m/2).
inline double log_sphere_area(int m) {
    return std::log(2.0) + 0.5 * m * std::log(kPi) - std::lgamma(0.5 * m);
}

}  // namespace pseudoboost
