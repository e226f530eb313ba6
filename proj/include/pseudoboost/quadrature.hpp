#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>
#include <utility>

namespace pseudoboost {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Gauss-Kronrod integration on (a, b); either endpoint may be infinite.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12) {
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, 15, rel_tol);
}

}  // namespace pseudoboost
