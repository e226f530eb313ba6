#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace pseudoboost {

using Vector = std::vector<double>;

// Tolerance on ||v|| - 1 for operations that require unit input.
inline constexpr double kUnitTol = 1e-9;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: vectors have different lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector normalize(std::span<const double> a) {
    const double n = norm(a);
    if (!(n > 0.0) || !std::isfinite(n))
        throw DegenerateInputError("normalize: input has zero or non-finite norm");
    Vector out(a.begin(), a.end());
    for (double& x : out) x /= n;
    return out;
}

inline void require_unit(std::span<const double> a, const char* who) {
    if (std::abs(norm(a) - 1.0) > kUnitTol)
        throw PreconditionError(std::string(who) + ": input must be a unit vector");
}

// Angle in [0, pi]; the cosine is clamped so nearly-parallel inputs never yield NaN.
inline double angle_between(std::span<const double> a, std::span<const double> b) {
    require_unit(a, "angle_between");
    require_unit(b, "angle_between");
    double c = dot(a, b);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return std::acos(c);
}

// Squared distance ||a - b||^2 between unit vectors; equals 4 sin^2(theta/2).
inline double delta_sq(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("delta_sq: vectors have different lengths");
    require_unit(a, "delta_sq");
    require_unit(b, "delta_sq");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// Uniform draw from the unit sphere in R^d (Gaussian draw, then normalize).
inline Vector sample_unit_sphere(int d, RngStream& rng) {
    if (d < 1) throw PreconditionError("sample_unit_sphere: dimension must be >= 1");
    Vector v(static_cast<std::size_t>(d));
    for (;;) {
        double nsq = 0.0;
        for (double& x : v) {
            x = rng.next_normal();
            nsq += x * x;
        }
        if (nsq > 1e-300) {
            const double inv = 1.0 / std::sqrt(nsq);
            for (double& x : v) x *= inv;
            return v;
        }
    }
}

// Uniform random unit vector orthogonal to the given unit vector.
inline Vector random_tangent(std::span<const double> unit_v, RngStream& rng) {
    require_unit(unit_v, "random_tangent");
    const int d = static_cast<int>(unit_v.size());
    if (d < 2) throw PreconditionError("random_tangent: dimension must be >= 2");
    for (;;) {
        Vector t = sample_unit_sphere(d, rng);
        const double proj = dot(t, unit_v);
        for (int i = 0; i < d; ++i) t[static_cast<std::size_t>(i)] -= proj * unit_v[static_cast<std::size_t>(i)];
        const double n = norm(t);
        if (n > 1e-8) {
            for (double& x : t) x /= n;
            return t;
        }
    }
}

// Unit vector at the prescribed angle (radians) from unit_v, tilted along a
// random tangent direction.
inline Vector unit_at_angle(std::span<const double> unit_v, double theta, RngStream& rng) {
    if (!(theta >= 0.0) || !(theta <= 3.14159265358979323846))
        throw PreconditionError("unit_at_angle: angle must lie in [0, pi]");
    const Vector t = random_tangent(unit_v, rng);
    const double c = std::cos(theta), s = std::sin(theta);
    Vector out(unit_v.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * unit_v[i] + s * t[i];
    return normalize(out);
}

}  // namespace pseudoboost
