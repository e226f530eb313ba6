#pragma once

#include <array>
#include <string>
#include <vector>

#include "rng.hpp"
#include "vec.hpp"

namespace pseudoboost {

enum class NoiseFamily { StandardGaussian, UniformBall, RadialGamma };

// Rotationally symmetric, unimodal, isotropic (E z = 0, E zz^T = I) noise laws.
//   StandardGaussian  z ~ N(0, I)
//   UniformBall       z uniform on the ball of radius sqrt(d+2)
//   RadialGamma       radius ~ Gamma(shape d, scale 1/sqrt(d+1)), direction uniform,
//                     so the density of z is proportional to exp(-||z|| / scale)
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::StandardGaussian;

    static NoiseSpec gaussian() { return {NoiseFamily::StandardGaussian}; }
    static NoiseSpec uniform_ball() { return {NoiseFamily::UniformBall}; }
    static NoiseSpec radial_gamma() { return {NoiseFamily::RadialGamma}; }
    static NoiseSpec parse(const std::string& name);

    double ball_radius(int d) const { return std::sqrt(static_cast<double>(d) + 2.0); }
    double gamma_scale(int d) const { return 1.0 / std::sqrt(static_cast<double>(d) + 1.0); }

    const char* name() const;
};

// Certified distributional constants:
//   K        sub-exponential tail scale: P(|<v,z>| >= t) <= exp(-t/K) on the sweep grid
//   U        ceiling on the 1-D marginal density of z
//   U_prime  1 / (floor of the 2-D marginal density on the disk of radius R)
struct DistParams {
    double K = 0.0;
    double U = 0.0;
    double U_prime = 0.0;
    double R = 1.0;
};

struct LabeledSample {
    Vector x;
    int y = 1;  // +1 or -1
};

// Two-component mixture: x = z + y * mu with y a fair +1/-1 coin.
struct MixtureModel {
    int d = 0;
    Vector mu;
    NoiseSpec noise;

    MixtureModel() = default;
    MixtureModel(int dim, Vector mean, NoiseSpec spec);

    double mu_norm() const { return norm(mu); }
    Vector mu_bar() const { return normalize(mu); }

    // Convenience: mu = mu_norm * e1.
    static MixtureModel axis_aligned(int dim, double mu_norm, NoiseSpec spec);
};

// Draw n labeled samples; per sample the stream is consumed as (label, noise draws).
void sample_into(const MixtureModel& model, int n, RngStream& rng, std::vector<LabeledSample>& out);
std::vector<LabeledSample> sample(const MixtureModel& model, int n, RngStream& rng);

// Noise projected onto the first two coordinates (any fixed pair is equivalent
// by rotational symmetry).
std::vector<std::array<double, 2>> sample_noise_2d_marginal(NoiseSpec spec, int d, int n,
                                                            RngStream& rng);

// Exact 1-D / 2-D marginal densities and the 1-D upper tail of the noise law;
// closed forms where available, adaptive quadrature for RadialGamma.
double marginal_density_1d(NoiseSpec spec, int d, double t);
double marginal_density_2d(NoiseSpec spec, int d, double tau);
double marginal_tail_1d(NoiseSpec spec, int d, double t);

// Numerically certify (K, U, U_prime) for the family at dimension d.  K is the
// smallest grid-feasible tail scale over t in [0.5, 40]; failure to certify on
// that grid raises CertificationError.
DistParams certify_params(NoiseSpec spec, int d, double R = 1.0);

}  // namespace pseudoboost
