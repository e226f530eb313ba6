#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "pseudoboost/distributions.hpp"
#include "pseudoboost/quadrature.hpp"
#include "pseudoboost/special.hpp"

using namespace pseudoboost;

TEST_SUITE("distributions") {

TEST_CASE("certified constants for Gaussian noise match closed forms") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    // Density ceiling 1/sqrt(2 pi), 2-D floor at radius 1 gives 2 pi e^{1/2}.
    CHECK(p.U == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(p.U_prime == doctest::Approx(10.359221263697503).epsilon(1e-9));
    // Tail scale: the sweep max of t / -ln(2 Phi(-t)) lands at t = 0.5.
    CHECK(p.K == doctest::Approx(1.0357014985014497).epsilon(1e-9));
    CHECK(p.R == 1.0);
    // The projection law does not depend on the ambient dimension.
    const DistParams q = certify_params(NoiseSpec::gaussian(), 200);
    CHECK(q.K == doctest::Approx(p.K).epsilon(1e-12));
    CHECK(q.U == doctest::Approx(p.U).epsilon(1e-12));
}

TEST_CASE("certification succeeds for every family and yields usable constants") {
    for (const NoiseSpec& f :
         {NoiseSpec::gaussian(), NoiseSpec::uniform_ball(), NoiseSpec::radial_gamma()}) {
        const DistParams p = certify_params(f, 12);
        CHECK(p.K > 0.0);
        CHECK(p.K < 100.0);
        CHECK(p.U > 0.0);
        CHECK(p.U_prime > 0.0);
        CHECK(std::isfinite(p.U_prime));
    }
    CHECK_THROWS_AS(certify_params(NoiseSpec::gaussian(), 10, -1.0), PreconditionError);
}

TEST_CASE("one-dimensional marginals are normalized densities with unit variance") {
    for (const NoiseSpec& f :
         {NoiseSpec::gaussian(), NoiseSpec::uniform_ball(), NoiseSpec::radial_gamma()}) {
        const int d = 6;
        const double mass =
            integrate([&](double t) { return marginal_density_1d(f, d, t); }, -kInf, kInf, 1e-10);
        const double second = integrate(
            [&](double t) { return t * t * marginal_density_1d(f, d, t); }, -kInf, kInf, 1e-10);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(second == doctest::Approx(1.0).epsilon(1e-7));
        // Symmetric and maximal at zero (unimodality at the grid level).
        CHECK(marginal_density_1d(f, d, 0.7) ==
              doctest::Approx(marginal_density_1d(f, d, -0.7)).epsilon(1e-12));
        CHECK(marginal_density_1d(f, d, 0.0) >= marginal_density_1d(f, d, 0.9));
    }
}

TEST_CASE("tail function agrees with quadrature of the density") {
    for (const NoiseSpec& f :
         {NoiseSpec::gaussian(), NoiseSpec::uniform_ball(), NoiseSpec::radial_gamma()}) {
        const int d = 6;
        for (double t : {0.0, 0.5, 1.5}) {
            const double tail = marginal_tail_1d(f, d, t);
            const double quad = integrate([&](double u) { return marginal_density_1d(f, d, u); },
                                          t, kInf, 1e-10);
            CHECK(tail == doctest::Approx(quad).epsilon(1e-7));
        }
        CHECK_THROWS_AS(marginal_tail_1d(f, d, -0.1), PreconditionError);
    }
}

TEST_CASE("ball samples respect the radius bound and gamma radii match their moments") {
    RngStream rng(5, 0);
    const int d = 5;
    const MixtureModel ball = MixtureModel::axis_aligned(d, 0.0, NoiseSpec::uniform_ball());
    const double radius = std::sqrt(static_cast<double>(d) + 2.0);
    double max_norm = 0.0;
    for (const LabeledSample& s : sample(ball, 100000, rng))
        max_norm = std::max(max_norm, norm(s.x));
    CHECK(max_norm <= radius + 1e-12);
    CHECK(max_norm >= 0.99 * radius);  // the edge of the support is actually reached

    const MixtureModel gam = MixtureModel::axis_aligned(d, 0.0, NoiseSpec::radial_gamma());
    const double scale = 1.0 / std::sqrt(static_cast<double>(d) + 1.0);
    double s1 = 0.0, s2 = 0.0;
    const int n = 200000;
    for (const LabeledSample& s : sample(gam, n, rng)) {
        const double r = norm(s.x);
        s1 += r;
        s2 += r * r;
    }
    // radius ~ Gamma(shape d, scale), so E r = d * scale and E r^2 = d (isotropy).
    CHECK(s1 / n == doctest::Approx(d * scale).epsilon(0.01));
    CHECK(s2 / n == doctest::Approx(static_cast<double>(d)).epsilon(0.02));
}

TEST_CASE("labeled sampling is deterministic and balanced with mean mu per class") {
    const MixtureModel model = MixtureModel::axis_aligned(4, 2.0, NoiseSpec::gaussian());
    RngStream a(7, 3), b(7, 3);
    const auto s1 = sample(model, 5, a);
    const auto s2 = sample(model, 5, b);
    REQUIRE(s1.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(s1[static_cast<std::size_t>(i)].y == s2[static_cast<std::size_t>(i)].y);
        CHECK(s1[static_cast<std::size_t>(i)].x == s2[static_cast<std::size_t>(i)].x);
    }

    RngStream rng(21, 0);
    const int n = 50000;
    double ysum = 0.0;
    Vector yx(4, 0.0);
    for (const LabeledSample& s : sample(model, n, rng)) {
        CHECK((s.y == 1 || s.y == -1));
        ysum += s.y;
        for (int k = 0; k < 4; ++k) yx[static_cast<std::size_t>(k)] += s.y * s.x[static_cast<std::size_t>(k)];
    }
    CHECK(std::abs(ysum) / n <= 0.02);
    CHECK(yx[0] / n == doctest::Approx(2.0).epsilon(0.02));
    for (int k = 1; k < 4; ++k) CHECK(std::abs(yx[static_cast<std::size_t>(k)] / n) <= 0.03);
}

TEST_CASE("model construction guards its inputs") {
    CHECK_THROWS_AS(MixtureModel(3, Vector{1.0, 0.0}, NoiseSpec::gaussian()), DimensionError);
    CHECK_THROWS_AS(MixtureModel::axis_aligned(1, 1.0, NoiseSpec::gaussian()),
                    PreconditionError);
    CHECK_THROWS_AS(MixtureModel::axis_aligned(3, -1.0, NoiseSpec::gaussian()),
                    DegenerateInputError);
    const MixtureModel m = MixtureModel::axis_aligned(3, 0.0, NoiseSpec::gaussian());
    CHECK(m.mu_norm() == 0.0);  // mu = 0 is allowed for sampling pure noise
}

TEST_CASE("family names parse and round-trip") {
    CHECK(NoiseSpec::parse("gaussian").family == NoiseFamily::StandardGaussian);
    CHECK(NoiseSpec::parse("uniform_ball").family == NoiseFamily::UniformBall);
    CHECK(NoiseSpec::parse("radial_gamma").family == NoiseFamily::RadialGamma);
    CHECK_THROWS_AS(NoiseSpec::parse("cauchy"), ConfigError);
    for (const NoiseSpec& f :
         {NoiseSpec::gaussian(), NoiseSpec::uniform_ball(), NoiseSpec::radial_gamma()})
        CHECK(NoiseSpec::parse(f.name()).family == f.family);
}

TEST_CASE("two-dimensional marginal density integrates to one over the plane") {
    for (const NoiseSpec& f :
         {NoiseSpec::gaussian(), NoiseSpec::uniform_ball(), NoiseSpec::radial_gamma()}) {
        const int d = 6;
        // Radial form: mass = int_0^inf 2 pi tau p2(tau) dtau.
        const double mass = integrate(
            [&](double tau) { return 2.0 * kPi * tau * marginal_density_2d(f, d, tau); }, 0.0,
            kInf, 1e-9);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

}  // TEST_SUITE
