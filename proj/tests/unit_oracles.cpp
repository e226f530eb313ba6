#include <doctest.h>

#include <cmath>
#include <vector>

#include "pseudoboost/oracles.hpp"
#include "pseudoboost/special.hpp"

using namespace pseudoboost;

TEST_SUITE("oracles") {

TEST_CASE("closed-form error at an angle") {
    CHECK(exact_gaussian_err_at_angle(2.0, 0.0) ==
          doctest::Approx(0.022750131948179219).epsilon(1e-14));
    CHECK(exact_gaussian_err_at_angle(1.0, 0.0) ==
          doctest::Approx(0.15865525393145707).epsilon(1e-14));
    CHECK(exact_gaussian_err_at_angle(2.0, kPi / 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(exact_gaussian_err_at_angle(0.0, 0.3) == doctest::Approx(0.5).epsilon(1e-12));
    // Error is monotone in the angle on [0, pi/2].
    double prev = 0.0;
    for (double th = 0.0; th <= kPi / 2 + 1e-9; th += 0.1) {
        const double e = exact_gaussian_err_at_angle(1.5, th);
        CHECK(e >= prev - 1e-15);
        prev = e;
    }
}

TEST_CASE("exact oracle normalizes its direction and guards the family") {
    const MixtureModel m = MixtureModel::axis_aligned(6, 2.0, NoiseSpec::gaussian());
    const Vector mu_bar = m.mu_bar();
    Vector scaled = mu_bar;
    for (double& v : scaled) v *= 7.5;
    CHECK(exact_gaussian_err(scaled, m).value ==
          doctest::Approx(exact_gaussian_err(mu_bar, m).value).epsilon(1e-15));
    CHECK(exact_gaussian_err(mu_bar, m).value ==
          doctest::Approx(0.022750131948179219).epsilon(1e-14));
    CHECK(exact_gaussian_err(mu_bar, m).method == ErrMethod::ExactGaussian);
    CHECK(exact_gaussian_err(mu_bar, m).stderr_ == 0.0);

    const MixtureModel ball = MixtureModel::axis_aligned(6, 2.0, NoiseSpec::uniform_ball());
    CHECK_THROWS_AS(exact_gaussian_err(mu_bar, ball), UnsupportedOracleError);
    CHECK_THROWS_AS(exact_gaussian_err(Vector(6, 0.0), m), DegenerateInputError);
    CHECK_THROWS_AS(exact_gaussian_err(Vector{1.0, 0.0}, m), DimensionError);
}

TEST_CASE("Monte-Carlo error agrees with the exact oracle across random cases") {
    const int d = 8;
    RngStream rng(31, 0);
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const double mu_norm = 0.5 + 2.5 * rng.next_double();
        const double theta = 0.5 * kPi * rng.next_double();
        const MixtureModel m = MixtureModel::axis_aligned(d, mu_norm, NoiseSpec::gaussian());
        const Vector beta = unit_at_angle(m.mu_bar(), theta, rng);
        const ErrEstimate exact = exact_gaussian_err(beta, m);
        const ErrEstimate mc = mc_err(beta, m, 100000, rng);
        const double band = 5.0 * std::max(mc.stderr_, 1e-6);
        CHECK(std::abs(mc.value - exact.value) <= band);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("Monte-Carlo error enforces its contract") {
    const MixtureModel m = MixtureModel::axis_aligned(4, 1.0, NoiseSpec::gaussian());
    RngStream rng(3, 0);
    const Vector beta = m.mu_bar();
    CHECK_THROWS_AS(mc_err(beta, m, 99, rng), PreconditionError);
    CHECK_THROWS_AS(mc_err(Vector(4, 0.0), m, 1000, rng), DegenerateInputError);
    CHECK_THROWS_AS(mc_err(Vector{1.0}, m, 1000, rng), DimensionError);
    const ErrEstimate e = mc_err(beta, m, 4000, rng);
    CHECK(e.method == ErrMethod::MonteCarlo);
    CHECK(e.n == 4000);
    CHECK(e.stderr_ > 0.0);
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(e.value * (1.0 - e.value) / 4000.0))
                           .epsilon(1e-12));
    // Determinism per (seed, stream).
    RngStream r1(8, 2), r2(8, 2);
    CHECK(mc_err(beta, m, 500, r1).value == mc_err(beta, m, 500, r2).value);
}

TEST_CASE("error threshold constant from the certified parameters") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    CHECK(c_err_threshold(p, LossSpec::logistic()) ==
          doctest::Approx(6.7036355993092985e-4).epsilon(1e-9));
    CHECK(c_err_threshold(p, LossSpec::exponential()) ==
          doctest::Approx(1.3407271198618597e-3).epsilon(1e-9));
    DistParams unit;
    unit.K = 1.0;
    unit.U = 1.0;
    unit.U_prime = 1.0;
    unit.R = 1.0;
    CHECK(c_err_threshold(unit, LossSpec::exponential()) ==
          doctest::Approx(1.0 / 72.0).epsilon(1e-15));
}

TEST_CASE("surrogate loss quadrature matches the Gaussian closed form") {
    for (double mu : {0.5, 1.0, 2.0, 4.0}) {
        const MixtureModel m = MixtureModel::axis_aligned(5, mu, NoiseSpec::gaussian());
        CHECK(surrogate_loss_quadrature(m, LossSpec::exponential()) ==
              doctest::Approx(std::exp(-mu * mu / 2.0)).epsilon(1e-9));
        // The logistic loss sits below the exponential loss pointwise.
        CHECK(surrogate_loss_quadrature(m, LossSpec::logistic()) <=
              surrogate_loss_quadrature(m, LossSpec::exponential()) + 1e-12);
    }
    const MixtureModel ball = MixtureModel::axis_aligned(5, 1.0, NoiseSpec::uniform_ball());
    CHECK_THROWS_AS(surrogate_loss_quadrature(ball, LossSpec::logistic()),
                    UnsupportedOracleError);
}

TEST_CASE("surrogate bound check is vacuous below the separation threshold") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 4);
    const MixtureModel low = MixtureModel::axis_aligned(4, 1.0, NoiseSpec::gaussian());
    const VerificationReport weak = lemma_b2_check(low, p, LossSpec::logistic());
    CHECK(weak.vacuous);  // needs ||mu|| >= 64 K^2 ~ 68.7
    const MixtureModel high = MixtureModel::axis_aligned(4, 70.0, NoiseSpec::gaussian());
    const VerificationReport strong = lemma_b2_check(high, p, LossSpec::logistic());
    CHECK_FALSE(strong.vacuous);
    CHECK(strong.pass);
}

TEST_CASE("sub-exponential error bound holds for the Gaussian target direction") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 8);
    const MixtureModel m = MixtureModel::axis_aligned(8, 2.0, NoiseSpec::gaussian());
    RngStream rng(17, 0);
    const VerificationReport rep = subexp_err_bound_check(m, p, 100000, rng);
    CHECK(rep.pass);
    CHECK(rep.estimate == doctest::Approx(0.0228).epsilon(0.15));
    CHECK(rep.bound == doctest::Approx(p.K * std::exp(-2.0 / p.K)).epsilon(1e-12));
}

TEST_CASE("recursion reproduces the worked examples") {
    RecursionParams p;
    p.c_g = 1.0;
    p.c_d = 1.0;
    p.sigma = 1.0;
    p.eps = 0.1;
    p.delta0_sq = 4.0;
    std::vector<double> path;
    const RecursionResult r = recursion_simulate(p, &path);
    CHECK(r.t_star == 1846);  // ceil(320 ln 320)
    CHECK(r.delta_final_sq <= 0.1);
    CHECK(path.size() == static_cast<std::size_t>(r.t_star) + 1);
    CHECK(path.front() == 4.0);
    CHECK(path.back() == r.delta_final_sq);
    // eta = eps / 16 here, so the first step contracts by (1 - eta/2) etc.
    const double eta = 0.1 / 16.0;
    const double expect1 = (1.0 - eta / 2.0) * 4.0 + eta * 0.1 / 8.0 + 2.0 * eta * eta;
    CHECK(path[1] == doctest::Approx(expect1).epsilon(1e-12));

    RecursionParams q;
    q.c_g = 2.0;
    q.c_d = 4.0;
    q.sigma = 1.0;
    q.eps = 0.5;
    q.delta0_sq = 4.0;
    const RecursionResult r2 = recursion_simulate(q);
    CHECK(r2.t_star == 7098);  // ceil(1024 ln 1024)
    CHECK(r2.delta_final_sq <= 0.5);
}

TEST_CASE("recursion stays below max(previous, eps) and maps [0, eps] into itself") {
    RngStream rng(23, 0);
    for (int rep = 0; rep < 100; ++rep) {
        RecursionParams p;
        p.sigma = 1.0 + 3.0 * rng.next_double();
        p.c_g = 0.5 + 19.5 * rng.next_double();
        p.eps = 0.01 + 0.98 * rng.next_double();
        const double floor_cd = 1.0 / (p.c_g * p.c_g * p.sigma * p.sigma);
        p.c_d = std::max(floor_cd, 0.05) * (1.0 + 9.0 * rng.next_double());
        p.delta0_sq = rep % 4 == 0 ? 0.9 * p.eps : 4.0;
        std::vector<double> path;
        const RecursionResult r = recursion_simulate(p, &path);
        CHECK(r.delta_final_sq <= p.eps);
        for (std::size_t t = 0; t + 1 < path.size(); ++t)
            CHECK(path[t + 1] <= std::max(path[t], p.eps) + 1e-15);
        if (p.delta0_sq <= p.eps)
            for (double v : path) CHECK(v <= p.eps + 1e-15);
    }
}

TEST_CASE("recursion rejects parameters outside the guarantee") {
    RecursionParams p;
    p.c_g = 0.5;
    p.c_d = 1.0;
    p.sigma = 1.0;
    p.eps = 0.1;  // c_d c_g^2 sigma^2 = 0.25 < 1
    CHECK_THROWS_AS(recursion_simulate(p), PreconditionError);
    p.c_g = 2.0;
    p.delta0_sq = 5.0;
    CHECK_THROWS_AS(recursion_simulate(p), PreconditionError);
    p.delta0_sq = 0.0;
    CHECK_THROWS_AS(recursion_simulate(p), PreconditionError);
    p.delta0_sq = 1.0;
    p.eps = 1.0;
    CHECK_THROWS_AS(recursion_simulate(p), PreconditionError);
}

TEST_CASE("norm tail check passes for Gaussian noise at desk scale") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 20);
    const MixtureModel m = MixtureModel::axis_aligned(20, 2.0, NoiseSpec::gaussian());
    RngStream rng(41, 0);
    const VerificationReport rep = norm_bound_check(m, p, 50, 20, 0.01, rng);
    CHECK(rep.pass);
    CHECK(rep.estimate <= rep.bound + 3.0 * rep.stderr_ + 1e-15);
    CHECK(rep.params.count("threshold") == 1);
}

TEST_CASE("no direction beats the target direction") {
    const MixtureModel m = MixtureModel::axis_aligned(6, 2.0, NoiseSpec::gaussian());
    RngStream rng(53, 0);
    const VerificationReport rep = bayes_optimality_check(m, 20, 20000, rng);
    CHECK(rep.pass);
    CHECK_FALSE(rep.vacuous);
    CHECK(rep.estimate >= rep.bound - 3.0 * rep.stderr_ - 1e-12);
}

TEST_CASE("excess error is bounded by the anti-concentration gap term") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    std::vector<double> grid;
    for (int k = 0; k <= 18; ++k) grid.push_back(k * 5.0 * kPi / 180.0);
    for (double mu : {1.0, 2.0}) {
        const MixtureModel m = MixtureModel::axis_aligned(10, mu, NoiseSpec::gaussian());
        const VerificationReport rep = err_gap_bound_check(m, p, grid);
        CHECK(rep.pass);
    }
    const MixtureModel ball = MixtureModel::axis_aligned(10, 1.0, NoiseSpec::uniform_ball());
    CHECK_THROWS_AS(err_gap_bound_check(ball, p, grid), UnsupportedOracleError);
    const MixtureModel m = MixtureModel::axis_aligned(10, 1.0, NoiseSpec::gaussian());
    CHECK_THROWS_AS(err_gap_bound_check(m, p, {2.0}), PreconditionError);  // beyond pi/2
}

TEST_CASE("alignment estimate is positive with a valid floor at a benign angle") {
    const MixtureModel m = MixtureModel::axis_aligned(10, 2.0, NoiseSpec::gaussian());
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    RngStream rng(67, 0);
    const Vector beta = unit_at_angle(m.mu_bar(), 30.0 * kPi / 180.0, rng);
    const VerificationReport rep =
        lemma1_alignment_estimate(m, p, beta, 2.0, LossSpec::logistic(), 200000, rng);
    CHECK(rep.estimate > 0.0);
    CHECK(rep.bound > 0.0);
    CHECK(rep.pass);
    CHECK(rep.vacuous);  // err at 30 degrees is far above the strict threshold
    // The strict regime: tighter separation and small angle pass non-vacuously.
    const MixtureModel tight = MixtureModel::axis_aligned(10, 3.5, NoiseSpec::gaussian());
    const Vector beta2 = unit_at_angle(tight.mu_bar(), 10.0 * kPi / 180.0, rng);
    const VerificationReport rep2 =
        lemma1_alignment_estimate(tight, p, beta2, 3.5, LossSpec::logistic(), 200000, rng);
    CHECK_FALSE(rep2.vacuous);
    CHECK(rep2.pass);
}

TEST_CASE("lemma batch size formula and its saturation guard") {
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    const double kcu = p.K * 2.0 * p.U_prime / (p.R * p.R);
    const int b = lemma1_batch_size(p, LossSpec::logistic(), 0.1, 0.05, 0.05);
    CHECK(b == static_cast<int>(std::ceil(0.05 * kcu * kcu * std::log(2.0 / 0.05) / 0.1)));
    CHECK_THROWS_AS(lemma1_batch_size(p, LossSpec::logistic(), 1e-12, 0.05, 2.0),
                    PreconditionError);
    CHECK(lemma1_batch_size(p, LossSpec::logistic(), 0.5, 0.05, 1e-9) >= 1);
}

TEST_CASE("batch drift check carries its empirical pass rate") {
    const MixtureModel m = MixtureModel::axis_aligned(10, 2.0, NoiseSpec::gaussian());
    const DistParams p = certify_params(NoiseSpec::gaussian(), 10);
    RngStream rng(71, 0);
    const Vector beta = unit_at_angle(m.mu_bar(), 30.0 * kPi / 180.0, rng);
    const VerificationReport rep =
        lemma1_batch_check(m, p, beta, 2.0, LossSpec::logistic(), 200, 0.1, 0.05, 100, rng);
    CHECK(rep.pass);
    CHECK(rep.estimate >= 0.9);  // the estimate is the empirical pass rate
    CHECK(rep.params.count("drift_floor") == 1);
}

}  // TEST_SUITE
