#include <doctest.h>

#include <cmath>

#include "pseudoboost/errors.hpp"
#include "pseudoboost/losses.hpp"

using namespace pseudoboost;

TEST_SUITE("losses") {

TEST_CASE("exponential loss values and derivative") {
    const LossSpec l = LossSpec::exponential();
    CHECK(l.c_ell() == 1.0);
    CHECK(l.loss(0.0) == doctest::Approx(1.0).epsilon(1e-16));
    CHECK(l.loss(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(l.dloss(0.0) == doctest::Approx(-1.0).epsilon(1e-16));
    CHECK(l.dloss(1.0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
    CHECK(l.dloss(3.0) == doctest::Approx(-std::exp(-3.0)).epsilon(1e-15));
}

TEST_CASE("logistic loss values and derivative") {
    const LossSpec l = LossSpec::logistic();
    CHECK(l.c_ell() == 2.0);
    CHECK(l.loss(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(l.dloss(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(l.dloss(1.0) == doctest::Approx(-0.2689414213699951).epsilon(1e-14));
    // Large arguments must not overflow: loss(40) = log1p(exp(-40)) ~ 4.2e-18.
    CHECK(l.loss(40.0) == doctest::Approx(std::exp(-40.0)).epsilon(1e-10));
    CHECK(l.loss(710.0) >= 0.0);
    CHECK(std::isfinite(l.dloss(710.0)));
}

TEST_CASE("negative margins are rejected") {
    CHECK_THROWS_AS(LossSpec::exponential().loss(-0.1), PreconditionError);
    CHECK_THROWS_AS(LossSpec::logistic().dloss(-1e-9), PreconditionError);
}

TEST_CASE("derivative floor -dloss(z) >= exp(-z) / c_ell on a grid") {
    for (const LossSpec& l : {LossSpec::exponential(), LossSpec::logistic()}) {
        for (double z = 0.0; z <= 40.0 + 1e-9; z += 0.01) {
            const double floor = std::exp(-z) / l.c_ell();
            CHECK(-l.dloss(z) >= floor * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("losses are nonincreasing, nonnegative and 1-Lipschitz") {
    for (const LossSpec& l : {LossSpec::exponential(), LossSpec::logistic()}) {
        double prev = l.loss(0.0);
        for (double z = 0.01; z <= 40.0 + 1e-9; z += 0.01) {
            const double v = l.loss(z);
            CHECK(v >= 0.0);
            CHECK(v <= prev + 1e-15);
            CHECK(std::abs(l.dloss(z)) <= 1.0 + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("derivative matches a central difference of the loss") {
    const double h = 1e-6;
    for (const LossSpec& l : {LossSpec::exponential(), LossSpec::logistic()}) {
        for (double z : {0.5, 1.0, 2.0, 5.0, 10.0, 25.0}) {
            const double fd = (l.loss(z + h) - l.loss(z - h)) / (2.0 * h);
            CHECK(l.dloss(z) == doctest::Approx(fd).epsilon(1e-8));
        }
    }
}

TEST_CASE("name parsing round-trips and rejects unknown names") {
    CHECK(LossSpec::parse("exponential").kind == LossKind::Exponential);
    CHECK(LossSpec::parse("logistic").kind == LossKind::Logistic);
    CHECK(std::string(LossSpec::exponential().name()) == "exponential");
    CHECK(std::string(LossSpec::logistic().name()) == "logistic");
    CHECK_THROWS_AS(LossSpec::parse("hinge"), ConfigError);
}

}  // TEST_SUITE
