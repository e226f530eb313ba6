#include <doctest.h>

#include <cmath>
#include <vector>

#include "pseudoboost/supervised.hpp"

using namespace pseudoboost;

TEST_SUITE("supervised") {

TEST_CASE("the first SGD iterate is eta y x / 2, reconstructed from the stream") {
    const MixtureModel model = MixtureModel::axis_aligned(5, 2.0, NoiseSpec::gaussian());
    SupervisedConfig cfg;
    cfg.eta = 0.05;
    cfg.iterations = 1;
    cfg.runs = 1;
    cfg.validation_size = 50;
    cfg.seed = 77;
    cfg.stream = 5;
    const PseudolabelerResult res = run_supervised(model, cfg);

    RngStream rng(77, 5);  // the single run reads stream + 0
    const LabeledSample first = sample(model, 1, rng)[0];
    REQUIRE(res.beta_pl.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(res.beta_pl[static_cast<std::size_t>(i)] ==
              doctest::Approx(0.05 * first.y * first.x[static_cast<std::size_t>(i)] / 2.0)
                  .epsilon(1e-15));
    CHECK(res.selected_run == 1);
    CHECK(res.selected_iter == 1);
    CHECK(res.all_iterates_kept);
    CHECK(res.labeled_count == 51);

    RngStream val_rng(77, 6);  // validation reads stream + runs
    const auto validation = sample(model, 50, val_rng);
    CHECK(res.validation_err == doctest::Approx(zero_one_error(res.beta_pl, validation)));
}

TEST_CASE("SGD run records every iterate and is deterministic") {
    const MixtureModel model = MixtureModel::axis_aligned(6, 1.5, NoiseSpec::gaussian());
    RngStream a(9, 0), b(9, 0);
    const auto run1 = logistic_sgd_run(model, 0.01, 40, a);
    const auto run2 = logistic_sgd_run(model, 0.01, 40, b);
    REQUIRE(run1.size() == 40);
    CHECK(run1 == run2);
    CHECK_THROWS_AS(logistic_sgd_run(model, -0.1, 5, a), PreconditionError);
    CHECK_THROWS_AS(logistic_sgd_run(model, 0.1, 0, a), PreconditionError);
}

TEST_CASE("zero-one error counts boundary predictions as mistakes") {
    std::vector<LabeledSample> data(3);
    data[0] = {{1.0, 0.0}, 1};    // correct
    data[1] = {{-1.0, 0.0}, 1};   // wrong side
    data[2] = {{0.0, 1.0}, -1};   // on the boundary: counts as a mistake
    const Vector beta{1.0, 0.0};
    CHECK(zero_one_error(beta, data) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(zero_one_error(beta, {}), PreconditionError);
}

TEST_CASE("selection scans run-major, breaks ties toward the earlier iterate") {
    // Two runs of two iterates; candidates tie at zero validation error except
    // one strictly worse outlier.
    std::vector<LabeledSample> validation(4);
    validation[0] = {{1.0, 0.0}, 1};
    validation[1] = {{2.0, 0.0}, 1};
    validation[2] = {{-1.0, 0.0}, -1};
    validation[3] = {{-3.0, 0.0}, -1};
    const Vector good1{1.0, 0.0};
    const Vector good2{2.0, 0.0};
    const Vector bad{-1.0, 0.0};
    const std::vector<std::vector<Vector>> runs{{bad, good1}, {good2, bad}};
    const PseudolabelerResult res = select_pseudolabeler(runs, validation);
    // good1 (run 1, iterate 2) and good2 (run 2, iterate 1) tie; the earlier
    // (run, iterate) in run-major order wins.
    CHECK(res.selected_run == 1);
    CHECK(res.selected_iter == 2);
    CHECK(res.validation_err == doctest::Approx(0.0));
    CHECK(res.beta_pl == good1);
}

TEST_CASE("zero iterates are skipped and all-zero candidates are an error") {
    std::vector<LabeledSample> validation(2);
    validation[0] = {{1.0, 0.0}, 1};
    validation[1] = {{-1.0, 0.0}, -1};
    const Vector zero{0.0, 0.0};
    const Vector good{1.0, 0.0};
    const PseudolabelerResult res = select_pseudolabeler({{zero, good}}, validation);
    CHECK(res.selected_run == 1);
    CHECK(res.selected_iter == 2);  // the zero iterate was not a candidate
    CHECK_THROWS_AS(select_pseudolabeler({{zero, zero}}, validation),
                    DegeneratePseudolabelerError);
    CHECK_THROWS_AS(select_pseudolabeler({}, validation), PreconditionError);
    CHECK_THROWS_AS(select_pseudolabeler({{good}}, {}), PreconditionError);
}

TEST_CASE("validation picks the target direction over its antipode") {
    const MixtureModel model = MixtureModel::axis_aligned(4, 2.0, NoiseSpec::gaussian());
    RngStream rng(15, 0);
    const auto validation = sample(model, 400, rng);
    Vector anti = model.mu_bar();
    for (double& v : anti) v = -v;
    const PseudolabelerResult res =
        select_pseudolabeler({{model.mu_bar(), anti}}, validation);
    CHECK(res.selected_iter == 1);
    CHECK(res.validation_err < 0.2);
}

TEST_CASE("labeled-stage schedule reproduces the worked example") {
    const MixtureModel model = MixtureModel::axis_aligned(16, 2.0, NoiseSpec::gaussian());
    const SupervisedConfig cfg = theorem2_schedule(model, 0.1, std::exp(-1.0), 200);
    CHECK(cfg.eta == doctest::Approx(6.25e-4).epsilon(1e-12));
    CHECK(cfg.iterations == 512000);
    CHECK(cfg.runs == 4);
    CHECK(cfg.validation_size == 200);
    CHECK_THROWS_AS(theorem2_schedule(model, 0.0, 0.5, 200), PreconditionError);
    CHECK_THROWS_AS(theorem2_schedule(model, 0.1, 1.5, 200), PreconditionError);
    const MixtureModel degenerate = MixtureModel::axis_aligned(16, 0.0, NoiseSpec::gaussian());
    CHECK_THROWS_AS(theorem2_schedule(degenerate, 0.1, 0.5, 200), DegenerateInputError);
}

TEST_CASE("longer runs improve the selected pseudolabeler on average") {
    const MixtureModel model = MixtureModel::axis_aligned(6, 2.5, NoiseSpec::gaussian());
    double short_sum = 0.0, long_sum = 0.0;
    const int reps = 30;
    for (int s = 0; s < reps; ++s) {
        SupervisedConfig cfg;
        cfg.eta = 0.05;
        cfg.runs = 2;
        cfg.validation_size = 100;
        cfg.seed = 1000 + static_cast<std::uint64_t>(s);
        cfg.iterations = 1;
        short_sum += run_supervised(model, cfg).validation_err;
        cfg.iterations = 64;
        long_sum += run_supervised(model, cfg).validation_err;
    }
    CHECK(long_sum / reps < short_sum / reps);
}

TEST_CASE("stage preconditions are enforced") {
    const MixtureModel model = MixtureModel::axis_aligned(4, 1.0, NoiseSpec::gaussian());
    SupervisedConfig cfg;
    cfg.runs = 0;
    CHECK_THROWS_AS(run_supervised(model, cfg), PreconditionError);
    cfg.runs = 901;
    CHECK_THROWS_AS(run_supervised(model, cfg), PreconditionError);
    cfg.runs = 1;
    cfg.validation_size = 0;
    CHECK_THROWS_AS(run_supervised(model, cfg), PreconditionError);
    cfg.validation_size = 10;
    cfg.iterations = 0;
    CHECK_THROWS_AS(run_supervised(model, cfg), PreconditionError);
}

}  // TEST_SUITE
