#pragma once

#include <cstdint>
#include <vector>

#include "distributions.hpp"
#include "losses.hpp"
#include "vec.hpp"

namespace pseudoboost {

struct SupervisedConfig {
    double eta = 0.01;
    std::int64_t iterations = 2000;
    int runs = 4;
    int validation_size = 200;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  // run r draws from stream + r, validation from stream + runs
};

struct PseudolabelerResult {
    Vector beta_pl;
    int selected_run = -1;         // 1-based run index
    int selected_iter = -1;        // 1-based step that produced the iterate
    double validation_err = 1.0;
    bool all_iterates_kept = true; // selection scanned every nonzero iterate
    long labeled_count = 0;        // iterations * runs + validation_size
};

// Online SGD on the logistic loss from beta_0 = 0, one fresh labeled sample per
// step; returns the T iterates beta_1..beta_T.
std::vector<Vector> logistic_sgd_run(const MixtureModel& model, double eta, int iterations,
                                     RngStream& rng);

// 0-1 error of sgn(<beta, x>) on a labeled set; boundary predictions count as errors.
double zero_one_error(std::span<const double> beta, const std::vector<LabeledSample>& data);

// Pick the iterate with the smallest validation 0-1 error across all runs.
// Ties break toward the smaller (run, iterate); zero iterates are excluded.
PseudolabelerResult select_pseudolabeler(const std::vector<std::vector<Vector>>& runs,
                                         const std::vector<LabeledSample>& validation);

// Schedule from the labeled-stage guarantee:
//   eta = c_err / (8 (||mu||^2 + d)),  T = ceil(8 ||mu||^2 / (eta c_err)),
//   runs = 4 ceil(ln(1/delta)).
SupervisedConfig theorem2_schedule(const MixtureModel& model, double c_err, double delta,
                                   int validation_size = 200);

// Full stage: `runs` independent SGD runs plus a fresh validation set, then selection.
PseudolabelerResult run_supervised(const MixtureModel& model, const SupervisedConfig& cfg);

}  // namespace pseudoboost
