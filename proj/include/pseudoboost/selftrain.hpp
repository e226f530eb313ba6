#pragma once

#include <cstdint>
#include <vector>

#include "distributions.hpp"
#include "losses.hpp"
#include "oracles.hpp"
#include "vec.hpp"

namespace pseudoboost {

struct SelfTrainConfig {
    double eta = 0.0;
    double sigma = 0.0;
    std::int64_t batch_size = 0;
    std::int64_t iterations = 0;
    LossSpec loss = LossSpec::logistic();
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  // batch draws use this stream, diagnostics use stream + 1
    int err_mc_samples = 10000;

    // The convergence guarantee needs sigma >= max(R, ||mu||).
    bool sigma_compliant(const MixtureModel& model, const DistParams& params) const {
        return sigma >= std::max(params.R, model.mu_norm());
    }
};

struct IterateRecord {
    int t = 0;
    double theta = 0.0;     // angle between beta_t and mu_bar
    double delta_sq = 0.0;  // ||beta_t - mu_bar||^2
    double err = 0.0;
    ErrMethod err_method = ErrMethod::ExactGaussian;
    double grad_norm = 0.0;
    double alignment = 0.0;  // <mu_bar, -grad>
};

struct TrainTrace {
    std::vector<IterateRecord> records;  // one per iteration, describing beta_t
    Vector final_beta;                   // beta after the last update, unit norm
    double final_err = 0.0;              // err(final_beta), same method as records
    double err_mu_bar = 0.0;
    ErrMethod err_method = ErrMethod::ExactGaussian;
};

// Gradient of the weight-normalized empirical risk
//   (1/B) sum_i loss(|<beta, x_i>| / (sigma ||beta||))
// at a unit beta.  Orthogonal to beta by construction; samples on the decision
// boundary (sgn 0) contribute nothing.
Vector pseudo_gradient(std::span<const double> beta, const std::vector<Vector>& batch,
                       double sigma, const LossSpec& loss);

struct StepResult {
    Vector beta_next;    // unit norm
    Vector grad;
    double grad_norm = 0.0;
    double btilde_norm = 0.0;  // ||beta - eta * grad|| before renormalizing
};

// One descent step along the pseudolabel gradient followed by renormalization.
StepResult step(std::span<const double> beta, const std::vector<Vector>& batch,
                const SelfTrainConfig& cfg);

// Full loop: beta_0 = beta_pl / ||beta_pl||, then `iterations` steps, each on a
// fresh batch of batch_size unlabeled draws.  Per-iteration error uses the
// exact Gaussian oracle when the noise is Gaussian, Monte-Carlo otherwise.
TrainTrace run(const MixtureModel& model, std::span<const double> beta_pl,
               const SelfTrainConfig& cfg);

// Schedule from the convergence guarantee:
//   sigma = max(R, ||mu||)
//   B     = ceil(c_b * ln(2/delta) / eps)
//   C_g   = 72 sigma c_ell U' / (R^2 ||mu||)
//   C_d   = 2||mu||^2 + 2 d K^2 ln^2(d B T / delta)   (fixed point in T)
//   T     = ceil(x ln x) with x = 32 C_d C_g^2 sigma^2 / eps
//   eta   = eps / (16 C_d C_g sigma^2)
// Correct at any scale but astronomically large for certified constants; meant
// for schedule reporting, not desk-scale runs.
SelfTrainConfig theorem_schedule(const MixtureModel& model, const DistParams& params,
                                 LossSpec loss, double eps, double delta, double c_b = 2.0);

}  // namespace pseudoboost
