#include "pseudoboost/selftrain.hpp"

#include <cmath>
#include <stdexcept>

#include "pseudoboost/errors.hpp"

namespace pseudoboost {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ErrEstimate iterate_err(const MixtureModel& model, std::span<const double> beta, int n_mc,
                        RngStream& err_rng) {
    if (model.noise.family == NoiseFamily::StandardGaussian)
        return exact_gaussian_err(beta, model);
    return mc_err(beta, model, n_mc, err_rng);
}

}  // namespace

Vector pseudo_gradient(std::span<const double> beta, const std::vector<Vector>& batch,
                       double sigma, const LossSpec& loss) {
    if (batch.empty()) throw PreconditionError("pseudo_gradient: batch must be non-empty");
    if (!(sigma > 0.0)) throw PreconditionError("pseudo_gradient: sigma must be > 0");
    require_unit(beta, "pseudo_gradient");
    const std::size_t d = beta.size();
    const double bn = norm(beta);
    const double bn_sq = bn * bn;
    const int b = static_cast<int>(batch.size());

    Vector grad(d, 0.0);
    double max_norm_sq = 0.0;
    for (const Vector& x : batch) {
        if (x.size() != d) throw DimensionError("pseudo_gradient: sample length mismatch");
        const double m = dot(beta, std::span<const double>(x));
        const double sign = sgn(m);
        double x_norm_sq = 0.0;
        for (double v : x) x_norm_sq += v * v;
        max_norm_sq = std::max(max_norm_sq, x_norm_sq);
        if (sign == 0.0) continue;
        const double coef = loss.dloss(std::abs(m) / (sigma * bn)) * sign / (sigma * b * bn);
        const double proj = m / bn_sq;
        for (std::size_t i = 0; i < d; ++i) grad[i] += coef * (x[i] - beta[i] * proj);
    }

    const double gn = norm(grad);
    if (std::abs(dot(grad, beta)) > 1e-10 * (1.0 + gn))
        throw std::logic_error("pseudo_gradient: tangency drifted beyond tolerance");
    if (gn * gn > max_norm_sq / (sigma * sigma) * (1.0 + 1e-9) + 1e-12)
        throw std::logic_error("pseudo_gradient: norm exceeds the batch ceiling");
    return grad;
}

StepResult step(std::span<const double> beta, const std::vector<Vector>& batch,
                const SelfTrainConfig& cfg) {
    if (!(cfg.eta >= 0.0)) throw PreconditionError("step: eta must be >= 0");
    StepResult out;
    out.grad = pseudo_gradient(beta, batch, cfg.sigma, cfg.loss);
    out.grad_norm = norm(out.grad);
    Vector btilde(beta.begin(), beta.end());
    for (std::size_t i = 0; i < btilde.size(); ++i) btilde[i] -= cfg.eta * out.grad[i];
    out.btilde_norm = norm(btilde);
    out.beta_next = normalize(btilde);
    return out;
}

TrainTrace run(const MixtureModel& model, std::span<const double> beta_pl,
               const SelfTrainConfig& cfg) {
    if (beta_pl.size() != static_cast<std::size_t>(model.d))
        throw DimensionError("run: beta_pl length does not match the model dimension");
    if (cfg.batch_size < 1 || cfg.batch_size > (1 << 30))
        throw PreconditionError("run: batch_size must be in [1, 2^30]");
    if (cfg.iterations < 0 || cfg.iterations > (1 << 30))
        throw PreconditionError("run: iterations must be in [0, 2^30]");
    if (!(model.mu_norm() > 0.0))
        throw DegenerateInputError("run: model needs a non-zero mean direction");

    const Vector mu_bar = model.mu_bar();
    RngStream data_rng(cfg.seed, cfg.stream);
    RngStream err_rng(cfg.seed, cfg.stream + 1);

    TrainTrace trace;
    trace.err_method = model.noise.family == NoiseFamily::StandardGaussian
                           ? ErrMethod::ExactGaussian
                           : ErrMethod::MonteCarlo;
    trace.records.reserve(static_cast<std::size_t>(cfg.iterations));

    Vector beta = normalize(beta_pl);
    std::vector<LabeledSample> batch_samples;
    std::vector<Vector> batch(static_cast<std::size_t>(cfg.batch_size));

    for (int t = 0; t < static_cast<int>(cfg.iterations); ++t) {
        sample_into(model, static_cast<int>(cfg.batch_size), data_rng, batch_samples);
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = std::move(batch_samples[i].x);

        IterateRecord rec;
        rec.t = t;
        rec.theta = angle_between(beta, mu_bar);
        rec.delta_sq = delta_sq(beta, mu_bar);
        const ErrEstimate e = iterate_err(model, beta, cfg.err_mc_samples, err_rng);
        rec.err = e.value;
        rec.err_method = e.method;

        StepResult s = step(beta, batch, cfg);
        rec.grad_norm = s.grad_norm;
        rec.alignment = -dot(mu_bar, std::span<const double>(s.grad));
        trace.records.push_back(rec);
        beta = std::move(s.beta_next);
    }

    trace.final_err = iterate_err(model, beta, cfg.err_mc_samples, err_rng).value;
    trace.final_beta = std::move(beta);
    trace.err_mu_bar = iterate_err(model, mu_bar, cfg.err_mc_samples, err_rng).value;
    return trace;
}

SelfTrainConfig theorem_schedule(const MixtureModel& model, const DistParams& params,
                                 LossSpec loss, double eps, double delta, double c_b) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("theorem_schedule: eps must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw PreconditionError("theorem_schedule: delta must be in (0,1)");
    if (!(c_b > 0.0)) throw PreconditionError("theorem_schedule: c_b must be > 0");
    const double mu_n = model.mu_norm();
    if (!(mu_n > 0.0)) throw DegenerateInputError("theorem_schedule: model mean is zero");

    SelfTrainConfig cfg;
    cfg.loss = loss;
    cfg.sigma = std::max(params.R, mu_n);
    const double b_real = std::ceil(c_b * std::log(2.0 / delta) / eps);
    cfg.batch_size = static_cast<std::int64_t>(std::min(b_real, 9.0e18));

    const double c_g = 72.0 * cfg.sigma * loss.c_ell() * params.U_prime / (params.R * params.R * mu_n);
    const double d = static_cast<double>(model.d);
    double t_real = 1000.0;
    double c_d = 0.0;
    for (int i = 0; i < 12; ++i) {
        const double lg = std::log(d * b_real * t_real / delta);
        c_d = 2.0 * mu_n * mu_n + 2.0 * d * params.K * params.K * lg * lg;
        const double x = 32.0 * c_d * c_g * c_g * cfg.sigma * cfg.sigma / eps;
        t_real = std::ceil(x * std::log(x));
    }
    cfg.iterations = static_cast<std::int64_t>(std::min(t_real, 9.0e18));
    cfg.eta = eps / (16.0 * c_d * c_g * cfg.sigma * cfg.sigma);
    return cfg;
}

}  // namespace pseudoboost
