#include "pseudoboost/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "pseudoboost/errors.hpp"
#include "pseudoboost/quadrature.hpp"
#include "pseudoboost/selftrain.hpp"
#include "pseudoboost/special.hpp"

namespace pseudoboost {

namespace {

constexpr int kSampleChunk = 8192;

// Loss evaluation on the whole real line, needed by the surrogate integral.
// The public LossSpec contract is restricted to z >= 0.
double signed_loss(const LossSpec& loss, double z) {
    if (loss.kind == LossKind::Exponential) return std::exp(-z);
    if (z >= 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

double require_direction(const MixtureModel& model, const char* who) {
    const double mu_n = model.mu_norm();
    if (!(mu_n > 0.0)) throw DegenerateInputError(std::string(who) + ": model mean is zero");
    return mu_n;
}

ErrEstimate err_any(const MixtureModel& model, std::span<const double> beta, long n_mc,
                    RngStream& rng) {
    if (model.noise.family == NoiseFamily::StandardGaussian) return exact_gaussian_err(beta, model);
    return mc_err(beta, model, n_mc, rng);
}

}  // namespace

double exact_gaussian_err_at_angle(double mu_norm, double theta) {
    if (!(mu_norm >= 0.0)) throw PreconditionError("exact_gaussian_err_at_angle: mu_norm must be >= 0");
    return normal_cdf(-mu_norm * std::cos(theta));
}

ErrEstimate exact_gaussian_err(std::span<const double> beta, const MixtureModel& model) {
    if (model.noise.family != NoiseFamily::StandardGaussian)
        throw UnsupportedOracleError("exact_gaussian_err: only Gaussian noise has a closed form");
    const double mu_n = require_direction(model, "exact_gaussian_err");
    const Vector mu_bar = model.mu_bar();
    const Vector beta_hat = normalize(beta);
    const double theta = angle_between(beta_hat, mu_bar);
    return {exact_gaussian_err_at_angle(mu_n, theta), ErrMethod::ExactGaussian, 0.0, 0};
}

ErrEstimate mc_err(std::span<const double> beta, const MixtureModel& model, long n,
                   RngStream& rng) {
    if (n < 100) throw PreconditionError("mc_err: n must be >= 100");
    if (beta.size() != static_cast<std::size_t>(model.d))
        throw DimensionError("mc_err: beta length does not match the model dimension");
    if (!(norm(beta) > 0.0)) throw DegenerateInputError("mc_err: beta is zero");

    long wrong = 0;
    std::vector<LabeledSample> buf;
    for (long done = 0; done < n;) {
        const int chunk = static_cast<int>(std::min<long>(kSampleChunk, n - done));
        sample_into(model, chunk, rng, buf);
        for (const LabeledSample& s : buf) {
            const double m = dot(beta, std::span<const double>(s.x));
            const int pred = m > 0.0 ? 1 : (m < 0.0 ? -1 : 0);
            if (pred != s.y) ++wrong;
        }
        done += chunk;
    }
    const double p = static_cast<double>(wrong) / static_cast<double>(n);
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
    return {p, ErrMethod::MonteCarlo, se, n};
}

double c_err_threshold(const DistParams& params, const LossSpec& loss) {
    return params.R * params.R / (72.0 * loss.c_ell() * params.U_prime);
}

VerificationReport bayes_optimality_check(const MixtureModel& model, int n_directions,
                                          long n_mc, RngStream& rng) {
    if (n_directions < 1) throw PreconditionError("bayes_optimality_check: need n_directions >= 1");
    require_direction(model, "bayes_optimality_check");
    const Vector mu_bar = model.mu_bar();
    const ErrEstimate star = mc_err(mu_bar, model, n_mc, rng);

    static const double kPerturbDeg[] = {1, 2, 5, 10, 15, 20, 30, 45};
    VerificationReport rep;
    rep.name = "bayes_optimality";
    rep.pass = true;
    double min_err = kInf, se_at_min = 0.0;
    const int total = 1 + n_directions + static_cast<int>(std::size(kPerturbDeg));
    for (int j = 0; j < total; ++j) {
        Vector v;
        if (j == 0) {
            v = mu_bar;  // an independent re-estimate of the baseline itself
        } else if (j <= n_directions) {
            v = sample_unit_sphere(model.d, rng);
        } else {
            const double deg = kPerturbDeg[j - n_directions - 1];
            v = unit_at_angle(mu_bar, deg * kPi / 180.0, rng);
        }
        const ErrEstimate e = mc_err(v, model, n_mc, rng);
        const double combined = std::sqrt(e.stderr_ * e.stderr_ + star.stderr_ * star.stderr_);
        if (e.value < star.value - 3.0 * combined) rep.pass = false;
        if (e.value < min_err) {
            min_err = e.value;
            se_at_min = combined;
        }
    }
    rep.estimate = min_err;
    rep.bound = star.value;
    rep.stderr_ = se_at_min;
    rep.params = {{"n_directions", static_cast<double>(total)},
                  {"n_mc", static_cast<double>(n_mc)},
                  {"d", static_cast<double>(model.d)},
                  {"mu_norm", model.mu_norm()}};
    rep.note = "no candidate direction beats mu_bar by more than 3 combined stderr";
    return rep;
}

VerificationReport lemma1_alignment_estimate(const MixtureModel& model, const DistParams& params,
                                             std::span<const double> beta, double sigma,
                                             const LossSpec& loss, long n, RngStream& rng) {
    if (n < 2) throw PreconditionError("lemma1_alignment_estimate: need n >= 2");
    if (!(sigma > 0.0)) throw PreconditionError("lemma1_alignment_estimate: sigma must be > 0");
    require_unit(beta, "lemma1_alignment_estimate");
    const double mu_n = require_direction(model, "lemma1_alignment_estimate");
    const Vector mu_bar = model.mu_bar();
    const double theta = angle_between(beta, mu_bar);
    const double sin_sq = std::sin(theta) * std::sin(theta);
    const double bound = params.R * params.R * mu_n * mu_n * sin_sq /
                         (36.0 * sigma * loss.c_ell() * params.U_prime);

    const double mu_dot_beta = dot(std::span<const double>(model.mu), beta);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<LabeledSample> buf;
    for (long done = 0; done < n;) {
        const int chunk = static_cast<int>(std::min<long>(kSampleChunk, n - done));
        sample_into(model, chunk, rng, buf);
        for (const LabeledSample& s : buf) {
            const double m = dot(beta, std::span<const double>(s.x));
            double a = 0.0;
            if (m != 0.0) {
                const double sign = m > 0.0 ? 1.0 : -1.0;
                const double coef = loss.dloss(std::abs(m) / sigma) * sign / sigma;
                const double mu_dot_x = dot(std::span<const double>(model.mu),
                                            std::span<const double>(s.x));
                a = -coef * (mu_dot_x - mu_dot_beta * m);
            }
            sum += a;
            sum_sq += a * a;
        }
        done += chunk;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
    const double se = std::sqrt(var / static_cast<double>(n));

    const ErrEstimate err_beta = err_any(model, beta, 100000, rng);
    const double c_err = c_err_threshold(params, loss);

    VerificationReport rep;
    rep.name = "lemma1_alignment";
    rep.estimate = mean;
    rep.bound = bound;
    rep.stderr_ = se;
    rep.pass = mean >= bound - 3.0 * se;
    rep.vacuous = err_beta.value > c_err || theta > kPi / 2.0;
    rep.params = {{"theta", theta},          {"sigma", sigma},
                  {"n", static_cast<double>(n)}, {"mu_norm", mu_n},
                  {"err_beta", err_beta.value},  {"c_err_threshold", c_err},
                  {"d", static_cast<double>(model.d)}};
    rep.note = rep.vacuous ? "error precondition unmet at this angle (practical regime)"
                           : "error precondition satisfied (strict regime)";
    return rep;
}

int lemma1_batch_size(const DistParams& params, const LossSpec& loss, double eps, double delta,
                      double c_b) {
    if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0) || !(c_b > 0.0))
        throw PreconditionError("lemma1_batch_size: need eps > 0, delta in (0,1), c_b > 0");
    const double factor = params.K * loss.c_ell() * params.U_prime / (params.R * params.R);
    const double b = std::ceil(c_b * factor * factor * std::log(2.0 / delta) / eps);
    if (b > static_cast<double>(1 << 30))
        throw PreconditionError("lemma1_batch_size: batch size exceeds 2^30");
    return static_cast<int>(b);
}

VerificationReport lemma1_batch_check(const MixtureModel& model, const DistParams& params,
                                      std::span<const double> beta, double sigma,
                                      const LossSpec& loss, int batch_size, double eps,
                                      double delta, int trials, RngStream& rng) {
    if (batch_size < 1) throw PreconditionError("lemma1_batch_check: batch_size must be >= 1");
    if (trials < 2) throw PreconditionError("lemma1_batch_check: need trials >= 2");
    require_unit(beta, "lemma1_batch_check");
    const double mu_n = require_direction(model, "lemma1_batch_check");
    const Vector mu_bar = model.mu_bar();
    const double theta = angle_between(beta, mu_bar);
    const double sin_sq = std::sin(theta) * std::sin(theta);
    const double drift_floor = params.R * params.R * mu_n * mu_n * sin_sq /
                                   (72.0 * sigma * loss.c_ell() * params.U_prime) -
                               eps / 2.0;

    long hits = 0;
    std::vector<LabeledSample> buf;
    std::vector<Vector> batch(static_cast<std::size_t>(batch_size));
    for (int trial = 0; trial < trials; ++trial) {
        sample_into(model, batch_size, rng, buf);
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = std::move(buf[i].x);
        const Vector g = pseudo_gradient(beta, batch, sigma, loss);
        const double drift = -dot(std::span<const double>(model.mu), std::span<const double>(g));
        if (drift >= drift_floor) ++hits;
    }
    const double p = static_cast<double>(hits) / trials;
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / trials);

    const ErrEstimate err_beta = err_any(model, beta, 100000, rng);
    const double c_err = c_err_threshold(params, loss);

    VerificationReport rep;
    rep.name = "lemma1_batch";
    rep.estimate = p;
    rep.bound = 1.0 - delta;
    rep.stderr_ = se;
    rep.pass = p >= 1.0 - delta - 3.0 * se;
    rep.vacuous = err_beta.value > c_err || theta > kPi / 2.0;
    rep.params = {{"theta", theta},
                  {"sigma", sigma},
                  {"batch_size", static_cast<double>(batch_size)},
                  {"eps", eps},
                  {"delta", delta},
                  {"trials", static_cast<double>(trials)},
                  {"drift_floor", drift_floor},
                  {"err_beta", err_beta.value},
                  {"c_err_threshold", c_err}};
    rep.note = rep.vacuous ? "error precondition unmet at this angle (practical regime)"
                           : "error precondition satisfied (strict regime)";
    return rep;
}

VerificationReport calibrate_batch_constant(const MixtureModel& model, const DistParams& params,
                                            std::span<const double> beta, double sigma,
                                            const LossSpec& loss, double eps, double delta,
                                            int trials, RngStream& rng, double c_lo, double c_hi) {
    if (!(c_lo > 0.0 && c_hi > c_lo))
        throw PreconditionError("calibrate_batch_constant: need 0 < c_lo < c_hi");
    auto passes = [&](double c_b) {
        const int b = lemma1_batch_size(params, loss, eps, delta, c_b);
        return lemma1_batch_check(model, params, beta, sigma, loss, b, eps, delta, trials, rng)
            .pass;
    };

    double lo = c_lo, hi = c_hi;
    VerificationReport rep;
    rep.name = "lemma1_batch_calibration";
    if (!passes(c_hi)) {
        rep = lemma1_batch_check(model, params, beta, sigma, loss,
                                 lemma1_batch_size(params, loss, eps, delta, c_hi), eps, delta,
                                 trials, rng);
        rep.name = "lemma1_batch_calibration";
        rep.note = "calibration failed: even the upper constant misses the pass rate";
        rep.params["c_b"] = c_hi;
        return rep;
    }
    bool interior = true;
    if (passes(c_lo)) {
        hi = c_lo;
        interior = false;
    } else {
        for (int i = 0; i < 14; ++i) {
            const double mid = std::exp(0.5 * (std::log(lo) + std::log(hi)));
            if (passes(mid))
                hi = mid;
            else
                lo = mid;
        }
    }
    // The bisection boundary sits where the pass probability is near 1/2, so a
    // confirmation run exactly there would hinge on seed luck.  Confirm at a
    // 5x safety multiple, where the batch size makes failure vanishingly rare.
    const double c_star = std::min(5.0 * hi, c_hi);
    const int b = lemma1_batch_size(params, loss, eps, delta, c_star);
    rep = lemma1_batch_check(model, params, beta, sigma, loss, b, eps, delta, trials, rng);
    rep.name = "lemma1_batch_calibration";
    rep.params["c_b"] = c_star;
    rep.params["c_b_boundary"] = hi;
    rep.note = "calibrated batch constant c_b = " + std::to_string(c_star) +
               (interior ? " (bisection boundary " : " (boundary at or below range minimum ") +
               std::to_string(hi) + ", B = " + std::to_string(b) + ")";
    return rep;
}

VerificationReport subexp_err_bound_check(const MixtureModel& model, const DistParams& params,
                                          long n_mc, RngStream& rng) {
    const double mu_n = require_direction(model, "subexp_err_bound_check");
    const Vector mu_bar = model.mu_bar();
    const ErrEstimate e = mc_err(mu_bar, model, n_mc, rng);
    const double bound = params.K * std::exp(-mu_n / params.K);

    VerificationReport rep;
    rep.name = "subexp_err_bound";
    rep.estimate = e.value;
    rep.bound = bound;
    rep.stderr_ = e.stderr_;
    rep.pass = e.value <= bound + 3.0 * e.stderr_;
    rep.params = {{"mu_norm", mu_n},
                  {"K", params.K},
                  {"n_mc", static_cast<double>(n_mc)},
                  {"d", static_cast<double>(model.d)}};
    return rep;
}

double surrogate_loss_quadrature(const MixtureModel& model, const LossSpec& loss) {
    if (model.noise.family != NoiseFamily::StandardGaussian)
        throw UnsupportedOracleError("surrogate_loss_quadrature: Gaussian noise only");
    const double mu_n = model.mu_norm();
    return integrate(
        [&](double u) {
            const double z = mu_n * mu_n + mu_n * u;
            // Fuse the exponentials: exp(-z) alone overflows at the far-left
            // abscissae of the infinite-interval transform while the Gaussian
            // weight underflows, which would give inf * 0 = NaN.
            if (loss.kind == LossKind::Exponential)
                return kInvSqrt2Pi * std::exp(-z - 0.5 * u * u);
            return signed_loss(loss, z) * normal_pdf(u);
        },
        -kInf, kInf, 1e-11);
}

VerificationReport lemma_b2_check(const MixtureModel& model, const DistParams& params,
                                  const LossSpec& loss) {
    const double mu_n = require_direction(model, "lemma_b2_check");
    const double estimate = surrogate_loss_quadrature(model, loss);
    const double bound = std::exp(-mu_n / (3.0 * params.K));

    VerificationReport rep;
    rep.name = "surrogate_loss_bound";
    rep.estimate = estimate;
    rep.bound = bound;
    rep.stderr_ = 0.0;
    rep.pass = estimate <= bound + 1e-12;
    rep.vacuous = mu_n < 64.0 * params.K * params.K;
    rep.params = {{"mu_norm", mu_n}, {"K", params.K}, {"c_ell", loss.c_ell()}};
    rep.note = rep.vacuous ? "mean-separation precondition ||mu|| >= 64 K^2 unmet at desk scale"
                           : "mean-separation precondition satisfied";
    return rep;
}

VerificationReport norm_bound_check(const MixtureModel& model, const DistParams& params,
                                    int batch_size, int iterations, double delta, RngStream& rng) {
    if (batch_size < 1 || iterations < 1)
        throw PreconditionError("norm_bound_check: batch_size and iterations must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw PreconditionError("norm_bound_check: delta must be in (0,1)");
    const double mu_n = model.mu_norm();
    const double d = static_cast<double>(model.d);
    const double b = static_cast<double>(batch_size);
    const double t = static_cast<double>(iterations);
    const double lg = std::log(d * b * t / delta);
    const double threshold = 2.0 * mu_n * mu_n + 2.0 * d * params.K * params.K * lg * lg;

    const long n = static_cast<long>(batch_size) * iterations;
    long exceed = 0;
    std::vector<LabeledSample> buf;
    for (long done = 0; done < n;) {
        const int chunk = static_cast<int>(std::min<long>(kSampleChunk, n - done));
        sample_into(model, chunk, rng, buf);
        for (const LabeledSample& s : buf) {
            double nsq = 0.0;
            for (double v : s.x) nsq += v * v;
            if (nsq > threshold) ++exceed;
        }
        done += chunk;
    }
    const double p = static_cast<double>(exceed) / static_cast<double>(n);
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));

    VerificationReport rep;
    rep.name = "norm_bound";
    rep.estimate = p;
    rep.bound = delta;
    rep.stderr_ = se;
    rep.pass = p <= delta + 3.0 * se;
    rep.params = {{"batch_size", b}, {"iterations", t},       {"delta", delta},
                  {"threshold", threshold}, {"mu_norm", mu_n}, {"d", d}};
    return rep;
}

RecursionResult recursion_simulate(const RecursionParams& p, std::vector<double>* path) {
    if (!(p.c_g > 0.0 && p.c_d > 0.0 && p.sigma > 0.0))
        throw PreconditionError("recursion_simulate: constants must be > 0");
    if (!(p.eps > 0.0 && p.eps < 1.0))
        throw PreconditionError("recursion_simulate: eps must be in (0,1)");
    if (!(p.delta0_sq > 0.0 && p.delta0_sq <= 4.0))
        throw PreconditionError("recursion_simulate: delta0_sq must be in (0,4]");
    if (p.c_d * p.c_g * p.c_g * p.sigma * p.sigma < 1.0)
        throw PreconditionError("recursion_simulate: need c_d * c_g^2 * sigma^2 >= 1");

    const double eta = p.eps / (16.0 * p.c_d * p.c_g * p.sigma * p.sigma);
    const double x = 32.0 * p.c_d * p.c_g * p.c_g * p.sigma * p.sigma / p.eps;
    const long t_star = static_cast<long>(std::ceil(x * std::log(x)));
    const double contraction = 1.0 - eta / (2.0 * p.c_g);
    const double add = eta * p.eps / (8.0 * p.c_g) + 2.0 * p.c_d * eta * eta / (p.sigma * p.sigma);

    double cur = p.delta0_sq;
    if (path) {
        path->clear();
        path->push_back(cur);
    }
    for (long t = 0; t < t_star; ++t) {
        cur = contraction * cur + add;
        if (path) path->push_back(cur);
    }
    return {t_star, cur};
}

VerificationReport err_gap_bound_check(const MixtureModel& model, const DistParams& params,
                                       const std::vector<double>& theta_grid) {
    if (theta_grid.empty()) throw PreconditionError("err_gap_bound_check: empty theta grid");
    if (model.noise.family != NoiseFamily::StandardGaussian)
        throw UnsupportedOracleError("err_gap_bound_check: needs the exact Gaussian oracle");
    const double mu_n = require_direction(model, "err_gap_bound_check");
    const double star = exact_gaussian_err_at_angle(mu_n, 0.0);

    VerificationReport rep;
    rep.name = "err_gap_bound";
    rep.pass = true;
    double worst_margin = -kInf;
    for (double theta : theta_grid) {
        if (!(theta >= 0.0 && theta <= kPi / 2.0 + 1e-12))
            throw PreconditionError("err_gap_bound_check: thetas must lie in [0, pi/2]");
        const double bound = params.U * mu_n * std::sin(theta) * std::sin(theta);
        const double gap = exact_gaussian_err_at_angle(mu_n, theta) - star;
        if (gap > bound + 1e-12) rep.pass = false;
        if (gap - bound > worst_margin) {
            worst_margin = gap - bound;
            rep.estimate = gap;
            rep.bound = bound;
            rep.params["worst_theta"] = theta;
        }
    }
    rep.stderr_ = 0.0;
    rep.params["grid_size"] = static_cast<double>(theta_grid.size());
    rep.params["mu_norm"] = mu_n;
    rep.params["U"] = params.U;
    rep.note = "exact Gaussian error oracle on the angle grid";
    return rep;
}

}  // namespace pseudoboost
