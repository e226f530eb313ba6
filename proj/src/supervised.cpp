#include "pseudoboost/supervised.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pseudoboost/errors.hpp"

namespace pseudoboost {

std::vector<Vector> logistic_sgd_run(const MixtureModel& model, double eta, int iterations,
                                     RngStream& rng) {
    if (!(eta >= 0.0)) throw PreconditionError("logistic_sgd_run: eta must be >= 0");
    if (iterations < 1) throw PreconditionError("logistic_sgd_run: iterations must be >= 1");
    const std::size_t d = static_cast<std::size_t>(model.d);

    std::vector<Vector> iterates;
    iterates.reserve(static_cast<std::size_t>(iterations));
    Vector beta(d, 0.0);
    std::vector<LabeledSample> draw;
    double norm_budget = 0.0;
    for (int t = 0; t < iterations; ++t) {
        sample_into(model, 1, rng, draw);
        const LabeledSample& s = draw[0];
        const double margin = s.y * dot(beta, std::span<const double>(s.x));
        const double w = 1.0 / (1.0 + std::exp(margin));
        for (std::size_t i = 0; i < d; ++i) beta[i] += eta * w * s.y * s.x[i];
        norm_budget += eta * norm(s.x);
        if (norm(beta) > norm_budget + 1e-9)
            throw std::logic_error("logistic_sgd_run: iterate norm exceeded the step budget");
        iterates.push_back(beta);
    }
    return iterates;
}

double zero_one_error(std::span<const double> beta, const std::vector<LabeledSample>& data) {
    if (data.empty()) throw PreconditionError("zero_one_error: data must be non-empty");
    long wrong = 0;
    for (const LabeledSample& s : data) {
        const double m = dot(beta, std::span<const double>(s.x));
        const int pred = m > 0.0 ? 1 : (m < 0.0 ? -1 : 0);
        if (pred != s.y) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

PseudolabelerResult select_pseudolabeler(const std::vector<std::vector<Vector>>& runs,
                                         const std::vector<LabeledSample>& validation) {
    if (runs.empty()) throw PreconditionError("select_pseudolabeler: no runs given");
    if (validation.empty()) throw PreconditionError("select_pseudolabeler: validation set is empty");

    PseudolabelerResult best;
    bool found = false;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (std::size_t t = 0; t < runs[r].size(); ++t) {
            const Vector& cand = runs[r][t];
            const bool all_zero =
                std::all_of(cand.begin(), cand.end(), [](double v) { return v == 0.0; });
            if (all_zero) continue;
            const double err = zero_one_error(cand, validation);
            if (!found || err < best.validation_err) {
                found = true;
                best.validation_err = err;
                best.selected_run = static_cast<int>(r) + 1;
                best.selected_iter = static_cast<int>(t) + 1;
                best.beta_pl = cand;
            }
        }
    }
    if (!found)
        throw DegeneratePseudolabelerError(
            "select_pseudolabeler: every candidate iterate was the zero vector");
    return best;
}

SupervisedConfig theorem2_schedule(const MixtureModel& model, double c_err, double delta,
                                   int validation_size) {
    if (!(c_err > 0.0)) throw PreconditionError("theorem2_schedule: c_err must be > 0");
    if (!(delta > 0.0 && delta < 1.0))
        throw PreconditionError("theorem2_schedule: delta must be in (0,1)");
    const double mu_sq = model.mu_norm() * model.mu_norm();
    if (!(mu_sq > 0.0)) throw DegenerateInputError("theorem2_schedule: model mean is zero");

    SupervisedConfig cfg;
    cfg.eta = c_err / (8.0 * (mu_sq + static_cast<double>(model.d)));
    cfg.iterations =
        static_cast<std::int64_t>(std::min(std::ceil(8.0 * mu_sq / (cfg.eta * c_err)), 9.0e18));
    cfg.runs = static_cast<int>(4.0 * std::ceil(std::log(1.0 / delta)));
    cfg.validation_size = validation_size;
    return cfg;
}

PseudolabelerResult run_supervised(const MixtureModel& model, const SupervisedConfig& cfg) {
    if (cfg.runs < 1 || cfg.runs > 900) throw PreconditionError("run_supervised: runs must be in [1, 900]");
    if (cfg.validation_size < 1)
        throw PreconditionError("run_supervised: validation_size must be >= 1");
    if (cfg.iterations < 1 || cfg.iterations > (1 << 30))
        throw PreconditionError("run_supervised: iterations must be in [1, 2^30]");

    std::vector<std::vector<Vector>> runs;
    runs.reserve(static_cast<std::size_t>(cfg.runs));
    for (int r = 0; r < cfg.runs; ++r) {
        RngStream rng(cfg.seed, cfg.stream + static_cast<std::uint64_t>(r));
        runs.push_back(logistic_sgd_run(model, cfg.eta, static_cast<int>(cfg.iterations), rng));
    }
    RngStream val_rng(cfg.seed, cfg.stream + static_cast<std::uint64_t>(cfg.runs));
    const std::vector<LabeledSample> validation = sample(model, cfg.validation_size, val_rng);

    PseudolabelerResult result = select_pseudolabeler(runs, validation);
    result.labeled_count =
        static_cast<long>(cfg.iterations) * cfg.runs + cfg.validation_size;
    return result;
}

}  // namespace pseudoboost
