#include "pseudoboost/losses.hpp"

#include <cmath>

#include "pseudoboost/errors.hpp"

namespace pseudoboost {

LossSpec LossSpec::parse(const std::string& name) {
    if (name == "exponential") return exponential();
    if (name == "logistic") return logistic();
    throw ConfigError("loss: expected \"exponential\" or \"logistic\", got \"" + name + "\"");
}

double LossSpec::loss(double z) const {
    if (!(z >= 0.0)) throw PreconditionError("loss: argument must be >= 0");
    if (kind == LossKind::Exponential) return std::exp(-z);
    return std::log1p(std::exp(-z));
}

double LossSpec::dloss(double z) const {
    if (!(z >= 0.0)) throw PreconditionError("dloss: argument must be >= 0");
    const double ez = std::exp(-z);
    if (kind == LossKind::Exponential) return -ez;
    return -ez / (1.0 + ez);
}

}  // namespace pseudoboost
