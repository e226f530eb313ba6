#pragma once

#include <string>

namespace pseudoboost {

enum class LossKind { Exponential, Logistic };

// Margin losses used by the self-training objective: 1-Lipschitz, decreasing on
// [0, inf), with -dloss(z) >= exp(-z) / c_ell.  Arguments must be >= 0; the
// supervised stage handles signed margins with its own logistic gradient.
struct LossSpec {
    LossKind kind = LossKind::Logistic;

    static LossSpec exponential() { return {LossKind::Exponential}; }
    static LossSpec logistic() { return {LossKind::Logistic}; }
    static LossSpec parse(const std::string& name);

    // Constant c_ell in the derivative floor: 1 for exponential, 2 for logistic.
    double c_ell() const { return kind == LossKind::Exponential ? 1.0 : 2.0; }

    double loss(double z) const;
    double dloss(double z) const;

    const char* name() const { return kind == LossKind::Exponential ? "exponential" : "logistic"; }
};

}  // namespace pseudoboost
