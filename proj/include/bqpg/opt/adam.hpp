#pragma once

#include <cmath>

#include <Eigen/Core>

#include "bqpg/errors.hpp"

namespace bqpg::opt {

/// Adaptive-moment step buffer. step(g) returns the increment for one ascent
/// step along g; callers subtract it instead to descend.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long t = 0;

    explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}

    Eigen::VectorXd step(const Eigen::VectorXd& grad) {
        if (!grad.allFinite()) throw InputError("AdamState::step: non-finite gradient");
        if (m.size() == 0) {
            m = Eigen::VectorXd::Zero(grad.size());
            v = Eigen::VectorXd::Zero(grad.size());
        }
        if (m.size() != grad.size()) throw DimensionError("AdamState::step: gradient size changed");
        ++t;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        Eigen::VectorXd mhat = m / bc1;
        Eigen::VectorXd denom = ((v / bc2).array().sqrt() + eps).matrix();
        return lr * mhat.cwiseQuotient(denom);
    }
};

}  // namespace bqpg::opt
