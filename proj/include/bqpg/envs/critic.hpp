#pragma once

#include "bqpg/kernels/deep_rbf.hpp"
#include "bqpg/opt/adam.hpp"
#include "bqpg/policy/sample_batch.hpp"

namespace bqpg::envs {

using kernels::Mat;
using kernels::Vec;

/// Linear value head on the shared feature extractor.
struct CriticHead {
    Vec weights;
    double bias = 0.0;

    explicit CriticHead(int feature_dim) : weights(Vec::Zero(feature_dim)) {}

    Vec predict(const Mat& features) const {
        if (features.cols() != weights.size()) throw DimensionError("CriticHead: feature width mismatch");
        return (features * weights).array() + bias;
    }
};

struct CriticGrads {
    Vec head_grad;          // d(loss)/d[weights; bias]
    Vec feature_net_grad;   // d(loss)/d(state-kernel params); zero rows for non-net params
    double loss = 0.0;
};

/// Mean-squared value error and its gradient through the shared features.
CriticGrads critic_gradients(const CriticHead& critic, const kernels::DeepRBFKernel& features,
                             const Mat& states, const Vec& targets);

/// One descent step on the head (and the shared feature extractor when a
/// feature-net Adam state is supplied). Returns the pre-step loss.
double critic_update(CriticHead& critic, kernels::DeepRBFKernel& features, const Mat& states,
                     const Vec& targets, opt::AdamState& head_adam,
                     opt::AdamState* feature_adam = nullptr);

}  // namespace bqpg::envs
