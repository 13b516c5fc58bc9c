#include "bqpg/envs/critic.hpp"

namespace bqpg::envs {

using Index = Eigen::Index;

CriticGrads critic_gradients(const CriticHead& critic, const kernels::DeepRBFKernel& features,
                             const Mat& states, const Vec& targets) {
    const Index n = states.rows();
    if (targets.size() != n) throw DimensionError("critic_gradients: target length mismatch");
    if (!targets.allFinite()) throw InputError("critic_gradients: non-finite targets");

    Mat f = features.features(states);
    Vec preds = critic.predict(f);
    Vec err = preds - targets;

    CriticGrads out;
    out.loss = err.squaredNorm() / static_cast<double>(n);
    Vec dpred = (2.0 / static_cast<double>(n)) * err;

    out.head_grad.resize(critic.weights.size() + 1);
    out.head_grad.head(critic.weights.size()) = f.transpose() * dpred;
    out.head_grad[critic.weights.size()] = dpred.sum();

    out.feature_net_grad = Vec::Zero(features.param_count());
    if (features.has_feature_net()) {
        // redo the forward to keep activations; features() above discards them
        Mat fbar = dpred * critic.weights.transpose();
        // map into the kernel's flat layout: [feature net | log scales | log signal]
        // by backprop through the feature extractor only
        out.feature_net_grad.head(features.feature_net_param_count()) =
            features.feature_backward(states, fbar);
    }
    return out;
}

double critic_update(CriticHead& critic, kernels::DeepRBFKernel& features, const Mat& states,
                     const Vec& targets, opt::AdamState& head_adam, opt::AdamState* feature_adam) {
    CriticGrads g = critic_gradients(critic, features, states, targets);
    Vec step = head_adam.step(g.head_grad);
    critic.weights -= step.head(critic.weights.size());
    critic.bias -= step[critic.weights.size()];
    if (feature_adam != nullptr && features.has_feature_net()) {
        Vec params = features.get_params();
        params -= feature_adam->step(g.feature_net_grad);
        features.set_params(params);
    }
    return g.loss;
}

}  // namespace bqpg::envs
