#include "bqpg/envs/gae.hpp"

#include <algorithm>
#include <cmath>

namespace bqpg::envs {

using Index = Eigen::Index;

Vec gae_advantages(policy::SampleBatch& batch, const Vec& values, const Vec& next_values,
                   const GAEConfig& config) {
    config.validate();
    batch.validate();
    const Index n = batch.size();
    if (values.size() != n || next_values.size() != n)
        throw DimensionError("gae_advantages: value vectors must match batch size");

    Vec adv(n);
    for (Index e = 0; e < batch.episode_count(); ++e) {
        auto [begin, end] = batch.episode_range(e);
        double carry = 0.0;
        for (Index t = end - 1; t >= begin; --t) {
            const double bootstrap = batch.terminal[static_cast<std::size_t>(t)] ? 0.0 : next_values[t];
            const double delta = batch.rewards[t] + config.gamma * bootstrap - values[t];
            carry = delta + config.gamma * config.tau *
                                (batch.terminal[static_cast<std::size_t>(t)] ? 0.0 : carry);
            adv[t] = carry;
        }
    }
    batch.q_values = adv;
    return adv;
}

Vec standardize(const Vec& v) {
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / std::max<Index>(v.size() - 1, 1);
    const double sd = std::sqrt(var);
    if (sd < 1e-12) return Vec::Zero(v.size());
    return (v.array() - mean) / sd;
}

Vec discounted_returns(const policy::SampleBatch& batch, const Vec& next_values, double gamma) {
    batch.validate();
    const Index n = batch.size();
    if (next_values.size() != n) throw DimensionError("discounted_returns: value vector mismatch");
    Vec ret(n);
    for (Index e = 0; e < batch.episode_count(); ++e) {
        auto [begin, end] = batch.episode_range(e);
        double carry = 0.0;
        for (Index t = end - 1; t >= begin; --t) {
            const bool term = batch.terminal[static_cast<std::size_t>(t)] != 0;
            const double tail = term ? 0.0 : (t == end - 1 ? next_values[t] : carry);
            carry = batch.rewards[t] + gamma * tail;
            ret[t] = carry;
        }
    }
    return ret;
}

}  // namespace bqpg::envs
