#pragma once

#include "bqpg/policy/sample_batch.hpp"

namespace bqpg::envs {

using policy::Vec;

struct GAEConfig {
    double gamma = 0.995;
    double tau = 0.97;

    void validate() const {
        if (gamma < 0.0 || gamma >= 1.0) throw InputError("GAEConfig: gamma must be in [0, 1)");
        if (tau < 0.0 || tau > 1.0) throw InputError("GAEConfig: tau must be in [0, 1]");
    }
};

/// GAE(gamma, tau) over each episode:
///   delta_t = r_t + gamma V(s_{t+1}) - V(s_t),  A_t = delta_t + gamma tau A_{t+1}.
/// True terminals zero the bootstrap; time-limit truncation keeps
/// V(s_{t+1}) alive. Results are written into batch.q_values and returned.
Vec gae_advantages(policy::SampleBatch& batch, const Vec& values, const Vec& next_values,
                   const GAEConfig& config);

/// Per-step discounted return-to-go, bootstrapping V(s_T) at truncation.
Vec discounted_returns(const policy::SampleBatch& batch, const Vec& next_values, double gamma);

/// Mean-zero, unit-scale advantage normalization (the usual practical
/// post-processing before estimation; a no-op on constant vectors).
Vec standardize(const Vec& v);

}  // namespace bqpg::envs
