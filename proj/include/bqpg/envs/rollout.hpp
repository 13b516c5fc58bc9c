#pragma once

#include "bqpg/envs/environment.hpp"
#include "bqpg/policy/policy_network.hpp"

namespace bqpg::envs {

/// Runs whole episodes until at least `min_samples` steps are collected.
/// Records behavior log-probs and per-step discount weights gamma^t
/// (restarting each episode). Non-finite dynamics or rewards past the
/// declared bound truncate the episode with the batch flagged.
policy::SampleBatch collect_batch(const Environment& env, const policy::PolicyNetwork& policy,
                                  Eigen::Index min_samples, Rng& rng, double gamma);

/// Same, split over `workers` collectors with sub-seeds derived from `seed`;
/// the merge is ordered by sub-seed index, so output depends on the worker
/// count but not on scheduling.
policy::SampleBatch collect_batch_parallel(const Environment& env,
                                           const policy::PolicyNetwork& policy,
                                           Eigen::Index min_samples, std::uint64_t seed,
                                           double gamma, int workers);

/// Mean discounted and undiscounted episode returns of a collected batch.
struct ReturnSummary {
    double mean_discounted = 0.0;
    double mean_undiscounted = 0.0;
    Eigen::Index episodes = 0;
};
ReturnSummary summarize_returns(const policy::SampleBatch& batch, double gamma);

}  // namespace bqpg::envs
