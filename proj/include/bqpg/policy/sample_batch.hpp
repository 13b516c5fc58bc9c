#pragma once

#include <vector>

#include <Eigen/Core>

#include "bqpg/errors.hpp"

namespace bqpg::policy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// One on-policy batch of state-action samples plus everything the
/// estimators and algorithms need alongside: rewards and next states for
/// advantage targets, behavior log-probs for surrogate ratios, per-step
/// discount weights, and episode bookkeeping.
struct SampleBatch {
    Mat states;             // n x state_dim
    Mat actions;            // n x action_dim
    Mat next_states;        // n x state_dim
    Vec rewards;            // n
    Vec logprobs_behavior;  // n, recorded at collection time
    Vec q_values;           // n, advantage/return targets; filled before estimation
    Vec discount_weights;   // n, gamma^t restarting per episode
    std::vector<char> terminal;        // n, true terminal (not time-limit truncation)
    std::vector<Index> episode_starts; // ascending, episode_starts[0] == 0
    bool diverged = false;             // an episode was truncated on non-finite state

    Index size() const { return states.rows(); }

    Index episode_count() const { return static_cast<Index>(episode_starts.size()); }

    std::pair<Index, Index> episode_range(Index e) const {
        const Index begin = episode_starts[static_cast<std::size_t>(e)];
        const Index end = (e + 1 < episode_count())
                              ? episode_starts[static_cast<std::size_t>(e + 1)]
                              : size();
        return {begin, end};
    }

    void validate() const {
        const Index n = size();
        if (n <= 0) throw InputError("SampleBatch: empty batch");
        if (actions.rows() != n || next_states.rows() != n || rewards.size() != n ||
            logprobs_behavior.size() != n || discount_weights.size() != n ||
            static_cast<Index>(terminal.size()) != n)
            throw DimensionError("SampleBatch: field length mismatch");
        if (episode_starts.empty() || episode_starts.front() != 0)
            throw InputError("SampleBatch: episode_starts must begin at 0");
        if (!states.allFinite() || !actions.allFinite())
            throw InputError("SampleBatch: non-finite states or actions");
    }
};

}  // namespace bqpg::policy
