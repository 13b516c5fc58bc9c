#include "bqpg/envs/rollout.hpp"

#include <cmath>
#include <thread>
#include <vector>

namespace bqpg::envs {

using policy::SampleBatch;
using Index = Eigen::Index;

SampleBatch collect_batch(const Environment& env, const policy::PolicyNetwork& policy,
                          Index min_samples, Rng& rng, double gamma) {
    if (min_samples <= 0) throw InputError("collect_batch: sample target must be positive");
    if (env.state_dim() != policy.state_dim() || env.action_dim() != policy.action_dim())
        throw DimensionError("collect_batch: policy/environment dimension mismatch");

    struct Row {
        Vec s, a, s2;
        double r, lp, w;
        bool terminal;
    };
    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(min_samples) + static_cast<std::size_t>(env.horizon()));
    std::vector<Index> episode_starts;
    bool diverged = false;

    while (static_cast<Index>(rows.size()) < min_samples) {
        episode_starts.push_back(static_cast<Index>(rows.size()));
        Vec s = env.reset(rng);
        double w = 1.0;
        for (int t = 0; t < env.horizon(); ++t) {
            Vec a = policy.sample_action(s, rng);
            Environment::Step step = env.step(s, a, rng);
            bool bad = !step.next_state.allFinite() || !std::isfinite(step.reward) ||
                       std::abs(step.reward) > env.reward_bound();
            if (bad) {
                diverged = true;
                // close out the episode as a true terminal; the offending
                // next state never enters the batch
                step.next_state = s;
                step.reward = std::isfinite(step.reward) ? step.reward : 0.0;
                step.terminal = true;
            }
            rows.push_back({s, a, step.next_state, step.reward,
                            policy.log_prob(s, a), w, step.terminal});
            if (step.terminal || bad) break;
            s = step.next_state;
            w *= gamma;
        }
    }

    const Index n = static_cast<Index>(rows.size());
    SampleBatch batch;
    batch.states.resize(n, env.state_dim());
    batch.actions.resize(n, env.action_dim());
    batch.next_states.resize(n, env.state_dim());
    batch.rewards.resize(n);
    batch.logprobs_behavior.resize(n);
    batch.q_values = Vec::Zero(n);
    batch.discount_weights.resize(n);
    batch.terminal.resize(static_cast<std::size_t>(n));
    batch.episode_starts = std::move(episode_starts);
    batch.diverged = diverged;
    for (Index i = 0; i < n; ++i) {
        const Row& row = rows[static_cast<std::size_t>(i)];
        batch.states.row(i) = row.s.transpose();
        batch.actions.row(i) = row.a.transpose();
        batch.next_states.row(i) = row.s2.transpose();
        batch.rewards[i] = row.r;
        batch.logprobs_behavior[i] = row.lp;
        batch.discount_weights[i] = row.w;
        batch.terminal[static_cast<std::size_t>(i)] = row.terminal ? 1 : 0;
    }
    return batch;
}

namespace {

SampleBatch merge_batches(std::vector<SampleBatch>& parts) {
    Index n = 0;
    for (const auto& p : parts) n += p.size();
    SampleBatch out;
    out.states.resize(n, parts.front().states.cols());
    out.actions.resize(n, parts.front().actions.cols());
    out.next_states.resize(n, parts.front().next_states.cols());
    out.rewards.resize(n);
    out.logprobs_behavior.resize(n);
    out.q_values = Vec::Zero(n);
    out.discount_weights.resize(n);
    out.terminal.resize(static_cast<std::size_t>(n));
    Index at = 0;
    for (const auto& p : parts) {
        const Index k = p.size();
        out.states.middleRows(at, k) = p.states;
        out.actions.middleRows(at, k) = p.actions;
        out.next_states.middleRows(at, k) = p.next_states;
        out.rewards.segment(at, k) = p.rewards;
        out.logprobs_behavior.segment(at, k) = p.logprobs_behavior;
        out.discount_weights.segment(at, k) = p.discount_weights;
        for (Index i = 0; i < k; ++i)
            out.terminal[static_cast<std::size_t>(at + i)] = p.terminal[static_cast<std::size_t>(i)];
        for (Index start : p.episode_starts) out.episode_starts.push_back(at + start);
        out.diverged = out.diverged || p.diverged;
        at += k;
    }
    return out;
}

}  // namespace

SampleBatch collect_batch_parallel(const Environment& env, const policy::PolicyNetwork& policy,
                                   Index min_samples, std::uint64_t seed, double gamma,
                                   int workers) {
    workers = std::max(workers, 1);
    if (workers == 1) {
        Rng rng(derive_seed(seed, 0));
        return collect_batch(env, policy, min_samples, rng, gamma);
    }
    const Index quota = (min_samples + workers - 1) / workers;
    std::vector<SampleBatch> parts(static_cast<std::size_t>(workers));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            auto local_env = env.clone();
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(w)));
            parts[static_cast<std::size_t>(w)] = collect_batch(*local_env, policy, quota, rng, gamma);
        });
    }
    for (auto& t : threads) t.join();
    return merge_batches(parts);
}

ReturnSummary summarize_returns(const policy::SampleBatch& batch, double gamma) {
    ReturnSummary out;
    out.episodes = batch.episode_count();
    for (Index e = 0; e < out.episodes; ++e) {
        auto [begin, end] = batch.episode_range(e);
        double disc = 0.0, undisc = 0.0, w = 1.0;
        for (Index t = begin; t < end; ++t) {
            disc += w * batch.rewards[t];
            undisc += batch.rewards[t];
            w *= gamma;
        }
        out.mean_discounted += disc;
        out.mean_undiscounted += undisc;
    }
    out.mean_discounted /= static_cast<double>(out.episodes);
    out.mean_undiscounted /= static_cast<double>(out.episodes);
    return out;
}

}  // namespace bqpg::envs
