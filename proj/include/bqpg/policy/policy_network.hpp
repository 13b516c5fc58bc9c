#pragma once

#include <vector>

#include "bqpg/nn/mlp.hpp"
#include "bqpg/policy/sample_batch.hpp"

namespace bqpg::policy {

/// Diagonal-Gaussian MLP policy: tanh MLP mean head plus a state-independent
/// log-std vector. Scores and Jacobian products over the score matrix
/// U = [u(z_1) ... u(z_n)] are exact hand-derived passes; U is never formed.
///
/// Flat parameter layout: mean-net params (per layer: vec(W) column-major,
/// then b), followed by log_std.
class PolicyNetwork {
public:
    PolicyNetwork(int state_dim, int action_dim, std::vector<int> hidden_dims = {64, 64});

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    const std::vector<int>& hidden_dims() const { return hidden_dims_; }
    Index param_count() const { return mean_net_.param_count() + action_dim_; }

    Vec get_theta() const;
    void set_theta(const Vec& theta);
    void init_default(Rng& rng);  // orthogonal weights, zero biases, log_std = 0

    const Vec& log_std() const { return log_std_; }
    Vec stds() const { return log_std_.array().exp(); }

    Vec action_mean(const Vec& state) const;
    Mat action_means(const Mat& states) const;
    Vec sample_action(const Vec& state, Rng& rng) const;

    double log_prob(const Vec& state, const Vec& action) const;
    Vec log_probs(const Mat& states, const Mat& actions) const;

    /// u(z) = grad_theta log pi(a|s), exact reverse mode.
    Vec score_vector(const Vec& state, const Vec& action) const;

    /// U*w = sum_i w_i u(z_i) in one reverse sweep over the batch.
    Vec score_vjp(const SampleBatch& batch, const Vec& w) const;

    /// U^T*v, entry i = <u(z_i), v>, one forward-mode sweep.
    Vec score_jvp(const SampleBatch& batch, const Vec& v) const;

    /// Column-blocked variants sharing one forward pass; these keep the
    /// randomized SVD over score products linear-time in practice.
    Mat score_vjp_multi(const SampleBatch& batch, const Mat& w_block) const;
    Mat score_jvp_multi(const SampleBatch& batch, const Mat& v_block) const;

    /// Mean KL(pi_old || pi_this) over the batch states, closed form for
    /// diagonal Gaussians. `old` must share the architecture.
    double mean_kl_from(const PolicyNetwork& old, const Mat& states) const;

private:
    struct BatchEval {
        nn::Mlp::Forward fwd;
        Mat residual_over_var;   // (a - mu) / sigma^2, n x A
        Mat logstd_score;        // ((a - mu)^2 / sigma^2) - 1, n x A
    };
    BatchEval eval_batch(const Mat& states, const Mat& actions) const;

    int state_dim_;
    int action_dim_;
    std::vector<int> hidden_dims_;
    nn::Mlp mean_net_;
    Vec log_std_;
};

}  // namespace bqpg::policy
