#include "bqpg/policy/policy_network.hpp"

#include <cmath>
#include <numbers>

namespace bqpg::policy {

namespace {
constexpr double kHalfLog2Pi = 0.5 * 1.8378770664093454836;  // 0.5*ln(2*pi)
}

PolicyNetwork::PolicyNetwork(int state_dim, int action_dim, std::vector<int> hidden_dims)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      hidden_dims_(hidden_dims),
      mean_net_(state_dim, std::move(hidden_dims), action_dim, /*tanh_output=*/false),
      log_std_(Vec::Zero(action_dim)) {}

Vec PolicyNetwork::get_theta() const {
    Vec theta(param_count());
    theta.head(mean_net_.param_count()) = mean_net_.get_params();
    theta.tail(action_dim_) = log_std_;
    return theta;
}

void PolicyNetwork::set_theta(const Vec& theta) {
    if (theta.size() != param_count()) throw DimensionError("PolicyNetwork::set_theta: length mismatch");
    mean_net_.set_params(theta.head(mean_net_.param_count()));
    log_std_ = theta.tail(action_dim_);
}

void PolicyNetwork::init_default(Rng& rng) {
    mean_net_.init_orthogonal(rng);
    // small mean head: the initial policy explores through the unit log-std
    // rather than through a large random feedback gain
    Vec params = mean_net_.get_params();
    const Index head = static_cast<Index>(action_dim_) * (hidden_dims_.empty() ? state_dim_ : hidden_dims_.back());
    const Index head_start = mean_net_.param_count() - head - action_dim_;
    params.segment(head_start, head) *= 0.01;
    mean_net_.set_params(params);
    log_std_.setZero();
}

Vec PolicyNetwork::action_mean(const Vec& state) const {
    return mean_net_.forward(state.transpose()).output().row(0);
}

Mat PolicyNetwork::action_means(const Mat& states) const {
    return mean_net_.forward(states).output();
}

Vec PolicyNetwork::sample_action(const Vec& state, Rng& rng) const {
    Vec mu = action_mean(state);
    Vec eps = gaussian_vector(action_dim_, rng);
    return mu + stds().cwiseProduct(eps);
}

double PolicyNetwork::log_prob(const Vec& state, const Vec& action) const {
    if (!state.allFinite() || !action.allFinite()) throw InputError("log_prob: non-finite input");
    Mat s = state.transpose();
    Mat a = action.transpose();
    return log_probs(s, a)[0];
}

Vec PolicyNetwork::log_probs(const Mat& states, const Mat& actions) const {
    if (!states.allFinite() || !actions.allFinite()) throw InputError("log_probs: non-finite input");
    if (states.rows() != actions.rows() || actions.cols() != action_dim_)
        throw DimensionError("log_probs: shape mismatch");
    Mat mu = action_means(states);
    Vec inv_var = (-2.0 * log_std_).array().exp();
    Mat diff = actions - mu;
    Vec out = Vec::Constant(states.rows(), -static_cast<double>(action_dim_) * kHalfLog2Pi - log_std_.sum());
    out -= 0.5 * (diff.array().square().rowwise() * inv_var.transpose().array()).rowwise().sum().matrix();
    return out;
}

PolicyNetwork::BatchEval PolicyNetwork::eval_batch(const Mat& states, const Mat& actions) const {
    if (states.rows() != actions.rows() || states.cols() != state_dim_ || actions.cols() != action_dim_)
        throw DimensionError("PolicyNetwork: batch shape mismatch");
    BatchEval ev;
    ev.fwd = mean_net_.forward(states);
    Vec inv_var = (-2.0 * log_std_).array().exp();
    Mat diff = actions - ev.fwd.output();
    ev.residual_over_var = diff.array().rowwise() * inv_var.transpose().array();
    ev.logstd_score = (diff.array().square().rowwise() * inv_var.transpose().array()) - 1.0;
    return ev;
}

Vec PolicyNetwork::score_vector(const Vec& state, const Vec& action) const {
    if (!state.allFinite() || !action.allFinite()) throw InputError("score_vector: non-finite input");
    BatchEval ev = eval_batch(state.transpose(), action.transpose());
    Vec score(param_count());
    score.head(mean_net_.param_count()) = mean_net_.backward(ev.fwd, ev.residual_over_var);
    score.tail(action_dim_) = ev.logstd_score.row(0);
    return score;
}

Vec PolicyNetwork::score_vjp(const SampleBatch& batch, const Vec& w) const {
    if (w.size() != batch.size()) throw DimensionError("score_vjp: weight length != batch size");
    BatchEval ev = eval_batch(batch.states, batch.actions);
    Mat cot = ev.residual_over_var.array().colwise() * w.array();
    Vec out(param_count());
    out.head(mean_net_.param_count()) = mean_net_.backward(ev.fwd, cot);
    out.tail(action_dim_) = ev.logstd_score.transpose() * w;
    return out;
}

Vec PolicyNetwork::score_jvp(const SampleBatch& batch, const Vec& v) const {
    if (v.size() != param_count()) throw DimensionError("score_jvp: vector length != param count");
    BatchEval ev = eval_batch(batch.states, batch.actions);
    Mat dmu = mean_net_.jvp(ev.fwd, v.head(mean_net_.param_count()));
    Vec out = (ev.residual_over_var.array() * dmu.array()).rowwise().sum();
    out += ev.logstd_score * v.tail(action_dim_);
    return out;
}

Mat PolicyNetwork::score_vjp_multi(const SampleBatch& batch, const Mat& w_block) const {
    if (w_block.rows() != batch.size()) throw DimensionError("score_vjp_multi: row count != batch size");
    BatchEval ev = eval_batch(batch.states, batch.actions);
    Mat out(param_count(), w_block.cols());
    for (Index j = 0; j < w_block.cols(); ++j) {
        Mat cot = ev.residual_over_var.array().colwise() * w_block.col(j).array();
        out.col(j).head(mean_net_.param_count()) = mean_net_.backward(ev.fwd, cot);
        out.col(j).tail(action_dim_) = ev.logstd_score.transpose() * w_block.col(j);
    }
    return out;
}

Mat PolicyNetwork::score_jvp_multi(const SampleBatch& batch, const Mat& v_block) const {
    if (v_block.rows() != param_count()) throw DimensionError("score_jvp_multi: row count != param count");
    BatchEval ev = eval_batch(batch.states, batch.actions);
    Mat out(batch.size(), v_block.cols());
    for (Index j = 0; j < v_block.cols(); ++j) {
        Mat dmu = mean_net_.jvp(ev.fwd, v_block.col(j).head(mean_net_.param_count()));
        out.col(j) = (ev.residual_over_var.array() * dmu.array()).rowwise().sum();
        out.col(j) += ev.logstd_score * v_block.col(j).tail(action_dim_);
    }
    return out;
}

double PolicyNetwork::mean_kl_from(const PolicyNetwork& old, const Mat& states) const {
    Mat mu_old = old.action_means(states);
    Mat mu_new = action_means(states);
    Vec var_old = (2.0 * old.log_std_).array().exp();
    Vec var_new = (2.0 * log_std_).array().exp();
    double kl = 0.0;
    const Index n = states.rows();
    for (int j = 0; j < action_dim_; ++j) {
        double term = log_std_[j] - old.log_std_[j] - 0.5;
        double scale = 0.5 / var_new[j];
        kl += n * term + scale * (var_old[j] * n + (mu_new.col(j) - mu_old.col(j)).squaredNorm());
    }
    return kl / static_cast<double>(n);
}

}  // namespace bqpg::policy
