#include "bqpg/kernels/deep_rbf.hpp"

#include <cmath>

namespace bqpg::kernels {

DeepRBFKernel::DeepRBFKernel(int state_dim, std::vector<int> feature_hidden_dims, int feature_dim)
    : state_dim_(state_dim), feature_hidden_dims_(std::move(feature_hidden_dims)) {
    if (feature_hidden_dims_.empty()) {
        feature_dim_ = state_dim;  // identity features
    } else {
        feature_dim_ = feature_dim;
        feature_net_.emplace(state_dim, feature_hidden_dims_, feature_dim, /*tanh_output=*/true);
    }
    log_lengthscales_ = Vec::Zero(feature_dim_);
}

Index DeepRBFKernel::param_count() const {
    return feature_net_param_count() + feature_dim_ + 1;
}

Vec DeepRBFKernel::get_params() const {
    Vec flat(param_count());
    if (feature_net_) flat.head(feature_net_->param_count()) = feature_net_->get_params();
    flat.segment(feature_net_param_count(), feature_dim_) = log_lengthscales_;
    flat[param_count() - 1] = log_signal_;
    return flat;
}

void DeepRBFKernel::set_params(const Vec& flat) {
    if (flat.size() != param_count()) throw DimensionError("DeepRBFKernel::set_params: length mismatch");
    if (feature_net_) feature_net_->set_params(flat.head(feature_net_->param_count()));
    log_lengthscales_ = flat.segment(feature_net_param_count(), feature_dim_);
    log_signal_ = flat[param_count() - 1];
}

void DeepRBFKernel::init_default(Rng& rng) {
    if (feature_net_) feature_net_->init_orthogonal(rng);
    log_lengthscales_.setZero();
    log_signal_ = 0.0;
}

Mat DeepRBFKernel::features(const Mat& states) const {
    if (states.cols() != state_dim_) throw DimensionError("DeepRBFKernel::features: state width mismatch");
    if (!feature_net_) return states;
    return feature_net_->forward(states).output();
}

double DeepRBFKernel::eval(const Vec& s1, const Vec& s2) const {
    if (!s1.allFinite() || !s2.allFinite()) throw InputError("DeepRBFKernel::eval: non-finite state");
    Mat pair(2, state_dim_);
    pair.row(0) = s1.transpose();
    pair.row(1) = s2.transpose();
    Mat f = features(pair);
    const double eta = signal_scale();
    Vec inv2l2 = (-2.0 * log_lengthscales_).array().exp() * 0.5;
    double k = 0.0;
    for (int d = 0; d < feature_dim_; ++d) {
        const double r = f(0, d) - f(1, d);
        k += eta * std::exp(-r * r * inv2l2[d]);
    }
    return k;
}

Vec DeepRBFKernel::feature_backward(const Mat& states, const Mat& fbar) const {
    if (!feature_net_) return Vec();
    auto fwd = feature_net_->forward(states);
    return feature_net_->backward(fwd, fbar);
}

Mat DeepRBFKernel::gram_from_features(const Mat& f) const {
    const Index n = f.rows();
    const double eta = signal_scale();
    Vec inv2l2 = (-2.0 * log_lengthscales_).array().exp() * 0.5;
    Mat k = Mat::Zero(n, n);
    for (int d = 0; d < feature_dim_; ++d) {
        Vec col = f.col(d);
        Mat diff = col.replicate(1, n) - col.transpose().replicate(n, 1);
        k += (eta * (-inv2l2[d] * diff.array().square()).exp()).matrix();
    }
    return k;
}

Vec DeepRBFKernel::gram_backward(const Mat& states, const Mat& kbar) const {
    const Index n = states.rows();
    if (kbar.rows() != n || kbar.cols() != n) throw DimensionError("gram_backward: kbar shape mismatch");

    std::optional<nn::Mlp::Forward> fwd;
    Mat f;
    if (feature_net_) {
        fwd = feature_net_->forward(states);
        f = fwd->output();
    } else {
        f = states;
    }

    const double eta = signal_scale();
    Vec inv_l2 = (-2.0 * log_lengthscales_).array().exp();
    Mat ksym = kbar + kbar.transpose();  // K_ij and K_ji carry the same dependence

    Vec grad = Vec::Zero(param_count());
    Mat fbar = Mat::Zero(n, feature_dim_);
    double signal_grad = 0.0;

    for (int d = 0; d < feature_dim_; ++d) {
        Vec col = f.col(d);
        Mat diff = col.replicate(1, n) - col.transpose().replicate(n, 1);
        Mat kd = (eta * (-0.5 * inv_l2[d] * diff.array().square()).exp()).matrix();

        // d/d log l_d: k_d * r^2 / l_d^2
        grad[feature_net_param_count() + d] =
            0.5 * (ksym.array() * kd.array() * diff.array().square() * inv_l2[d]).sum();
        // d/d log eta accumulates all additive terms
        signal_grad += 0.5 * (ksym.array() * kd.array()).sum();
        // d k_d(i,j) / d f_id = -k_d * r / l_d^2 (and j picks up the opposite sign)
        Mat w = (ksym.array() * kd.array() * diff.array() * (-inv_l2[d])).matrix();
        fbar.col(d) = w.rowwise().sum();
    }
    grad[param_count() - 1] = signal_grad;
    if (feature_net_) grad.head(feature_net_->param_count()) = feature_net_->backward(*fwd, fbar);
    return grad;
}

}  // namespace bqpg::kernels
