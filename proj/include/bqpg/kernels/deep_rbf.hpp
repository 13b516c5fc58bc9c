#pragma once

#include <optional>
#include <vector>

#include "bqpg/nn/mlp.hpp"

namespace bqpg::kernels {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Additive deep RBF state kernel:
///   k_s(s1, s2) = sum_d eta * exp(-(phi(s1)_d - phi(s2)_d)^2 / (2 l_d^2))
/// with phi a tanh feature extractor. Lengthscales and signal scale live in
/// log space so first-order updates keep them positive. An empty hidden-dim
/// list drops the feature net and uses the raw state as features.
class DeepRBFKernel {
public:
    DeepRBFKernel(int state_dim, std::vector<int> feature_hidden_dims = {64, 48},
                  int feature_dim = 10);

    int state_dim() const { return state_dim_; }
    int feature_dim() const { return feature_dim_; }
    bool has_feature_net() const { return feature_net_.has_value(); }
    const std::vector<int>& feature_hidden_dims() const { return feature_hidden_dims_; }

    /// Flat params: [feature net | log lengthscales (feature_dim) | log signal].
    Index param_count() const;
    Index feature_net_param_count() const { return feature_net_ ? feature_net_->param_count() : 0; }
    Vec get_params() const;
    void set_params(const Vec& flat);
    void init_default(Rng& rng);  // orthogonal feature net, unit scales

    Vec lengthscales() const { return log_lengthscales_.array().exp(); }
    double signal_scale() const { return std::exp(log_signal_); }

    Mat features(const Mat& states) const;
    double eval(const Vec& s1, const Vec& s2) const;

    /// Dense Gram on feature rows (used by the MLL path and test oracles).
    Mat gram_from_features(const Mat& f) const;
    Mat gram(const Mat& states) const { return gram_from_features(features(states)); }

    /// Reverse pass of the dense Gram: given dJ/dK (n x n), returns the flat
    /// parameter gradient, chaining through the feature extractor.
    Vec gram_backward(const Mat& states, const Mat& kbar) const;

    /// Reverse pass of features() alone: feature-net parameter gradient for a
    /// feature cotangent (n x feature_dim). Empty vector without a net.
    Vec feature_backward(const Mat& states, const Mat& fbar) const;

private:
    int state_dim_;
    int feature_dim_;
    std::vector<int> feature_hidden_dims_;
    std::optional<nn::Mlp> feature_net_;
    Vec log_lengthscales_;
    double log_signal_ = 0.0;
};

}  // namespace bqpg::kernels
