#pragma once

#include <vector>

#include <Eigen/Core>

#include "bqpg/errors.hpp"
#include "bqpg/rng.hpp"

namespace bqpg::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense tanh MLP with hand-derived batched reverse- and forward-mode passes.
/// All parameter vectors are flat: per layer, vec(W) column-major then b.
/// Rows of every batch matrix are samples.
class Mlp {
public:
    Mlp(int input_dim, std::vector<int> hidden_dims, int output_dim, bool tanh_output);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    Index param_count() const { return param_count_; }

    Vec get_params() const;
    void set_params(const Vec& flat);

    /// Orthogonal weights (gain 1.0), zero biases.
    void init_orthogonal(Rng& rng);

    struct Forward {
        // activations[0] is the input batch; activations[l+1] the output of layer l.
        std::vector<Mat> activations;
        const Mat& output() const { return activations.back(); }
    };

    Forward forward(const Mat& inputs) const;

    /// Reverse mode: flat parameter gradient of sum_i <cotangent_i, output_i>.
    Vec backward(const Forward& fwd, const Mat& output_cotangent) const;

    /// Forward mode: output tangent for a flat parameter tangent.
    Mat jvp(const Forward& fwd, const Vec& param_tangent) const;

private:
    bool layer_activated(std::size_t layer) const {
        return layer + 1 < weights_.size() || tanh_output_;
    }

    int input_dim_;
    int output_dim_;
    bool tanh_output_;
    Index param_count_ = 0;
    std::vector<Mat> weights_;  // weights_[l]: d_out x d_in
    std::vector<Vec> biases_;
};

Mat orthogonal_matrix(Index rows, Index cols, Rng& rng);

}  // namespace bqpg::nn
