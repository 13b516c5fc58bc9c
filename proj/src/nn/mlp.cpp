#include "bqpg/nn/mlp.hpp"

#include <Eigen/Dense>

namespace bqpg::nn {

Mat orthogonal_matrix(Index rows, Index cols, Rng& rng) {
    const Index big = std::max(rows, cols);
    const Index small = std::min(rows, cols);
    Mat g = gaussian_matrix(big, small, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(big, small);
    Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (Index j = 0; j < small; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return rows >= cols ? q : Mat(q.transpose());
}

Mlp::Mlp(int input_dim, std::vector<int> hidden_dims, int output_dim, bool tanh_output)
    : input_dim_(input_dim), output_dim_(output_dim), tanh_output_(tanh_output) {
    if (input_dim <= 0 || output_dim <= 0) throw DimensionError("Mlp: dims must be positive");
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : hidden_dims) {
        if (h <= 0) throw DimensionError("Mlp: hidden dims must be positive");
        dims.push_back(h);
    }
    dims.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        weights_.emplace_back(Mat::Zero(dims[l + 1], dims[l]));
        biases_.emplace_back(Vec::Zero(dims[l + 1]));
        param_count_ += static_cast<Index>(dims[l + 1]) * dims[l] + dims[l + 1];
    }
}

Vec Mlp::get_params() const {
    Vec flat(param_count_);
    Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const Mat& w = weights_[l];
        flat.segment(at, w.size()) = Eigen::Map<const Vec>(w.data(), w.size());
        at += w.size();
        flat.segment(at, biases_[l].size()) = biases_[l];
        at += biases_[l].size();
    }
    return flat;
}

void Mlp::set_params(const Vec& flat) {
    if (flat.size() != param_count_) throw DimensionError("Mlp::set_params: flat length mismatch");
    Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Mat& w = weights_[l];
        Eigen::Map<Vec>(w.data(), w.size()) = flat.segment(at, w.size());
        at += w.size();
        biases_[l] = flat.segment(at, biases_[l].size());
        at += biases_[l].size();
    }
}

void Mlp::init_orthogonal(Rng& rng) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l] = orthogonal_matrix(weights_[l].rows(), weights_[l].cols(), rng);
        biases_[l].setZero();
    }
}

Mlp::Forward Mlp::forward(const Mat& inputs) const {
    if (inputs.cols() != input_dim_) throw DimensionError("Mlp::forward: input width mismatch");
    Forward fwd;
    fwd.activations.reserve(weights_.size() + 1);
    fwd.activations.push_back(inputs);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Mat z = fwd.activations.back() * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        if (layer_activated(l)) z = z.array().tanh();
        fwd.activations.push_back(std::move(z));
    }
    return fwd;
}

Vec Mlp::backward(const Forward& fwd, const Mat& output_cotangent) const {
    if (output_cotangent.rows() != fwd.output().rows() || output_cotangent.cols() != output_dim_)
        throw DimensionError("Mlp::backward: cotangent shape mismatch");

    Vec grad = Vec::Zero(param_count_);
    Mat abar = output_cotangent;

    Index at = param_count_;
    for (std::size_t li = weights_.size(); li-- > 0;) {
        const Mat& act = fwd.activations[li + 1];
        Mat zbar = layer_activated(li)
                       ? Mat(abar.array() * (1.0 - act.array().square()))
                       : abar;
        Mat wbar = zbar.transpose() * fwd.activations[li];
        Vec bbar = zbar.colwise().sum();

        at -= bbar.size();
        grad.segment(at, bbar.size()) = bbar;
        at -= wbar.size();
        grad.segment(at, wbar.size()) = Eigen::Map<const Vec>(wbar.data(), wbar.size());

        if (li > 0) abar = zbar * weights_[li];
    }
    return grad;
}

Mat Mlp::jvp(const Forward& fwd, const Vec& param_tangent) const {
    if (param_tangent.size() != param_count_) throw DimensionError("Mlp::jvp: tangent length mismatch");

    const Index n = fwd.activations.front().rows();
    Mat da = Mat::Zero(n, input_dim_);
    Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const Mat& w = weights_[l];
        Eigen::Map<const Mat> dw(param_tangent.data() + at, w.rows(), w.cols());
        at += w.size();
        Eigen::Map<const Vec> db(param_tangent.data() + at, biases_[l].size());
        at += biases_[l].size();

        Mat dz = fwd.activations[l] * dw.transpose();
        if (l > 0) dz.noalias() += da * w.transpose();
        dz.rowwise() += db.transpose();
        if (layer_activated(l)) {
            const Mat& act = fwd.activations[l + 1];
            dz.array() *= (1.0 - act.array().square());
        }
        da = std::move(dz);
    }
    return da;
}

}  // namespace bqpg::nn
