#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bqpg/errors.hpp"

namespace bqpg::linalg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Matrix-free symmetric operator: everything downstream (CG, randomized SVD,
/// kernel compositions) only ever touches it through apply().
class LinearOperator {
public:
    using MvmFn = std::function<Vec(const Vec&)>;
    using BlockMvmFn = std::function<Mat(const Mat&)>;

    LinearOperator(Index dim, bool symmetric, std::string label, MvmFn mvm)
        : dim_(dim), symmetric_(symmetric), label_(std::move(label)), mvm_(std::move(mvm)) {
        if (dim_ <= 0) throw DimensionError("LinearOperator: dim must be positive");
    }

    Index dim() const { return dim_; }
    bool symmetric() const { return symmetric_; }
    const std::string& label() const { return label_; }

    Vec apply(const Vec& v) const {
        if (v.size() != dim_) throw DimensionError("LinearOperator::apply: vector length " + std::to_string(v.size()) + " != dim " + std::to_string(dim_));
        Vec out = mvm_(v);
        if (out.size() != dim_) throw DimensionError("LinearOperator::apply: mvm produced wrong length");
        return out;
    }

    // Multi-vector apply. Falls back to a column loop unless a fused block
    // routine was registered (the score-matrix operators register one; it is
    // what keeps randomized SVD at large n affordable).
    Mat apply_block(const Mat& block) const {
        if (block.rows() != dim_) throw DimensionError("LinearOperator::apply_block: row count mismatch");
        if (block_mvm_) return block_mvm_(block);
        Mat out(dim_, block.cols());
        for (Index j = 0; j < block.cols(); ++j) out.col(j) = apply(block.col(j));
        return out;
    }

    void set_block_mvm(BlockMvmFn fn) { block_mvm_ = std::move(fn); }

    // --- constructors for common operators ---

    static LinearOperator identity(Index dim) {
        return LinearOperator(dim, true, "I", [](const Vec& v) { return v; });
    }

    static LinearOperator diagonal(Vec d) {
        auto diag = std::make_shared<Vec>(std::move(d));
        return LinearOperator(diag->size(), true, "diag",
                              [diag](const Vec& v) -> Vec { return diag->cwiseProduct(v); });
    }

    static LinearOperator dense(Mat a, bool symmetric) {
        if (a.rows() != a.cols()) throw DimensionError("LinearOperator::dense: matrix must be square");
        auto m = std::make_shared<Mat>(std::move(a));
        LinearOperator op(m->rows(), symmetric, "dense",
                          [m](const Vec& v) -> Vec { return (*m) * v; });
        op.set_block_mvm([m](const Mat& b) -> Mat { return (*m) * b; });
        return op;
    }

    /// a*A + b*B. Symmetric only when both terms are.
    static LinearOperator weighted_sum(double a, LinearOperator lhs, double b, LinearOperator rhs) {
        if (lhs.dim() != rhs.dim()) throw DimensionError("weighted_sum: dimension mismatch");
        bool sym = lhs.symmetric() && rhs.symmetric();
        auto l = std::make_shared<LinearOperator>(std::move(lhs));
        auto r = std::make_shared<LinearOperator>(std::move(rhs));
        LinearOperator op(l->dim(), sym, "sum",
                          [a, b, l, r](const Vec& v) -> Vec { return a * l->apply(v) + b * r->apply(v); });
        op.set_block_mvm([a, b, l, r](const Mat& m) -> Mat {
            return a * l->apply_block(m) + b * r->apply_block(m);
        });
        return op;
    }

    /// A + shift*I.
    LinearOperator shifted(double shift) const {
        LinearOperator base = *this;
        auto self = std::make_shared<LinearOperator>(std::move(base));
        LinearOperator op(self->dim(), self->symmetric(), self->label() + "+shift",
                          [shift, self](const Vec& v) -> Vec { return self->apply(v) + shift * v; });
        op.set_block_mvm([shift, self](const Mat& m) -> Mat { return self->apply_block(m) + shift * m; });
        return op;
    }

private:
    Index dim_;
    bool symmetric_;
    std::string label_;
    MvmFn mvm_;
    BlockMvmFn block_mvm_;
};

inline constexpr Index kDenseOracleCap = 2048;

/// Forms the full matrix column by column. Test-oracle support; refuses to
/// build anything above the cap so it never sneaks into a hot path.
Mat dense_materialize(const LinearOperator& op, Index cap = kDenseOracleCap);

}  // namespace bqpg::linalg
