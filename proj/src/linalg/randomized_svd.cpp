#include "bqpg/linalg/randomized_svd.hpp"

#include <algorithm>

#include <Eigen/Dense>

namespace bqpg::linalg {

namespace {

Mat orthonormalize(const Mat& y) {
    Eigen::HouseholderQR<Mat> qr(y);
    Mat q = qr.householderQ() * Mat::Identity(y.rows(), y.cols());
    return q;
}

}  // namespace

TruncatedSpectrum randomized_svd(const LinearOperator& op, Index rank, Rng& rng,
                                 const SvdOptions& opts) {
    if (!op.symmetric()) throw InputError("randomized_svd: operator must be symmetric");
    if (rank <= 0 || rank > op.dim())
        throw DimensionError("randomized_svd: rank must be in [1, dim]");

    const Index k = std::min<Index>(rank + std::max(opts.oversample, 0), op.dim());

    Mat omega = gaussian_matrix(op.dim(), k, rng);
    Mat q = orthonormalize(op.apply_block(omega));
    for (int i = 0; i < opts.power_iters; ++i) q = orthonormalize(op.apply_block(q));

    Mat aq = op.apply_block(q);
    Mat b = q.transpose() * aq;
    b = 0.5 * (b + b.transpose());  // kill asymmetry from roundoff

    Eigen::SelfAdjointEigenSolver<Mat> eig(b);
    if (eig.info() != Eigen::Success)
        throw NumericalBreakdown("randomized_svd: small eigendecomposition failed");

    // SelfAdjointEigenSolver sorts ascending; take the top `rank` in reverse.
    TruncatedSpectrum spec;
    spec.vectors.resize(op.dim(), rank);
    spec.values.resize(rank);
    for (Index i = 0; i < rank; ++i) {
        const Index src = k - 1 - i;
        spec.values[i] = eig.eigenvalues()[src];
        spec.vectors.col(i) = q * eig.eigenvectors().col(src);
    }
    return spec;
}

}  // namespace bqpg::linalg
