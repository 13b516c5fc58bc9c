#include "bqpg/kernels/ski.hpp"

#include <cmath>

namespace bqpg::kernels {

using linalg::Index;
using linalg::LinearOperator;
using linalg::ToeplitzSpec;

namespace {

// Keys cubic convolution weights (a = -1/2) for the stencil {j-1, j, j+1, j+2}
// at fractional offset u in [0, 1]. They sum to one identically.
inline void cubic_weights(double u, double* w) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    w[0] = -0.5 * u + u2 - 0.5 * u3;
    w[1] = 1.0 - 2.5 * u2 + 1.5 * u3;
    w[2] = 0.5 * u + 2.0 * u2 - 1.5 * u3;
    w[3] = -0.5 * u2 + 0.5 * u3;
}

}  // namespace

SkiOperator SkiOperator::build(const DeepRBFKernel& kernel, const Mat& states, const SkiGrid& grid) {
    return build_from_features(kernel, kernel.features(states), grid);
}

SkiOperator SkiOperator::build_from_features(const DeepRBFKernel& kernel, const Mat& features,
                                             const SkiGrid& grid) {
    if (grid.size < 8) throw InputError("SkiOperator: grid size must be at least 8");
    if (features.cols() != kernel.feature_dim())
        throw DimensionError("SkiOperator: feature width mismatch");
    if (!grid.bounds.empty() && static_cast<int>(grid.bounds.size()) != kernel.feature_dim())
        throw DimensionError("SkiOperator: bounds count != feature dims");

    SkiOperator op;
    op.n_ = features.rows();
    op.m_ = grid.size;
    op.signal_scale_ = kernel.signal_scale();
    const Vec ls = kernel.lengthscales();
    const int m = grid.size;

    for (int d = 0; d < kernel.feature_dim(); ++d) {
        DimensionData dd;
        double lo = features.col(d).minCoeff();
        double hi = features.col(d).maxCoeff();
        if (!grid.bounds.empty()) {
            lo = std::min(lo, grid.bounds[static_cast<std::size_t>(d)].first);
            hi = std::max(hi, grid.bounds[static_cast<std::size_t>(d)].second);
        }
        const double span = hi - lo;
        if (span < 1e-300) {
            // all features equal: k_d(s_i, s_j) = signal_scale for every pair
            dd.degenerate = true;
            op.dims_.push_back(std::move(dd));
            continue;
        }

        const double h = span / static_cast<double>(m - 7);
        dd.grid_step = h;
        dd.grid_origin = lo - 3.0 * h;

        Vec first_col(m);
        const double inv2l2 = 0.5 / (ls[d] * ls[d]);
        for (int k = 0; k < m; ++k) {
            const double r = static_cast<double>(k) * h;
            first_col[k] = op.signal_scale_ * std::exp(-r * r * inv2l2);
        }
        dd.grid_gram.emplace(std::move(first_col));

        dd.stencil.resize(op.n_, 4);
        dd.weights.resize(op.n_, 4);
        for (Index i = 0; i < op.n_; ++i) {
            const double t = (features(i, d) - dd.grid_origin) / h;
            int j = static_cast<int>(std::floor(t));
            j = std::min(std::max(j, 1), m - 3);  // data interval keeps this interior
            const double u = t - static_cast<double>(j);
            double w[4];
            cubic_weights(u, w);
            for (int k = 0; k < 4; ++k) {
                dd.stencil(i, k) = j - 1 + k;
                dd.weights(i, k) = w[k];
            }
        }
        op.dims_.push_back(std::move(dd));
    }
    return op;
}

linalg::Vec SkiOperator::mvm(const linalg::Vec& v) const {
    if (v.size() != n_) throw DimensionError("SkiOperator::mvm: length mismatch");
    linalg::Vec out = linalg::Vec::Zero(n_);
    for (const DimensionData& dd : dims_) {
        if (dd.degenerate) {
            out.array() += signal_scale_ * v.sum();
            continue;
        }
        linalg::Vec s = linalg::Vec::Zero(m_);
        for (Index i = 0; i < n_; ++i)
            for (int k = 0; k < 4; ++k) s[dd.stencil(i, k)] += dd.weights(i, k) * v[i];
        linalg::Vec t = dd.grid_gram->mvm(s);
        for (Index i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += dd.weights(i, k) * t[dd.stencil(i, k)];
            out[i] += acc;
        }
    }
    return out;
}

LinearOperator SkiOperator::as_operator() const {
    auto self = std::make_shared<SkiOperator>(*this);
    return LinearOperator(n_, true, "ski",
                          [self](const linalg::Vec& v) -> linalg::Vec { return self->mvm(v); });
}

}  // namespace bqpg::kernels
