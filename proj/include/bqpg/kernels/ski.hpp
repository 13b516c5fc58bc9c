#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bqpg/kernels/deep_rbf.hpp"
#include "bqpg/linalg/linear_operator.hpp"
#include "bqpg/linalg/toeplitz.hpp"

namespace bqpg::kernels {

/// SKI grid request: evenly spaced points per feature dimension. Bounds, when
/// given, describe the data interval the grid must cover; the builder always
/// adds a three-cell margin so the cubic stencil stays interior, and expands
/// the interval when the batch falls outside it.
struct SkiGrid {
    int size = 128;
    std::vector<std::pair<double, double>> bounds;  // optional, per dimension
};

/// W K_m W^T per feature dimension, summed. K_m is Toeplitz (stationary RBF
/// on an even grid); W holds local cubic interpolation weights, four per row,
/// each row summing to one. Dimensions whose features collapse to a point
/// contribute a constant signal_scale * 1 1^T instead.
class SkiOperator {
public:
    static SkiOperator build(const DeepRBFKernel& kernel, const Mat& states, const SkiGrid& grid);
    /// Same, from precomputed features (n x feature_dim rows).
    static SkiOperator build_from_features(const DeepRBFKernel& kernel, const Mat& features,
                                           const SkiGrid& grid);

    linalg::Index dim() const { return n_; }
    linalg::Vec mvm(const linalg::Vec& v) const;
    linalg::LinearOperator as_operator() const;

    struct DimensionData {
        bool degenerate = false;
        double grid_origin = 0.0;
        double grid_step = 0.0;
        std::optional<linalg::ToeplitzSpec> grid_gram;
        Eigen::Matrix<int, Eigen::Dynamic, 4> stencil;  // n x 4 grid indices
        Mat weights;                                    // n x 4
    };
    const std::vector<DimensionData>& dimensions() const { return dims_; }
    int grid_size() const { return m_; }
    double signal_scale() const { return signal_scale_; }

private:
    linalg::Index n_ = 0;
    int m_ = 0;
    double signal_scale_ = 1.0;
    std::vector<DimensionData> dims_;
};

}  // namespace bqpg::kernels
