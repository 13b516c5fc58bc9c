#pragma once

#include "bqpg/linalg/linear_operator.hpp"
#include "bqpg/rng.hpp"

namespace bqpg::linalg {

/// Top-rank eigenpairs of a symmetric PSD operator: orthonormal columns and
/// non-increasing, non-negative values.
struct TruncatedSpectrum {
    Mat vectors;  // dim x rank
    Vec values;   // rank

    Index rank() const { return values.size(); }
};

struct SvdOptions {
    int oversample = 10;
    int power_iters = 2;
};

/// Randomized range finder with power iterations followed by a Rayleigh-Ritz
/// projection. With rank + oversample >= dim the subspace is exact and the
/// result matches a dense eigendecomposition up to roundoff.
TruncatedSpectrum randomized_svd(const LinearOperator& op, Index rank, Rng& rng,
                                 const SvdOptions& opts = {});

}  // namespace bqpg::linalg
