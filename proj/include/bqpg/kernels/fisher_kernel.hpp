#pragma once

#include <cstdint>

#include "bqpg/linalg/cg.hpp"
#include "bqpg/linalg/randomized_svd.hpp"
#include "bqpg/policy/fisher.hpp"

namespace bqpg::kernels {

enum class FisherKernelRoute {
    jacobian_products,  // vJp -> damped Fisher CG solve -> Jvp per MVM
    truncated_svd,      // precomputed right singular factors of U
};

struct FisherKernelConfig {
    FisherKernelRoute route = FisherKernelRoute::truncated_svd;
    linalg::Index delta = 0;  // 0 -> min(|theta|, 512, n)
    // Regularizer on G inside the kernel. Zero gives the pseudo-inverse form
    // K_f = n R R^T; the jacobian_products route needs it positive whenever
    // n < |theta| because its inner CG works on the empirical G directly.
    double damping = 0.0;
    linalg::CgOptions cg;  // inner solves for the jacobian_products route
    linalg::SvdOptions svd;
};

/// K_f = U^T (G + damping I)^{-1} U as an n x n symmetric PSD operator.
/// The truncated-SVD route diagonalizes U^T U once and applies the damped
/// spectral weights sigma_i^2 / (sigma_i^2 / n + damping); with damping 0 this
/// is exactly n R R^T. The operator keeps references to the policy and batch.
linalg::LinearOperator fisher_kernel_operator(const policy::PolicyNetwork& pol,
                                              const policy::SampleBatch& batch,
                                              const FisherKernelConfig& config, Rng& rng);

linalg::Index default_fisher_delta(linalg::Index param_count, linalg::Index batch_size);

}  // namespace bqpg::kernels
