#pragma once

#include "bqpg/kernels/deep_rbf.hpp"
#include "bqpg/kernels/fisher_kernel.hpp"
#include "bqpg/kernels/ski.hpp"

namespace bqpg::kernels {

/// The GP prior over action values: k = c1 k_s + c2 k_f with noise sigma2.
/// Defaults follow the tuned regime (c1 = 1, c2 = 5e-5, sigma2 = 1e-4,
/// grid size 128, additive per-dimension structure).
struct KernelModel {
    double c1 = 1.0;
    double c2 = 5e-5;
    double sigma2 = 1e-4;
    DeepRBFKernel state_kernel;
    SkiGrid grid;

    explicit KernelModel(DeepRBFKernel kernel) : state_kernel(std::move(kernel)) {}

    void validate() const {
        if (c1 < 0.0 || c2 < 0.0) throw InputError("KernelModel: c1, c2 must be non-negative");
        if (sigma2 <= 0.0) throw InputError("KernelModel: sigma2 must be positive");
    }
};

/// Both kernel pieces built against one batch. `ski` approximates K_s;
/// `fisher` is K_f under the configured route. composite() is
/// v -> c1 K_s v + c2 K_f v (noise shift applied by the solver, not here).
struct CompositeKernel {
    SkiOperator ski;
    linalg::LinearOperator fisher;
    double c1 = 1.0;
    double c2 = 0.0;

    linalg::LinearOperator composite() const {
        return linalg::LinearOperator::weighted_sum(c1, ski.as_operator(), c2, fisher);
    }
    linalg::LinearOperator state_only() const { return ski.as_operator(); }
};

CompositeKernel composite_kernel_operator(const KernelModel& model,
                                          const policy::PolicyNetwork& pol,
                                          const policy::SampleBatch& batch,
                                          const FisherKernelConfig& fisher_config, Rng& rng);

}  // namespace bqpg::kernels
