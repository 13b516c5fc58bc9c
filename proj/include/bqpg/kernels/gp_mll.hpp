#pragma once

#include "bqpg/kernels/kernel_model.hpp"
#include "bqpg/opt/adam.hpp"

namespace bqpg::kernels {

struct MllOptions {
    linalg::Index dense_cap = 1024;  // subsample above this
    bool include_fisher_term = true; // c2 K_f enters K as a constant additive term
    FisherKernelConfig fisher;
};

struct MllResult {
    double mll = 0.0;  // -(log|K + sigma2 I| + Q^T (K + sigma2 I)^{-1} Q) / n
    Vec grad;          // w.r.t. state-kernel params (feature net, log scales)
    linalg::Index used_samples = 0;
    double jittered_sigma2 = 0.0;  // sigma2 actually used after escalation
};

/// Dense GP marginal-likelihood objective and its exact gradient on a
/// (possibly subsampled) minibatch. Cholesky failures escalate the noise
/// term tenfold up to three times before giving up.
MllResult gp_mll_and_grad(const KernelModel& model, const policy::PolicyNetwork& pol,
                          const policy::SampleBatch& batch, Rng& rng, const MllOptions& opts = {});

/// One ascent step on the MLL; lengthscales and signal scale move in log
/// space so they stay positive.
void update_kernel_params(KernelModel& model, const Vec& grad, opt::AdamState& adam);

}  // namespace bqpg::kernels
