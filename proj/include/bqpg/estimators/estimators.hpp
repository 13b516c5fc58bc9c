#pragma once

#include <memory>
#include <optional>

#include "bqpg/kernels/gp_mll.hpp"
#include "bqpg/kernels/kernel_model.hpp"

namespace bqpg::estimators {

using linalg::Index;
using linalg::Mat;
using linalg::Vec;

enum class EstimateKind { mc, mc_natural, bq_vanilla, bq_natural, uapg_vanilla, uapg_natural };

const char* to_string(EstimateKind kind);

struct EstimateDiagnostics {
    int cg_iterations = 0;
    double cg_residual = 0.0;
    bool cg_converged = true;
};

/// A policy-gradient estimate: the mean direction, and (for the quadrature
/// estimators) a lazy covariance operator plus the truncated spectrum once a
/// transform has been applied. The covariance operator references the policy,
/// batch and kernel it was built from; keep those alive while using it.
struct GradientEstimate {
    Vec mean;
    std::shared_ptr<linalg::LinearOperator> covariance_op;
    std::optional<linalg::TruncatedSpectrum> spectrum;
    EstimateKind kind = EstimateKind::mc;
    EstimateDiagnostics diagnostics;
};

enum class SampleWeighting { uniform, discounted };

/// (1/n) U Q, one reverse sweep. The discounted mode weights each sample by
/// its stored gamma^t before averaging.
GradientEstimate mc_gradient(const policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
                             SampleWeighting weighting = SampleWeighting::uniform);

struct DbqpgOptions {
    kernels::FisherKernelConfig fisher;
    linalg::CgOptions cg;  // kernel solves; the sigma2 shift is supplied internally
};

/// Quadrature posterior mean c2 U (K + sigma2 I)^{-1} Q with the lazy
/// covariance c2 G - c2^2 U (K + sigma2 I)^{-1} U^T.
GradientEstimate dbqpg_gradient(const policy::PolicyNetwork& pol,
                                const policy::SampleBatch& batch,
                                const kernels::KernelModel& kernel, Rng& rng,
                                const DbqpgOptions& opts = {});

Vec dbqpg_covariance_mvm(const GradientEstimate& estimate, const Vec& v);

/// Preconditions the mean by (G + damping I)^{-1}.
GradientEstimate natural_gradient(const policy::PolicyNetwork& pol,
                                  const policy::SampleBatch& batch,
                                  const GradientEstimate& estimate, double damping,
                                  const linalg::CgOptions& cg = {});

/// Spectrum transforms; split out so the clipping arithmetic is testable on
/// constructed spectra. Vanilla rescales to uniform uncertainty,
///   nu_delta^{-1/2} (I + sum h_i (sqrt(nu_delta/nu_i) - 1) h_i h_i^T) v,
/// natural amplifies the confident directions with the ratio clipped at eps,
///   nu_delta^{1/2} (I + sum h_i (min(sqrt(nu_i/nu_delta), eps) - 1) h_i h_i^T) v.
Vec apply_uapg_vanilla_transform(const linalg::TruncatedSpectrum& spectrum, const Vec& v);
Vec apply_uapg_natural_transform(const linalg::TruncatedSpectrum& spectrum, const Vec& v,
                                 double epsilon);

struct UapgOptions {
    Index delta = 100;
    double epsilon = 3.0;  // > 1; natural transform clip
    linalg::SvdOptions svd;
};

/// Uncertainty-normalized vanilla update from the rank-delta spectrum of the
/// estimate's covariance operator.
GradientEstimate uapg_vanilla(const GradientEstimate& estimate, Index delta, Rng& rng,
                              const linalg::SvdOptions& svd = {});

/// Uncertainty-aware natural update: diagonalizes
///   (C^NBQ)^{-1} = (1/c2) (G + damping I + c2 U (c1 K_s + sigma2 I)^{-1} U^T)
/// and applies the clipped transform to the natural mean.
GradientEstimate uapg_natural(const policy::PolicyNetwork& pol,
                              const policy::SampleBatch& batch,
                              const kernels::KernelModel& kernel,
                              const GradientEstimate& natural_estimate, Rng& rng,
                              const UapgOptions& opts = {},
                              const kernels::FisherKernelConfig& fisher = {},
                              const linalg::CgOptions& cg = {});

/// The operator uapg_natural diagonalizes, exposed for oracle comparison.
linalg::LinearOperator natural_covariance_inverse_operator(
    const policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
    const kernels::KernelModel& kernel, double damping, const linalg::CgOptions& cg = {});

}  // namespace bqpg::estimators
