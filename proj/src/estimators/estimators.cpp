#include "bqpg/estimators/estimators.hpp"

#include <cmath>

namespace bqpg::estimators {

using linalg::CgOptions;
using linalg::LinearOperator;

const char* to_string(EstimateKind kind) {
    switch (kind) {
        case EstimateKind::mc: return "mc";
        case EstimateKind::mc_natural: return "mc_natural";
        case EstimateKind::bq_vanilla: return "bq_vanilla";
        case EstimateKind::bq_natural: return "bq_natural";
        case EstimateKind::uapg_vanilla: return "uapg_vanilla";
        case EstimateKind::uapg_natural: return "uapg_natural";
    }
    return "?";
}

GradientEstimate mc_gradient(const policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
                             SampleWeighting weighting) {
    batch.validate();
    if (batch.q_values.size() != batch.size()) throw DimensionError("mc_gradient: q_values not populated");
    Vec w = batch.q_values;
    if (weighting == SampleWeighting::discounted) w = w.cwiseProduct(batch.discount_weights);
    GradientEstimate est;
    est.kind = EstimateKind::mc;
    est.mean = pol.score_vjp(batch, w) / static_cast<double>(batch.size());
    return est;
}

GradientEstimate dbqpg_gradient(const policy::PolicyNetwork& pol,
                                const policy::SampleBatch& batch,
                                const kernels::KernelModel& kernel, Rng& rng,
                                const DbqpgOptions& opts) {
    batch.validate();
    if (batch.q_values.size() != batch.size()) throw DimensionError("dbqpg_gradient: q_values not populated");

    auto composite = kernels::composite_kernel_operator(kernel, pol, batch, opts.fisher, rng);
    auto k_op = std::make_shared<LinearOperator>(composite.composite());

    CgOptions solve = opts.cg;
    solve.shift = kernel.sigma2;
    auto alpha = linalg::cg_solve(*k_op, batch.q_values, solve);
    if (!alpha.x.allFinite())
        throw NumericalBreakdown("dbqpg_gradient: kernel solve produced non-finite result");

    GradientEstimate est;
    est.kind = EstimateKind::bq_vanilla;
    est.mean = kernel.c2 * pol.score_vjp(batch, alpha.x);
    est.diagnostics = {alpha.iterations, alpha.relative_residual, alpha.converged};

    // C = c2 G - c2^2 U (K + sigma2 I)^{-1} U^T, assembled from score products
    // and CG solves per probe; never materialized.
    const policy::PolicyNetwork* p = &pol;
    const policy::SampleBatch* b = &batch;
    const double c2 = kernel.c2;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    est.covariance_op = std::make_shared<LinearOperator>(
        pol.param_count(), true, "dbqpg_covariance",
        [p, b, k_op, solve, c2, inv_n](const Vec& v) -> Vec {
            Vec gv = inv_n * p->score_vjp(*b, p->score_jvp(*b, v));
            Vec ut_v = p->score_jvp(*b, v);
            Vec solved = linalg::cg_solve(*k_op, ut_v, solve).x;
            return c2 * gv - c2 * c2 * p->score_vjp(*b, solved);
        });
    return est;
}

Vec dbqpg_covariance_mvm(const GradientEstimate& estimate, const Vec& v) {
    if (estimate.kind != EstimateKind::bq_vanilla)
        throw InputError("dbqpg_covariance_mvm: estimate is not a bq_vanilla estimate");
    if (!estimate.covariance_op) throw InputError("dbqpg_covariance_mvm: covariance missing");
    return estimate.covariance_op->apply(v);
}

GradientEstimate natural_gradient(const policy::PolicyNetwork& pol,
                                  const policy::SampleBatch& batch,
                                  const GradientEstimate& estimate, double damping,
                                  const CgOptions& cg) {
    GradientEstimate nat = estimate;
    auto solved = policy::fisher_solve(pol, batch, estimate.mean, damping, cg);
    nat.mean = solved.x;
    nat.diagnostics = {solved.iterations, solved.relative_residual, solved.converged};
    nat.kind = estimate.kind == EstimateKind::mc ? EstimateKind::mc_natural : EstimateKind::bq_natural;
    return nat;
}

Vec apply_uapg_vanilla_transform(const linalg::TruncatedSpectrum& spectrum, const Vec& v) {
    const Index delta = spectrum.rank();
    const double nu_delta = spectrum.values[delta - 1];
    if (nu_delta <= 0.0) throw SpectrumError("uapg transform: nu_delta must be positive");
    Vec proj = spectrum.vectors.transpose() * v;
    Vec scale(delta);
    for (Index i = 0; i < delta; ++i)
        scale[i] = std::sqrt(nu_delta / spectrum.values[i]) - 1.0;
    return (v + spectrum.vectors * scale.cwiseProduct(proj)) / std::sqrt(nu_delta);
}

Vec apply_uapg_natural_transform(const linalg::TruncatedSpectrum& spectrum, const Vec& v,
                                 double epsilon) {
    if (epsilon <= 1.0) throw InputError("uapg natural transform: epsilon must exceed 1");
    const Index delta = spectrum.rank();
    const double nu_delta = spectrum.values[delta - 1];
    if (nu_delta <= 0.0) throw SpectrumError("uapg transform: nu_delta must be positive");
    Vec proj = spectrum.vectors.transpose() * v;
    Vec scale(delta);
    for (Index i = 0; i < delta; ++i)
        scale[i] = std::min(std::sqrt(spectrum.values[i] / nu_delta), epsilon) - 1.0;
    return std::sqrt(nu_delta) * (v + spectrum.vectors * scale.cwiseProduct(proj));
}

GradientEstimate uapg_vanilla(const GradientEstimate& estimate, Index delta, Rng& rng,
                              const linalg::SvdOptions& svd) {
    if (estimate.kind != EstimateKind::bq_vanilla)
        throw InputError("uapg_vanilla: requires a bq_vanilla estimate");
    if (!estimate.covariance_op) throw InputError("uapg_vanilla: covariance missing");
    if (delta < 1) throw DimensionError("uapg_vanilla: delta must be at least 1");

    GradientEstimate out = estimate;
    out.spectrum = linalg::randomized_svd(*estimate.covariance_op, delta, rng, svd);
    out.mean = apply_uapg_vanilla_transform(*out.spectrum, estimate.mean);
    out.kind = EstimateKind::uapg_vanilla;
    return out;
}

linalg::LinearOperator natural_covariance_inverse_operator(
    const policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
    const kernels::KernelModel& kernel, double damping, const CgOptions& cg) {
    kernel.validate();
    if (kernel.c2 <= 0.0) throw InputError("natural covariance: requires c2 > 0");

    auto ski = std::make_shared<kernels::SkiOperator>(
        kernels::SkiOperator::build(kernel.state_kernel, batch.states, kernel.grid));
    const double c1 = kernel.c1;
    auto state_op = std::make_shared<LinearOperator>(
        batch.size(), true, "c1*Ks",
        [ski, c1](const Vec& v) -> Vec { return c1 * ski->mvm(v); });
    CgOptions solve = cg;
    solve.shift = kernel.sigma2;

    const policy::PolicyNetwork* p = &pol;
    const policy::SampleBatch* b = &batch;
    const double c2 = kernel.c2;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    return LinearOperator(
        pol.param_count(), true, "natural_covariance_inverse",
        [p, b, state_op, solve, c2, inv_n, damping](const Vec& v) -> Vec {
            Vec gv = inv_n * p->score_vjp(*b, p->score_jvp(*b, v)) + damping * v;
            Vec solved = linalg::cg_solve(*state_op, p->score_jvp(*b, v), solve).x;
            return (gv + c2 * p->score_vjp(*b, solved)) / c2;
        });
}

GradientEstimate uapg_natural(const policy::PolicyNetwork& pol,
                              const policy::SampleBatch& batch,
                              const kernels::KernelModel& kernel,
                              const GradientEstimate& natural_estimate, Rng& rng,
                              const UapgOptions& opts, const kernels::FisherKernelConfig& fisher,
                              const CgOptions& cg) {
    if (natural_estimate.kind != EstimateKind::bq_natural)
        throw InputError("uapg_natural: requires a bq_natural estimate");
    if (opts.epsilon <= 1.0) throw InputError("uapg_natural: epsilon must exceed 1");
    if (opts.delta < 1) throw DimensionError("uapg_natural: delta must be at least 1");

    auto op = natural_covariance_inverse_operator(pol, batch, kernel, fisher.damping, cg);
    GradientEstimate out = natural_estimate;
    out.spectrum = linalg::randomized_svd(op, opts.delta, rng, opts.svd);
    out.mean = apply_uapg_natural_transform(*out.spectrum, natural_estimate.mean, opts.epsilon);
    out.kind = EstimateKind::uapg_natural;
    return out;
}

}  // namespace bqpg::estimators
