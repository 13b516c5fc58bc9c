#include "bqpg/kernels/fisher_kernel.hpp"

#include <algorithm>

namespace bqpg::kernels {

using linalg::Index;
using linalg::LinearOperator;
using linalg::Mat;
using linalg::Vec;

Index default_fisher_delta(Index param_count, Index batch_size) {
    return std::min<Index>({param_count, 512, batch_size});
}

LinearOperator fisher_kernel_operator(const policy::PolicyNetwork& pol,
                                      const policy::SampleBatch& batch,
                                      const FisherKernelConfig& config, Rng& rng) {
    const Index n = batch.size();
    const policy::PolicyNetwork* p = &pol;
    const policy::SampleBatch* b = &batch;

    if (config.route == FisherKernelRoute::jacobian_products) {
        const double damping = config.damping;
        const linalg::CgOptions cg = config.cg;
        return LinearOperator(n, true, "fisher_kernel(jp)", [p, b, damping, cg](const Vec& v) -> Vec {
            Vec uw = p->score_vjp(*b, v);
            Vec solved = policy::fisher_solve(*p, *b, uw, damping, cg).x;
            return p->score_jvp(*b, solved);
        });
    }

    // truncated_svd route: eigendecompose U^T U through score products, then
    // apply the damped spectral weights. Precomputation happens here, once.
    Index delta = config.delta > 0 ? config.delta : default_fisher_delta(pol.param_count(), n);
    delta = std::min(delta, n);

    LinearOperator utu(n, true, "UtU", [p, b](const Vec& v) -> Vec {
        return p->score_jvp(*b, p->score_vjp(*b, v));
    });
    utu.set_block_mvm([p, b](const Mat& block) -> Mat {
        return p->score_jvp_multi(*b, p->score_vjp_multi(*b, block));
    });

    auto spectrum = std::make_shared<linalg::TruncatedSpectrum>(
        linalg::randomized_svd(utu, delta, rng, config.svd));

    // sigma_i^2 -> sigma_i^2 / (sigma_i^2 / n + damping); equals n at damping 0
    auto weights = std::make_shared<Vec>(delta);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Index i = 0; i < delta; ++i) {
        const double s2 = std::max(spectrum->values[i], 0.0);
        const double denom = s2 * inv_n + config.damping;
        (*weights)[i] = denom > 0.0 ? s2 / denom : 0.0;
    }

    LinearOperator op(n, true, "fisher_kernel(svd)", [spectrum, weights](const Vec& v) -> Vec {
        Vec proj = spectrum->vectors.transpose() * v;
        return spectrum->vectors * weights->cwiseProduct(proj);
    });
    op.set_block_mvm([spectrum, weights](const Mat& block) -> Mat {
        Mat proj = spectrum->vectors.transpose() * block;
        return spectrum->vectors * weights->asDiagonal() * proj;
    });
    return op;
}

}  // namespace bqpg::kernels
