#include "bqpg/policy/fisher.hpp"

namespace bqpg::policy {

linalg::LinearOperator fisher_operator(const PolicyNetwork& policy, const SampleBatch& batch) {
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const PolicyNetwork* p = &policy;
    const SampleBatch* b = &batch;
    linalg::LinearOperator op(policy.param_count(), true, "fisher",
                              [p, b, inv_n](const Vec& v) -> Vec {
                                  return inv_n * p->score_vjp(*b, p->score_jvp(*b, v));
                              });
    op.set_block_mvm([p, b, inv_n](const Mat& block) -> Mat {
        return inv_n * p->score_vjp_multi(*b, p->score_jvp_multi(*b, block));
    });
    return op;
}

Vec fisher_mvm(const PolicyNetwork& policy, const SampleBatch& batch, const Vec& v) {
    if (v.size() != policy.param_count()) throw DimensionError("fisher_mvm: length mismatch");
    return policy.score_vjp(batch, policy.score_jvp(batch, v)) / static_cast<double>(batch.size());
}

linalg::CgResult fisher_solve(const PolicyNetwork& policy, const SampleBatch& batch, const Vec& v,
                              double damping, const linalg::CgOptions& cg) {
    linalg::CgOptions opts = cg;
    opts.damping = damping;
    return linalg::cg_solve(fisher_operator(policy, batch), v, opts);
}

}  // namespace bqpg::policy
