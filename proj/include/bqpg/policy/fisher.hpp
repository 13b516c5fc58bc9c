#pragma once

#include "bqpg/linalg/cg.hpp"
#include "bqpg/linalg/linear_operator.hpp"
#include "bqpg/policy/policy_network.hpp"

namespace bqpg::policy {

/// Empirical Fisher information G = (1/n) U U^T as a matrix-free operator:
/// one forward-mode and one reverse-mode sweep per MVM.
linalg::LinearOperator fisher_operator(const PolicyNetwork& policy, const SampleBatch& batch);

Vec fisher_mvm(const PolicyNetwork& policy, const SampleBatch& batch, const Vec& v);

/// CG solution of (G + damping*I) x = v. The empirical Fisher is rank
/// deficient whenever n < |theta|, so damping > 0 is required there.
linalg::CgResult fisher_solve(const PolicyNetwork& policy, const SampleBatch& batch, const Vec& v,
                              double damping, const linalg::CgOptions& cg = {});

}  // namespace bqpg::policy
