#pragma once

#include "bqpg/linalg/linear_operator.hpp"

namespace bqpg::linalg {

struct CgOptions {
    int max_iters = 50;
    double tol = 1e-10;     // relative residual target
    double shift = 0.0;     // solves (A + shift*I + damping*I) x = b
    double damping = 0.0;
};

struct CgResult {
    Vec x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Conjugate gradients on a symmetric (positive definite after shift+damping)
/// operator. Returns the best iterate with a residual report when the
/// iteration cap is hit; throws NumericalBreakdown on non-finite iterates.
CgResult cg_solve(const LinearOperator& op, const Vec& rhs, const CgOptions& opts = {});

}  // namespace bqpg::linalg
