#include "bqpg/linalg/cg.hpp"

#include <cmath>

namespace bqpg::linalg {

CgResult cg_solve(const LinearOperator& op, const Vec& rhs, const CgOptions& opts) {
    if (!op.symmetric()) throw InputError("cg_solve: operator must be symmetric");
    if (rhs.size() != op.dim()) throw DimensionError("cg_solve: rhs length != op.dim");
    if (opts.shift < 0.0 || opts.damping < 0.0)
        throw InputError("cg_solve: shift and damping must be non-negative");

    const double sigma = opts.shift + opts.damping;
    auto apply = [&](const Vec& v) -> Vec { return op.apply(v) + sigma * v; };

    CgResult res;
    res.x = Vec::Zero(rhs.size());
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        res.converged = true;
        return res;
    }

    Vec r = rhs;  // r = b - A*0
    Vec p = r;
    double rs_old = r.squaredNorm();

    for (int it = 0; it < opts.max_iters; ++it) {
        Vec ap = apply(p);
        const double p_ap = p.dot(ap);
        if (!std::isfinite(p_ap))
            throw NumericalBreakdown("cg_solve: non-finite curvature at iteration " + std::to_string(it));
        if (p_ap <= 0.0)
            throw NumericalBreakdown("cg_solve: operator not positive definite (p'Ap = " + std::to_string(p_ap) + ")");
        const double alpha = rs_old / p_ap;
        res.x += alpha * p;
        r -= alpha * ap;
        const double rs_new = r.squaredNorm();
        if (!std::isfinite(rs_new)) throw NumericalBreakdown("cg_solve: non-finite residual");
        res.iterations = it + 1;
        res.relative_residual = std::sqrt(rs_new) / rhs_norm;
        if (res.relative_residual <= opts.tol) {
            res.converged = true;
            return res;
        }
        p = r + (rs_new / rs_old) * p;
        rs_old = rs_new;
    }
    return res;  // best iterate after max_iters; caller reads the residual report
}

}  // namespace bqpg::linalg
