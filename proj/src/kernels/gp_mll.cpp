#include "bqpg/kernels/gp_mll.hpp"

#include <numeric>

#include <Eigen/Dense>

namespace bqpg::kernels {

using linalg::Index;
using linalg::Mat;
using linalg::Vec;

namespace {

std::vector<Index> subsample_indices(Index n, Index cap, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (n <= cap) return idx;
    for (Index i = 0; i < cap; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(cap));
    return idx;
}

}  // namespace

MllResult gp_mll_and_grad(const KernelModel& model, const policy::PolicyNetwork& pol,
                          const policy::SampleBatch& batch, Rng& rng, const MllOptions& opts) {
    model.validate();
    if (batch.q_values.size() != batch.size()) throw InputError("gp_mll_and_grad: q_values not populated");

    const auto idx = subsample_indices(batch.size(), opts.dense_cap, rng);
    const Index n = static_cast<Index>(idx.size());

    policy::SampleBatch sub;
    sub.states.resize(n, batch.states.cols());
    sub.actions.resize(n, batch.actions.cols());
    Vec q(n);
    for (Index i = 0; i < n; ++i) {
        sub.states.row(i) = batch.states.row(idx[static_cast<std::size_t>(i)]);
        sub.actions.row(i) = batch.actions.row(idx[static_cast<std::size_t>(i)]);
        q[i] = batch.q_values[idx[static_cast<std::size_t>(i)]];
    }

    Mat k = model.c1 * model.state_kernel.gram(sub.states);
    if (opts.include_fisher_term && model.c2 > 0.0) {
        // K_f depends on theta, not phi: a constant term in this objective.
        sub.next_states = sub.states;
        sub.rewards = Vec::Zero(n);
        sub.logprobs_behavior = Vec::Zero(n);
        sub.q_values = q;
        sub.discount_weights = Vec::Ones(n);
        sub.terminal.assign(static_cast<std::size_t>(n), 0);
        sub.episode_starts = {0};
        auto kf = fisher_kernel_operator(pol, sub, opts.fisher, rng);
        k += model.c2 * linalg::dense_materialize(kf, n);
    }

    double sigma2 = model.sigma2;
    Eigen::LLT<Mat> llt;
    for (int attempt = 0;; ++attempt) {
        Mat a = k + sigma2 * Mat::Identity(n, n);
        llt.compute(a);
        if (llt.info() == Eigen::Success) break;
        if (attempt >= 3) throw NumericalBreakdown("gp_mll_and_grad: factorization failed after jitter escalation");
        sigma2 *= 10.0;
    }

    Vec alpha = llt.solve(q);
    Mat a_inv = llt.solve(Mat::Identity(n, n));
    Mat chol_l = llt.matrixL();
    const double logdet = 2.0 * chol_l.diagonal().array().log().sum();

    MllResult res;
    res.used_samples = n;
    res.jittered_sigma2 = sigma2;
    res.mll = -(logdet + q.dot(alpha)) / static_cast<double>(n);

    // dJ/dK = -(A^{-1} - alpha alpha^T)/n; only c1 K_s depends on phi.
    Mat kbar = (alpha * alpha.transpose() - a_inv) * (model.c1 / static_cast<double>(n));
    res.grad = model.state_kernel.gram_backward(sub.states, kbar);
    return res;
}

void update_kernel_params(KernelModel& model, const Vec& grad, opt::AdamState& adam) {
    if (grad.size() != model.state_kernel.param_count())
        throw DimensionError("update_kernel_params: gradient length mismatch");
    Vec params = model.state_kernel.get_params();
    params += adam.step(grad);
    model.state_kernel.set_params(params);
}

}  // namespace bqpg::kernels
