#include "bqpg/harness/selftest.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

#include <Eigen/Dense>

#include "bqpg/estimators/estimators.hpp"

namespace bqpg::harness {

using estimators::GradientEstimate;
using linalg::Index;
using linalg::LinearOperator;
using linalg::Mat;
using linalg::Vec;
using policy::PolicyNetwork;
using policy::SampleBatch;

namespace {

Mat random_spd(Index n, Rng& rng, double shift = 0.5) {
    Mat a = gaussian_matrix(n, n, rng);
    return a * a.transpose() / static_cast<double>(n) + shift * Mat::Identity(n, n);
}

SampleBatch synthetic_batch(const PolicyNetwork& pol, Index n, Rng& rng) {
    SampleBatch b;
    b.states = gaussian_matrix(n, pol.state_dim(), rng);
    b.actions = gaussian_matrix(n, pol.action_dim(), rng);
    b.next_states = gaussian_matrix(n, pol.state_dim(), rng);
    b.rewards = gaussian_vector(n, rng);
    b.logprobs_behavior = pol.log_probs(b.states, b.actions);
    b.q_values = gaussian_vector(n, rng);
    b.discount_weights = Vec::Ones(n);
    b.terminal.assign(static_cast<std::size_t>(n), 0);
    b.terminal.back() = 1;
    b.episode_starts = {0};
    return b;
}

Mat dense_score_matrix(const PolicyNetwork& pol, const SampleBatch& batch) {
    Mat u(pol.param_count(), batch.size());
    for (Index i = 0; i < batch.size(); ++i)
        u.col(i) = pol.score_vector(batch.states.row(i), batch.actions.row(i));
    return u;
}

}  // namespace

bool run_selftest(std::uint64_t seed, std::ostream& out) {
    bool all_ok = true;

    auto report = [&](const char* name, bool ok, double value, double gate) {
        out << (ok ? "[PASS] " : "[FAIL] ") << name << "  (value " << value << ", gate " << gate
            << ")\n";
        all_ok = all_ok && ok;
    };

    {  // conjugate gradients against a dense factorization
        Rng rng(derive_seed(seed, 1));
        Mat a = random_spd(60, rng);
        Vec rhs = gaussian_vector(60, rng);
        auto op = LinearOperator::dense(a, true);
        linalg::CgOptions opts;
        opts.max_iters = 200;
        Vec x = linalg::cg_solve(op, rhs, opts).x;
        Vec ref = a.ldlt().solve(rhs);
        double err = (x - ref).norm() / ref.norm();
        report("cg matches dense solve", err <= 1e-6, err, 1e-6);
    }

    {  // FFT Toeplitz MVM against the materialized matrix
        Rng rng(derive_seed(seed, 2));
        const Index m = 96;
        Vec col = gaussian_vector(m, rng);
        Vec v = gaussian_vector(m, rng);
        linalg::ToeplitzSpec spec(col);
        Mat dense(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) dense(i, j) = col[std::abs(i - j)];
        double err = (spec.mvm(v) - dense * v).lpNorm<Eigen::Infinity>();
        report("toeplitz mvm matches dense", err <= 1e-10, err, 1e-10);
    }

    {  // randomized svd against a dense eigendecomposition
        Rng rng(derive_seed(seed, 3));
        const Index n = 80;
        Mat q = Eigen::HouseholderQR<Mat>(gaussian_matrix(n, n, rng)).householderQ();
        Vec evals(n);
        for (Index i = 0; i < n; ++i) evals[i] = std::pow(1.7, -static_cast<double>(i));
        Mat a = q * evals.asDiagonal() * q.transpose();
        auto op = LinearOperator::dense(a, true);
        auto spec = linalg::randomized_svd(op, 10, rng);
        double worst = 0.0;
        for (Index i = 0; i < 10; ++i)
            worst = std::max(worst, std::abs(spec.values[i] - evals[i]) / evals[i]);
        report("randomized svd matches dense eigenvalues", worst <= 1e-3, worst, 1e-3);
    }

    PolicyNetwork pol(3, 2, {4, 4});
    {
        Rng rng(derive_seed(seed, 4));
        pol.init_default(rng);
    }

    {  // vjp/jvp adjointness
        Rng rng(derive_seed(seed, 5));
        SampleBatch batch = synthetic_batch(pol, 24, rng);
        Vec w = gaussian_vector(24, rng);
        Vec v = gaussian_vector(pol.param_count(), rng);
        double lhs = pol.score_vjp(batch, w).dot(v);
        double rhs = w.dot(pol.score_jvp(batch, v));
        double err = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-12);
        report("score vjp/jvp adjoint", err <= 1e-8, err, 1e-8);
    }

    {  // score vector against central finite differences
        Rng rng(derive_seed(seed, 6));
        Vec s = gaussian_vector(3, rng);
        Vec a = gaussian_vector(2, rng);
        Vec score = pol.score_vector(s, a);
        Vec theta = pol.get_theta();
        PolicyNetwork probe = pol;
        const double h = 1e-5;
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            std::uniform_int_distribution<Index> pick(0, theta.size() - 1);
            Index i = pick(rng);
            Vec tp = theta, tm = theta;
            tp[i] += h;
            tm[i] -= h;
            probe.set_theta(tp);
            double fp = probe.log_prob(s, a);
            probe.set_theta(tm);
            double fm = probe.log_prob(s, a);
            double fd = (fp - fm) / (2 * h);
            worst = std::max(worst, std::abs(fd - score[i]) / std::max(std::abs(fd), 1e-8));
        }
        report("score matches finite differences", worst <= 1e-4, worst, 1e-4);
    }

    {  // the two Fisher-kernel routes agree
        Rng rng(derive_seed(seed, 7));
        SampleBatch batch = synthetic_batch(pol, 30, rng);
        kernels::FisherKernelConfig cfg;
        cfg.damping = 0.1;
        cfg.cg.max_iters = 200;
        cfg.route = kernels::FisherKernelRoute::jacobian_products;
        auto via_jp = kernels::fisher_kernel_operator(pol, batch, cfg, rng);
        cfg.route = kernels::FisherKernelRoute::truncated_svd;
        cfg.delta = pol.param_count();
        auto via_svd = kernels::fisher_kernel_operator(pol, batch, cfg, rng);
        Vec v = gaussian_vector(30, rng);
        Vec a = via_jp.apply(v);
        Vec b = via_svd.apply(v);
        double err = (a - b).norm() / b.norm();
        report("fisher kernel routes agree", err <= 1e-3, err, 1e-3);
    }

    {  // SKI Gram against the dense Gram
        Rng rng(derive_seed(seed, 8));
        kernels::DeepRBFKernel kernel(2, {}, 2);  // identity features
        kernel.init_default(rng);
        Mat states = gaussian_matrix(80, 2, rng);
        kernels::SkiGrid grid;
        grid.size = 64;
        auto ski = kernels::SkiOperator::build(kernel, states, grid);
        Mat approx = linalg::dense_materialize(ski.as_operator());
        Mat exact = kernel.gram(states);
        double err = (approx - exact).norm() / exact.norm();
        report("ski gram within 2% of dense", err <= 0.02, err, 0.02);
    }

    {  // c1 = 0 degenerates to MC direction with the closed-form scale
        Rng rng(derive_seed(seed, 9));
        PolicyNetwork tiny(2, 1, {1, 1});
        tiny.init_default(rng);
        const Index n = 20;
        SampleBatch batch = synthetic_batch(tiny, n, rng);
        kernels::KernelModel kernel{kernels::DeepRBFKernel(2, {}, 2)};
        kernel.c1 = 0.0;
        kernel.c2 = 5e-5;
        kernel.sigma2 = 1e-4;
        kernel.grid.size = 16;
        estimators::DbqpgOptions opts;
        opts.fisher.damping = 0.0;  // n > |theta|: empirical Fisher is full rank
        opts.fisher.delta = tiny.param_count();
        opts.cg.max_iters = 200;
        auto bq = estimators::dbqpg_gradient(tiny, batch, kernel, rng, opts);
        auto mc = estimators::mc_gradient(tiny, batch);
        double cos_err = std::abs(1.0 - bq.mean.dot(mc.mean) / (bq.mean.norm() * mc.mean.norm()));
        double expected_ratio = kernel.c2 * n / (kernel.sigma2 + kernel.c2 * n);
        double ratio_err = std::abs(bq.mean.norm() / mc.mean.norm() - expected_ratio) / expected_ratio;
        report("c1=0 reduces to mc direction", cos_err <= 1e-10, cos_err, 1e-10);
        report("c1=0 magnitude ratio", ratio_err <= 1e-8, ratio_err, 1e-8);
    }

    {  // full-rank UAPG whitening: transformed covariance is the identity
        Rng rng(derive_seed(seed, 10));
        PolicyNetwork tiny(2, 1, {1, 1});
        tiny.init_default(rng);
        SampleBatch batch = synthetic_batch(tiny, 25, rng);
        kernels::KernelModel kernel{kernels::DeepRBFKernel(2, {}, 2)};
        kernel.grid.size = 16;
        estimators::DbqpgOptions opts;
        opts.fisher.damping = 0.0;
        opts.fisher.delta = tiny.param_count();
        opts.cg.max_iters = 400;
        opts.cg.tol = 1e-14;
        auto bq = estimators::dbqpg_gradient(tiny, batch, kernel, rng, opts);
        auto uapg = estimators::uapg_vanilla(bq, tiny.param_count(), rng);
        Mat cov = linalg::dense_materialize(*bq.covariance_op);
        const auto& spec = *uapg.spectrum;
        Mat transform = Mat::Zero(cov.rows(), cov.cols());
        for (Index i = 0; i < spec.rank(); ++i)
            transform += spec.vectors.col(i) * spec.vectors.col(i).transpose() /
                         std::sqrt(spec.values[i]);
        Mat white = transform * cov * transform;
        double err = (white - Mat::Identity(cov.rows(), cov.cols())).norm();
        report("uapg whitening yields identity covariance", err <= 1e-4, err, 1e-4);
    }

    {  // c2 = 0 kills both posterior moments
        Rng rng(derive_seed(seed, 11));
        PolicyNetwork tiny(2, 1, {1, 1});
        tiny.init_default(rng);
        SampleBatch batch = synthetic_batch(tiny, 15, rng);
        kernels::KernelModel kernel{kernels::DeepRBFKernel(2, {}, 2)};
        kernel.c2 = 0.0;
        kernel.grid.size = 16;
        estimators::DbqpgOptions opts;
        opts.fisher.delta = tiny.param_count();
        auto bq = estimators::dbqpg_gradient(tiny, batch, kernel, rng, opts);
        Vec probe = gaussian_vector(tiny.param_count(), rng);
        double worst = std::max(bq.mean.lpNorm<Eigen::Infinity>(),
                                bq.covariance_op->apply(probe).lpNorm<Eigen::Infinity>());
        report("c2=0 zeroes mean and covariance", worst == 0.0, worst, 0.0);
    }

    return all_ok;
}

}  // namespace bqpg::harness
