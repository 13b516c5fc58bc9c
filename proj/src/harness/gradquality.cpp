#include "bqpg/harness/gradquality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "bqpg/harness/csv.hpp"

namespace bqpg::harness {

using estimators::GradientEstimate;
using linalg::Index;
using linalg::Mat;
using linalg::Vec;
using policy::SampleBatch;

void GradQualityConfig::validate() const {
    if (sample_sizes.empty()) throw ConfigError("gradquality: no sample sizes");
    if (repeats < 1) throw ConfigError("gradquality: repeats must be at least 1");
    const Index max_probe = *std::max_element(sample_sizes.begin(), sample_sizes.end());
    if (oracle_size < 10 * max_probe)
        throw ConfigError("gradquality: oracle size must be at least 10x the largest probe size");
    gae.validate();
}

namespace {

double cosine(const Vec& a, const Vec& b) {
    const double denom = a.norm() * b.norm();
    return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

struct Snapshot {
    std::unique_ptr<envs::Environment> env;
    policy::PolicyNetwork pol;
    kernels::KernelModel kernel;
    envs::CriticHead critic;
};

// Advantage targets under the shared snapshot critic.
void fill_advantages(const Snapshot& snap, SampleBatch& batch, const GradQualityConfig& cfg) {
    Mat feats = snap.kernel.state_kernel.features(batch.states);
    Mat feats_next = snap.kernel.state_kernel.features(batch.next_states);
    Vec values = snap.critic.predict(feats);
    Vec next_values = snap.critic.predict(feats_next);
    envs::gae_advantages(batch, values, next_values, cfg.gae);
    if (cfg.standardize_advantages) batch.q_values = envs::standardize(batch.q_values);
}

Snapshot prepare_snapshot(const GradQualityConfig& cfg) {
    Snapshot snap{envs::make_env(cfg.env_name, cfg.env_params),
                  policy::PolicyNetwork(1, 1),  // replaced below
                  kernels::KernelModel{kernels::DeepRBFKernel(1)},
                  envs::CriticHead(1)};

    Rng init_rng(derive_seed(cfg.seed, 0xF17));
    snap.pol = policy::PolicyNetwork(snap.env->state_dim(), snap.env->action_dim(),
                                     cfg.policy_hidden);
    snap.pol.init_default(init_rng);
    snap.kernel = kernels::KernelModel{
        kernels::DeepRBFKernel(snap.env->state_dim(), cfg.feature_hidden, cfg.feature_dim)};
    snap.kernel.state_kernel.init_default(init_rng);
    snap.kernel.c1 = cfg.c1;
    snap.kernel.c2 = cfg.c2;
    snap.kernel.sigma2 = cfg.sigma2;
    snap.kernel.grid.size = cfg.grid_size;
    snap.critic = envs::CriticHead(snap.kernel.state_kernel.feature_dim());

    // fit critic + kernel hyperparameters on their own batch
    Rng prefit_rng(derive_seed(cfg.seed, 0xF18));
    SampleBatch prefit =
        envs::collect_batch(*snap.env, snap.pol, cfg.prefit_samples, prefit_rng, cfg.gae.gamma);

    Vec zeros = Vec::Zero(prefit.size());
    Vec returns = envs::discounted_returns(prefit, zeros, cfg.gae.gamma);
    opt::AdamState critic_adam(cfg.critic_lr);
    opt::AdamState feature_adam(cfg.kernel_lr);
    for (int i = 0; i < cfg.prefit_critic_steps; ++i)
        envs::critic_update(snap.critic, snap.kernel.state_kernel, prefit.states, returns,
                            critic_adam, nullptr);

    if (cfg.prefit_kernel_steps > 0 && cfg.c1 > 0.0) {
        fill_advantages(snap, prefit, cfg);
        kernels::MllOptions mll_opts;
        mll_opts.dense_cap = cfg.mll_cap;
        mll_opts.fisher.delta = cfg.fisher_delta;
        mll_opts.fisher.damping = 0.0;
        mll_opts.fisher.cg = cfg.cg;
        opt::AdamState kernel_adam(cfg.kernel_lr);
        for (int i = 0; i < cfg.prefit_kernel_steps; ++i) {
            Rng mll_rng(derive_seed(cfg.seed, 0xF19 + static_cast<std::uint64_t>(i)));
            auto mll = kernels::gp_mll_and_grad(snap.kernel, snap.pol, prefit, mll_rng, mll_opts);
            kernels::update_kernel_params(snap.kernel, mll.grad, kernel_adam);
        }
    }
    return snap;
}

struct RepeatResult {
    Vec mc;
    Vec dbqpg;
};

}  // namespace

const GradQualityRow& GradQualityResult::row(const std::string& estimator, Index n) const {
    for (const auto& r : rows)
        if (r.estimator == estimator && r.sample_size == n) return r;
    throw ConfigError("gradquality: no row for " + estimator + " at n=" + std::to_string(n));
}

GradQualityResult grad_quality_study(const GradQualityConfig& cfg) {
    cfg.validate();
    Snapshot snap = prepare_snapshot(cfg);

    // oracle "true gradient": plain MC at the large sample size
    Rng oracle_rng(derive_seed(cfg.seed, 0x0A));
    SampleBatch oracle_batch =
        envs::collect_batch(*snap.env, snap.pol, cfg.oracle_size, oracle_rng, cfg.gae.gamma);
    fill_advantages(snap, oracle_batch, cfg);
    const Vec oracle = estimators::mc_gradient(snap.pol, oracle_batch).mean;

    kernels::FisherKernelConfig fisher;
    fisher.delta = cfg.fisher_delta;
    fisher.damping = 0.0;
    fisher.cg = cfg.cg;

    GradQualityResult result;
    result.oracle_samples = oracle_batch.size();

    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    for (Index n : cfg.sample_sizes) {
        std::vector<RepeatResult> repeats(static_cast<std::size_t>(cfg.repeats));
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= cfg.repeats) return;
                // one batch per repeat, shared by both estimators (paired design)
                auto env = snap.env->clone();
                Rng rng(derive_seed(cfg.seed, 0x1000 + 977u * static_cast<std::uint64_t>(n) +
                                                  static_cast<std::uint64_t>(r)));
                SampleBatch batch = envs::collect_batch(*env, snap.pol, n, rng, cfg.gae.gamma);
                fill_advantages(snap, batch, cfg);

                RepeatResult rr;
                rr.mc = estimators::mc_gradient(snap.pol, batch).mean;
                estimators::DbqpgOptions opts;
                opts.fisher = fisher;
                opts.cg = cfg.cg;
                rr.dbqpg = estimators::dbqpg_gradient(snap.pol, batch, snap.kernel, rng, opts).mean;
                repeats[static_cast<std::size_t>(r)] = std::move(rr);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        auto summarize = [&](const std::string& name, auto select) {
            GradQualityRow row;
            row.estimator = name;
            row.sample_size = n;
            const int R = cfg.repeats;
            Vec acc(R);
            Vec mean_est = Vec::Zero(oracle.size());
            for (int r = 0; r < R; ++r) {
                const Vec& g = select(repeats[static_cast<std::size_t>(r)]);
                acc[r] = cosine(g, oracle);
                mean_est += g;
            }
            mean_est /= static_cast<double>(R);
            row.accuracy_mean = acc.mean();
            if (R >= 2) {
                const double var = (acc.array() - row.accuracy_mean).square().sum() / (R - 1);
                row.accuracy_stderr = std::sqrt(var / R);
                double trace = 0.0;
                for (int r = 0; r < R; ++r)
                    trace += (select(repeats[static_cast<std::size_t>(r)]) - mean_est).squaredNorm();
                trace /= (R - 1);
                row.normalized_variance = trace / mean_est.squaredNorm();
            } else {
                row.degenerate = true;  // single repeat: variance is 0 by definition
            }
            result.rows.push_back(row);
        };
        summarize("mc", [](const RepeatResult& rr) -> const Vec& { return rr.mc; });
        summarize("dbqpg", [](const RepeatResult& rr) -> const Vec& { return rr.dbqpg; });
    }
    return result;
}

void write_grad_quality_csv(const GradQualityResult& result, const std::string& path) {
    CsvWriter csv(path, "bqpg.gradquality.v1",
                  {"estimator", "n", "accuracy_mean", "accuracy_stderr", "normvar", "degenerate"});
    for (const auto& row : result.rows) {
        csv.field(row.estimator)
            .field(row.sample_size)
            .field(row.accuracy_mean)
            .field(row.accuracy_stderr)
            .field(row.normalized_variance)
            .field(static_cast<long>(row.degenerate ? 1 : 0));
        csv.end_row();
    }
}

}  // namespace bqpg::harness
