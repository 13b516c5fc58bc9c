#pragma once

#include <string>
#include <vector>

#include "bqpg/envs/critic.hpp"
#include "bqpg/envs/environment.hpp"
#include "bqpg/envs/gae.hpp"
#include "bqpg/envs/rollout.hpp"
#include "bqpg/estimators/estimators.hpp"

namespace bqpg::algos {

using estimators::Vec;

enum class Algorithm { vanilla, npg, trpo };
enum class Estimator { mc, dbqpg, uapg };

Algorithm algorithm_from_string(const std::string& s);
Estimator estimator_from_string(const std::string& s);
const char* to_string(Algorithm a);
const char* to_string(Estimator e);

struct TrainConfig {
    Algorithm algorithm = Algorithm::vanilla;
    Estimator estimator = Estimator::mc;
    int iterations = 100;
    Eigen::Index batch_size = 15000;
    std::uint64_t seed = 0;

    // policy / steps
    std::vector<int> policy_hidden = {64, 64};
    double vanilla_lr = 7e-4;
    double step_size = 0.01;  // trust-region radius for npg/trpo
    double damping = 0.1;
    linalg::CgOptions cg;  // max 50 iterations, tol 1e-10

    // estimator
    envs::GAEConfig gae;
    bool standardize_advantages = true;
    double c1 = 1.0;
    double c2 = 5e-5;
    double sigma2 = 1e-4;
    int grid_size = 128;
    std::vector<int> feature_hidden = {64, 48};
    int feature_dim = 10;
    Eigen::Index fisher_delta = 0;  // 0 -> min(|theta|, 512, n)
    Eigen::Index uapg_delta = 100;
    double uapg_epsilon = 3.0;
    Eigen::Index mll_cap = 1024;
    double kernel_lr = 1e-2;
    double critic_lr = 1e-2;

    // environment
    std::string env_name = "lqr";
    envs::EnvParams env_params;

    // output
    std::string out_dir;         // empty: no files written
    int checkpoint_every = 0;    // 0: off
    int collect_workers = 1;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    Eigen::Index samples = 0;
    Eigen::Index episodes = 0;
    double return_disc = 0.0;
    double return_undisc = 0.0;
    double grad_norm = 0.0;
    double step_scale = 0.0;
    double kl = 0.0;
    int cg_iterations = 0;
    double cg_residual = 0.0;
    double mll = 0.0;
    double critic_loss = 0.0;
    double nu_top = 0.0;
    double nu_delta = 0.0;
    int accepted = 1;
};

struct RunRecord {
    std::vector<IterationRecord> iterations;
    bool incomplete = false;
    std::string failure;
    Vec final_theta;
    Vec initial_theta;
};

/// One adaptive-moment ascent step along the estimate mean. Returns false
/// (and leaves the policy untouched) when the update is non-finite.
bool vanilla_step(policy::PolicyNetwork& pol, const Vec& gradient, opt::AdamState& adam);

struct KlStepResult {
    bool accepted = false;
    double step_scale = 0.0;
    double kl = 0.0;
    int backtracks = 0;
};

/// theta' = theta + sqrt(2 radius / d'(G + damping I)d) * d.
KlStepResult npg_step(policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
                      const Vec& direction, double damping, double radius,
                      const linalg::CgOptions& cg = {});

/// Backtracking line search (factor 0.5, <= 10 tries) on the npg step:
/// accepts the first scale with surrogate improvement >= 0 and mean sampled
/// KL <= radius; otherwise restores theta.
KlStepResult trpo_step(policy::PolicyNetwork& pol, const policy::SampleBatch& batch,
                       const Vec& direction, double damping, double radius,
                       const linalg::CgOptions& cg = {});

/// Surrogate objective mean(exp(logpi - logpi_behavior) * Q) for the batch.
double surrogate_objective(const policy::PolicyNetwork& pol, const policy::SampleBatch& batch);

RunRecord train(const TrainConfig& config);

/// CSV + JSON-sidecar emission for a finished run (schema bqpg.train.v1).
void write_run_record(const RunRecord& record, const TrainConfig& config,
                      const std::string& out_dir);

}  // namespace bqpg::algos
