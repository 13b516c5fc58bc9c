#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqpg/algos/train.hpp"

namespace bqpg::harness {

/// Accuracy / normalized-variance study over sample sizes: for each probe
/// size and estimator, R independent estimates are compared against a large
/// MC oracle gradient from the same policy snapshot.
struct GradQualityConfig {
    std::string env_name = "lqr";
    envs::EnvParams env_params;
    std::vector<int> policy_hidden = {64, 64};
    std::vector<int> feature_hidden = {64, 48};
    int feature_dim = 10;

    std::vector<Eigen::Index> sample_sizes = {512, 2048, 8192};
    int repeats = 25;
    Eigen::Index oracle_size = 100000;   // must be >= 10x the largest probe
    std::uint64_t seed = 0;
    int workers = 0;                      // 0: hardware concurrency

    // snapshot preparation: critic + kernel fitted on a separate batch so the
    // state kernel carries information before it is judged
    Eigen::Index prefit_samples = 8192;
    int prefit_critic_steps = 200;
    int prefit_kernel_steps = 25;

    envs::GAEConfig gae;
    bool standardize_advantages = true;
    double c1 = 1.0;
    double c2 = 5e-5;
    double sigma2 = 1e-4;
    int grid_size = 128;
    double damping = 0.1;
    Eigen::Index fisher_delta = 0;
    linalg::CgOptions cg{2000, 1e-10, 0.0, 0.0};  // plain CG: no preconditioner, so a
                                                  // deeper cap than the train default
    Eigen::Index mll_cap = 1024;
    double kernel_lr = 1e-2;
    double critic_lr = 1e-2;

    void validate() const;
};

struct GradQualityRow {
    std::string estimator;
    Eigen::Index sample_size = 0;
    double accuracy_mean = 0.0;
    double accuracy_stderr = 0.0;
    double normalized_variance = 0.0;
    bool degenerate = false;  // repeats < 2: variance undefined, reported as 0
};

struct GradQualityResult {
    std::vector<GradQualityRow> rows;
    Eigen::Index oracle_samples = 0;

    const GradQualityRow& row(const std::string& estimator, Eigen::Index n) const;
};

GradQualityResult grad_quality_study(const GradQualityConfig& config);

void write_grad_quality_csv(const GradQualityResult& result, const std::string& path);

}  // namespace bqpg::harness
