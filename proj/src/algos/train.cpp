#include "bqpg/algos/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bqpg/harness/csv.hpp"
#include "bqpg/io/checkpoint.hpp"

#include <json.hpp>

namespace bqpg::algos {

using estimators::EstimateKind;
using estimators::GradientEstimate;
using linalg::Index;
using linalg::Mat;
using policy::SampleBatch;

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "vanilla") return Algorithm::vanilla;
    if (s == "npg") return Algorithm::npg;
    if (s == "trpo") return Algorithm::trpo;
    throw ConfigError("unknown algorithm '" + s + "'");
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "mc") return Estimator::mc;
    if (s == "dbqpg") return Estimator::dbqpg;
    if (s == "uapg") return Estimator::uapg;
    throw ConfigError("unknown estimator '" + s + "'");
}

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::vanilla: return "vanilla";
        case Algorithm::npg: return "npg";
        case Algorithm::trpo: return "trpo";
    }
    return "?";
}

const char* to_string(Estimator e) {
    switch (e) {
        case Estimator::mc: return "mc";
        case Estimator::dbqpg: return "dbqpg";
        case Estimator::uapg: return "uapg";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (iterations < 0) throw ConfigError("train: iterations must be non-negative");
    if (batch_size <= 0) throw ConfigError("train: batch_size must be positive");
    if (step_size <= 0.0) throw ConfigError("train: step_size must be positive");
    gae.validate();
}

bool vanilla_step(policy::PolicyNetwork& pol, const Vec& gradient, opt::AdamState& adam) {
    if (!gradient.allFinite()) return false;
    Vec update = adam.step(gradient);
    if (!update.allFinite()) return false;
    pol.set_theta(pol.get_theta() + update);
    return true;
}

namespace {

// d'(G + damping I)d and the KL-budget scale sqrt(2 radius / quad)
double kl_quadratic_form(policy::PolicyNetwork& pol, const SampleBatch& batch,
                         const Vec& direction, double damping) {
    Vec gd = policy::fisher_mvm(pol, batch, direction);
    return direction.dot(gd) + damping * direction.squaredNorm();
}

}  // namespace

KlStepResult npg_step(policy::PolicyNetwork& pol, const SampleBatch& batch,
                      const Vec& direction, double damping, double radius,
                      const linalg::CgOptions&) {
    KlStepResult res;
    if (direction.size() != pol.param_count()) throw DimensionError("npg_step: direction length");
    if (direction.norm() == 0.0) {
        res.accepted = true;  // zero direction: no-op by definition
        return res;
    }
    const double quad = kl_quadratic_form(pol, batch, direction, damping);
    if (!(quad > 0.0) || !std::isfinite(quad)) return res;
    res.step_scale = std::sqrt(2.0 * radius / quad);
    Vec theta_new = pol.get_theta() + res.step_scale * direction;
    if (!theta_new.allFinite()) return res;

    policy::PolicyNetwork old = pol;
    pol.set_theta(theta_new);
    res.kl = pol.mean_kl_from(old, batch.states);
    res.accepted = true;
    return res;
}

double surrogate_objective(const policy::PolicyNetwork& pol, const SampleBatch& batch) {
    Vec lp = pol.log_probs(batch.states, batch.actions);
    Vec ratio = (lp - batch.logprobs_behavior).array().exp();
    return ratio.dot(batch.q_values) / static_cast<double>(batch.size());
}

KlStepResult trpo_step(policy::PolicyNetwork& pol, const SampleBatch& batch,
                       const Vec& direction, double damping, double radius,
                       const linalg::CgOptions&) {
    KlStepResult res;
    if (direction.size() != pol.param_count()) throw DimensionError("trpo_step: direction length");
    if (direction.norm() == 0.0) {
        res.accepted = true;
        return res;
    }
    const double quad = kl_quadratic_form(pol, batch, direction, damping);
    if (!(quad > 0.0) || !std::isfinite(quad)) return res;

    const double full_scale = std::sqrt(2.0 * radius / quad);
    const Vec theta_old = pol.get_theta();
    policy::PolicyNetwork old = pol;
    const double base = surrogate_objective(pol, batch);

    double scale = full_scale;
    for (int bt = 0; bt < 10; ++bt, scale *= 0.5) {
        Vec theta_new = theta_old + scale * direction;
        if (!theta_new.allFinite()) continue;
        pol.set_theta(theta_new);
        const double improvement = surrogate_objective(pol, batch) - base;
        const double kl = pol.mean_kl_from(old, batch.states);
        if (improvement >= 0.0 && kl <= radius && std::isfinite(kl)) {
            res.accepted = true;
            res.step_scale = scale;
            res.kl = kl;
            res.backtracks = bt;
            return res;
        }
        res.backtracks = bt + 1;
    }
    pol.set_theta(theta_old);  // no acceptable step: explicit no-op
    return res;
}

namespace {

struct TrainState {
    std::unique_ptr<envs::Environment> env;
    policy::PolicyNetwork pol;
    kernels::KernelModel kernel;
    envs::CriticHead critic;
    opt::AdamState policy_adam;
    opt::AdamState kernel_adam;
    opt::AdamState critic_adam;
};

}  // namespace

RunRecord train(const TrainConfig& config) {
    config.validate();
    auto env = envs::make_env(config.env_name, config.env_params);

    Rng init_rng(derive_seed(config.seed, 0xA11CE));
    policy::PolicyNetwork pol(env->state_dim(), env->action_dim(), config.policy_hidden);
    pol.init_default(init_rng);

    kernels::KernelModel kernel{
        kernels::DeepRBFKernel(env->state_dim(), config.feature_hidden, config.feature_dim)};
    kernel.state_kernel.init_default(init_rng);
    kernel.c1 = config.c1;
    kernel.c2 = config.c2;
    kernel.sigma2 = config.sigma2;
    kernel.grid.size = config.grid_size;

    envs::CriticHead critic(kernel.state_kernel.feature_dim());
    opt::AdamState policy_adam(config.vanilla_lr);
    opt::AdamState kernel_adam(config.kernel_lr);
    opt::AdamState critic_adam(config.critic_lr);

    kernels::FisherKernelConfig fisher;
    fisher.delta = config.fisher_delta;
    fisher.damping = 0.0;  // svd route: exact pseudo-inverse form; config.damping is for G solves
    fisher.cg = config.cg;

    const bool uses_kernel = config.estimator != Estimator::mc;

    RunRecord record;
    record.initial_theta = pol.get_theta();

    for (int it = 0; it < config.iterations; ++it) {
        IterationRecord row;
        row.iteration = it;
        try {
            SampleBatch batch = envs::collect_batch_parallel(
                *env, pol, config.batch_size, derive_seed(config.seed, 8ull * it + 1),
                config.gae.gamma, config.collect_workers);

            auto returns = envs::summarize_returns(batch, config.gae.gamma);
            row.samples = batch.size();
            row.episodes = returns.episodes;
            row.return_disc = returns.mean_discounted;
            row.return_undisc = returns.mean_undiscounted;

            Mat feats = kernel.state_kernel.features(batch.states);
            Mat feats_next = kernel.state_kernel.features(batch.next_states);
            Vec values = critic.predict(feats);
            Vec next_values = critic.predict(feats_next);
            Vec adv = envs::gae_advantages(batch, values, next_values, config.gae);
            Vec targets = adv + values;
            if (config.standardize_advantages) batch.q_values = envs::standardize(adv);

            // kernel + critic learning on the shared feature extractor
            envs::CriticGrads cg_grads =
                critic_gradients(critic, kernel.state_kernel, batch.states, targets);
            row.critic_loss = cg_grads.loss;
            Vec kernel_ascent = -cg_grads.feature_net_grad;
            if (uses_kernel && kernel.c1 > 0.0) {
                Rng mll_rng(derive_seed(config.seed, 8ull * it + 2));
                kernels::MllOptions mll_opts;
                mll_opts.dense_cap = config.mll_cap;
                mll_opts.fisher = fisher;
                auto mll = kernels::gp_mll_and_grad(kernel, pol, batch, mll_rng, mll_opts);
                row.mll = mll.mll;
                kernel_ascent += mll.grad;
            }
            kernels::update_kernel_params(kernel, kernel_ascent, kernel_adam);
            Vec head_step = critic_adam.step(cg_grads.head_grad);
            critic.weights -= head_step.head(critic.weights.size());
            critic.bias -= head_step[critic.weights.size()];

            // gradient estimation
            GradientEstimate estimate;
            if (config.estimator == Estimator::mc) {
                estimate = estimators::mc_gradient(pol, batch);
            } else {
                Rng est_rng(derive_seed(config.seed, 8ull * it + 3));
                estimators::DbqpgOptions opts;
                opts.fisher = fisher;
                opts.cg = config.cg;
                estimate = estimators::dbqpg_gradient(pol, batch, kernel, est_rng, opts);
            }
            row.cg_iterations = estimate.diagnostics.cg_iterations;
            row.cg_residual = estimate.diagnostics.cg_residual;

            // direction selection + step
            if (config.algorithm == Algorithm::vanilla) {
                Vec direction = estimate.mean;
                if (config.estimator == Estimator::uapg) {
                    Rng svd_rng(derive_seed(config.seed, 8ull * it + 4));
                    Index delta = std::min<Index>(config.uapg_delta, pol.param_count());
                    auto transformed = estimators::uapg_vanilla(estimate, delta, svd_rng);
                    direction = transformed.mean;
                    row.nu_top = transformed.spectrum->values[0];
                    row.nu_delta = transformed.spectrum->values[transformed.spectrum->rank() - 1];
                }
                row.grad_norm = direction.norm();
                row.accepted = vanilla_step(pol, direction, policy_adam) ? 1 : 0;
                row.step_scale = config.vanilla_lr;
            } else {
                auto natural = estimators::natural_gradient(pol, batch, estimate, config.damping,
                                                            config.cg);
                Vec direction = natural.mean;
                if (config.estimator == Estimator::uapg) {
                    Rng svd_rng(derive_seed(config.seed, 8ull * it + 4));
                    estimators::UapgOptions uopts;
                    uopts.delta = std::min<Index>(config.uapg_delta, pol.param_count());
                    uopts.epsilon = config.uapg_epsilon;
                    auto transformed =
                        estimators::uapg_natural(pol, batch, kernel, natural, svd_rng, uopts,
                                                 fisher, config.cg);
                    direction = transformed.mean;
                    row.nu_top = transformed.spectrum->values[0];
                    row.nu_delta = transformed.spectrum->values[transformed.spectrum->rank() - 1];
                }
                row.grad_norm = direction.norm();
                KlStepResult step =
                    config.algorithm == Algorithm::npg
                        ? npg_step(pol, batch, direction, config.damping, config.step_size, config.cg)
                        : trpo_step(pol, batch, direction, config.damping, config.step_size, config.cg);
                row.accepted = step.accepted ? 1 : 0;
                row.step_scale = step.step_scale;
                row.kl = step.kl;
            }
        } catch (const std::exception& e) {
            record.incomplete = true;
            record.failure = e.what();
            record.iterations.push_back(row);
            break;
        }
        record.iterations.push_back(row);

        if (config.checkpoint_every > 0 && !config.out_dir.empty() &&
            (it + 1) % config.checkpoint_every == 0) {
            std::filesystem::create_directories(config.out_dir);
            io::save_policy(pol, config.out_dir + "/policy_" + std::to_string(it + 1) + ".ckpt");
            io::save_kernel(kernel, config.out_dir + "/kernel_" + std::to_string(it + 1) + ".ckpt");
        }
    }

    record.final_theta = pol.get_theta();
    if (!config.out_dir.empty()) write_run_record(record, config, config.out_dir);
    return record;
}

void write_run_record(const RunRecord& record, const TrainConfig& config,
                      const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    harness::CsvWriter csv(out_dir + "/train.csv", "bqpg.train.v1",
                           {"iteration", "samples", "episodes", "return_disc", "return_undisc",
                            "grad_norm", "step_scale", "kl", "cg_iterations", "cg_residual",
                            "mll", "critic_loss", "nu_top", "nu_delta", "accepted"});
    for (const auto& row : record.iterations) {
        csv.field(row.iteration)
            .field(row.samples)
            .field(row.episodes)
            .field(row.return_disc)
            .field(row.return_undisc)
            .field(row.grad_norm)
            .field(row.step_scale)
            .field(row.kl)
            .field(static_cast<long>(row.cg_iterations))
            .field(row.cg_residual)
            .field(row.mll)
            .field(row.critic_loss)
            .field(row.nu_top)
            .field(row.nu_delta)
            .field(static_cast<long>(row.accepted));
        csv.end_row();
    }

    nlohmann::json j;
    j["algorithm"] = to_string(config.algorithm);
    j["estimator"] = to_string(config.estimator);
    j["iterations"] = config.iterations;
    j["batch_size"] = static_cast<long>(config.batch_size);
    j["seed"] = config.seed;
    j["env"] = config.env_name;
    for (const auto& [k, v] : config.env_params) j["env_params"][k] = v;
    j["gamma"] = config.gae.gamma;
    j["tau"] = config.gae.tau;
    j["c1"] = config.c1;
    j["c2"] = config.c2;
    j["sigma2"] = config.sigma2;
    j["grid_size"] = config.grid_size;
    j["damping"] = config.damping;
    j["step_size"] = config.step_size;
    j["vanilla_lr"] = config.vanilla_lr;
    j["policy_hidden"] = config.policy_hidden;
    j["feature_hidden"] = config.feature_hidden;
    j["feature_dim"] = config.feature_dim;
    j["incomplete"] = record.incomplete;
    if (record.incomplete) j["failure"] = record.failure;
    std::ofstream sidecar(out_dir + "/config.json");
    sidecar << j.dump(2) << "\n";
}

}  // namespace bqpg::algos
