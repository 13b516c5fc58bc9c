#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "bqpg/algos/train.hpp"
#include "bqpg/harness/config.hpp"
#include "bqpg/harness/gradquality.hpp"
#include "bqpg/harness/selftest.hpp"

namespace {

using bqpg::harness::Config;

std::vector<int> to_int_vector(const std::vector<long>& v) {
    return std::vector<int>(v.begin(), v.end());
}

bqpg::algos::TrainConfig train_config_from(const Config& cfg, std::uint64_t seed,
                                           const std::string& out_dir) {
    bqpg::algos::TrainConfig tc;
    tc.algorithm = bqpg::algos::algorithm_from_string(cfg.get_string("train.algorithm", "vanilla"));
    tc.estimator = bqpg::algos::estimator_from_string(cfg.get_string("train.estimator", "mc"));
    tc.iterations = static_cast<int>(cfg.get_int("train.iterations", 100));
    tc.batch_size = cfg.get_int("train.batch_size", 15000);
    tc.seed = seed;
    tc.policy_hidden = to_int_vector(cfg.get_int_list("policy.hidden", {64, 64}));
    tc.vanilla_lr = cfg.get_double("train.vanilla_lr", 7e-4);
    tc.step_size = cfg.get_double("train.step_size", 0.01);
    tc.damping = cfg.get_double("train.damping", 0.1);
    tc.cg.max_iters = static_cast<int>(cfg.get_int("cg.max_iters", 50));
    tc.cg.tol = cfg.get_double("cg.tol", 1e-10);
    tc.gae.gamma = cfg.get_double("gae.gamma", 0.995);
    tc.gae.tau = cfg.get_double("gae.tau", 0.97);
    tc.c1 = cfg.get_double("kernel.c1", 1.0);
    tc.c2 = cfg.get_double("kernel.c2", 5e-5);
    tc.sigma2 = cfg.get_double("kernel.sigma2", 1e-4);
    tc.grid_size = static_cast<int>(cfg.get_int("kernel.grid_size", 128));
    tc.feature_hidden = to_int_vector(cfg.get_int_list("kernel.feature_hidden", {64, 48}));
    tc.feature_dim = static_cast<int>(cfg.get_int("kernel.feature_dim", 10));
    tc.fisher_delta = cfg.get_int("kernel.fisher_delta", 0);
    tc.uapg_delta = cfg.get_int("uapg.delta", 100);
    tc.uapg_epsilon = cfg.get_double("uapg.epsilon", 3.0);
    tc.mll_cap = cfg.get_int("kernel.mll_cap", 1024);
    tc.kernel_lr = cfg.get_double("kernel.lr", 1e-2);
    tc.critic_lr = cfg.get_double("critic.lr", 1e-2);
    tc.env_name = cfg.get_string("env.name", "lqr");
    tc.env_params = cfg.section_doubles("env.");
    tc.env_params.erase("name");
    tc.checkpoint_every = static_cast<int>(cfg.get_int("train.checkpoint_every", 0));
    tc.collect_workers = static_cast<int>(cfg.get_int("train.collect_workers", 1));
    tc.out_dir = out_dir;
    return tc;
}

bqpg::harness::GradQualityConfig gradquality_config_from(const Config& cfg, std::uint64_t seed) {
    bqpg::harness::GradQualityConfig gq;
    gq.env_name = cfg.get_string("env.name", "lqr");
    gq.env_params = cfg.section_doubles("env.");
    gq.env_params.erase("name");
    gq.policy_hidden = to_int_vector(cfg.get_int_list("policy.hidden", {64, 64}));
    gq.feature_hidden = to_int_vector(cfg.get_int_list("kernel.feature_hidden", {64, 48}));
    gq.feature_dim = static_cast<int>(cfg.get_int("kernel.feature_dim", 10));
    auto sizes = cfg.get_int_list("gradquality.sizes", {512, 2048, 8192});
    gq.sample_sizes.assign(sizes.begin(), sizes.end());
    gq.repeats = static_cast<int>(cfg.get_int("gradquality.repeats", 25));
    gq.oracle_size = cfg.get_int("gradquality.oracle_size", 100000);
    gq.seed = seed;
    gq.workers = static_cast<int>(cfg.get_int("gradquality.workers", 0));
    gq.prefit_samples = cfg.get_int("gradquality.prefit_samples", 8192);
    gq.prefit_critic_steps = static_cast<int>(cfg.get_int("gradquality.prefit_critic_steps", 200));
    gq.prefit_kernel_steps = static_cast<int>(cfg.get_int("gradquality.prefit_kernel_steps", 25));
    gq.gae.gamma = cfg.get_double("gae.gamma", 0.995);
    gq.gae.tau = cfg.get_double("gae.tau", 0.97);
    gq.c1 = cfg.get_double("kernel.c1", 1.0);
    gq.c2 = cfg.get_double("kernel.c2", 5e-5);
    gq.sigma2 = cfg.get_double("kernel.sigma2", 1e-4);
    gq.grid_size = static_cast<int>(cfg.get_int("kernel.grid_size", 128));
    gq.damping = cfg.get_double("train.damping", 0.1);
    gq.fisher_delta = cfg.get_int("kernel.fisher_delta", 0);
    gq.cg.max_iters = static_cast<int>(cfg.get_int("cg.max_iters", 50));
    gq.cg.tol = cfg.get_double("cg.tol", 1e-10);
    gq.mll_cap = cfg.get_int("kernel.mll_cap", 1024);
    return gq;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian-quadrature policy gradient experiments"};

    std::string mode;
    std::string config_path;
    std::string out_dir = "runs/out";
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--mode", mode, "train | gradquality | selftest")->required();
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "root seed (overrides config)")->each([&](const std::string&) {
        seed_set = true;
    });

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg;
        if (!config_path.empty()) cfg = Config::parse_file(config_path);
        cfg.apply_env_overrides();
        if (!seed_set) seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));

        if (mode == "selftest") {
            bool ok = bqpg::harness::run_selftest(seed, std::cout);
            std::cout << (ok ? "selftest: all properties hold\n" : "selftest: FAILURES\n");
            return ok ? 0 : 1;
        }
        if (mode == "train") {
            auto tc = train_config_from(cfg, seed, out_dir);
            auto record = bqpg::algos::train(tc);
            if (record.incomplete) {
                std::cerr << "run incomplete: " << record.failure << "\n";
                return 2;
            }
            if (!record.iterations.empty()) {
                const auto& last = record.iterations.back();
                std::cout << "final mean discounted return: " << last.return_disc << " ("
                          << record.iterations.size() << " iterations)\n";
            }
            std::cout << "run record written to " << out_dir << "\n";
            return 0;
        }
        if (mode == "gradquality") {
            auto gq = gradquality_config_from(cfg, seed);
            auto result = bqpg::harness::grad_quality_study(gq);
            std::filesystem::create_directories(out_dir);
            const std::string csv_path = out_dir + "/gradquality.csv";
            bqpg::harness::write_grad_quality_csv(result, csv_path);
            for (const auto& row : result.rows)
                std::cout << row.estimator << " n=" << row.sample_size
                          << " accuracy=" << row.accuracy_mean << " normvar="
                          << row.normalized_variance << (row.degenerate ? " (degenerate)" : "")
                          << "\n";
            std::cout << "study written to " << csv_path << "\n";
            return 0;
        }
        std::cerr << "unknown mode '" << mode << "' (expected train, gradquality, selftest)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
