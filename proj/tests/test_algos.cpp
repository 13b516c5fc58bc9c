#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bqpg/algos/train.hpp"
#include "bqpg/io/checkpoint.hpp"
#include "oracles.hpp"

using namespace bqpg;
using algos::TrainConfig;
using linalg::Index;
using linalg::Mat;
using linalg::Vec;
using policy::PolicyNetwork;
using policy::SampleBatch;

namespace {

TrainConfig smoke_config() {
    TrainConfig cfg;
    cfg.env_name = "lqr";
    cfg.env_params["horizon"] = 20;
    cfg.policy_hidden = {8, 8};
    cfg.feature_hidden = {8};
    cfg.feature_dim = 4;
    cfg.grid_size = 32;
    cfg.batch_size = 256;
    cfg.iterations = 3;
    cfg.gae.gamma = 0.98;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("vanilla_step: zero gradient leaves theta unchanged") {
    Rng rng(101);
    PolicyNetwork pol(2, 1, {4});
    pol.init_default(rng);
    Vec before = pol.get_theta();
    opt::AdamState adam(1e-3);
    CHECK(algos::vanilla_step(pol, Vec::Zero(pol.param_count()), adam));
    CHECK((pol.get_theta() - before).norm() == 0.0);
}

TEST_CASE("vanilla_step: constant gradient converges to a sign-like update") {
    Rng rng(102);
    PolicyNetwork pol(2, 1, {4});
    pol.init_default(rng);
    Vec g = gaussian_vector(pol.param_count(), rng);
    opt::AdamState adam(1e-3);
    Vec prev = pol.get_theta();
    Vec update;
    for (int i = 0; i < 2000; ++i) {
        algos::vanilla_step(pol, g, adam);
        update = pol.get_theta() - prev;
        prev = pol.get_theta();
    }
    // adaptive-moment fixed point for constant g: update -> lr * sign(g)
    for (Index i = 0; i < g.size(); ++i)
        CHECK(update[i] == doctest::Approx(1e-3 * (g[i] > 0 ? 1.0 : -1.0)).epsilon(1e-3));
}

TEST_CASE("vanilla_step: rejects non-finite gradients") {
    Rng rng(103);
    PolicyNetwork pol(2, 1, {4});
    pol.init_default(rng);
    Vec before = pol.get_theta();
    opt::AdamState adam(1e-3);
    Vec g = Vec::Constant(pol.param_count(), std::numeric_limits<double>::quiet_NaN());
    CHECK(!algos::vanilla_step(pol, g, adam));
    CHECK((pol.get_theta() - before).norm() == 0.0);
}

TEST_CASE("vanilla_step: identical calls from identical state are deterministic") {
    Rng rng(104);
    PolicyNetwork a(2, 1, {4});
    a.init_default(rng);
    PolicyNetwork b = a;
    Vec g = gaussian_vector(a.param_count(), rng);
    opt::AdamState adam_a(1e-3), adam_b(1e-3);
    algos::vanilla_step(a, g, adam_a);
    algos::vanilla_step(b, g, adam_b);
    CHECK((a.get_theta() - b.get_theta()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("npg_step: zero direction is a no-op") {
    Rng rng(105);
    PolicyNetwork pol(2, 1, {4});
    pol.init_default(rng);
    SampleBatch batch = oracles::synthetic_batch(pol, 20, rng);
    Vec before = pol.get_theta();
    auto res = algos::npg_step(pol, batch, Vec::Zero(pol.param_count()), 0.1, 0.01);
    CHECK(res.accepted);
    CHECK(res.step_scale == 0.0);
    CHECK((pol.get_theta() - before).norm() == 0.0);
}

TEST_CASE("npg_step: KL-budget scaling matches the dense quadratic form") {
    Rng rng(106);
    PolicyNetwork pol(2, 1, {4});
    pol.init_default(rng);
    SampleBatch batch = oracles::synthetic_batch(pol, 30, rng);
    Vec d = gaussian_vector(pol.param_count(), rng);
    const double damping = 0.1, radius = 0.01;

    Mat u = oracles::dense_score_matrix(pol, batch);
    Mat g = u * u.transpose() / 30.0 +
            damping * Mat::Identity(pol.param_count(), pol.param_count());
    const double quad = d.dot(g * d);
    const double want_scale = std::sqrt(2.0 * radius / quad);

    Vec before = pol.get_theta();
    auto res = algos::npg_step(pol, batch, d, damping, radius);
    CHECK(res.accepted);
    CHECK(oracles::rel_err(res.step_scale, want_scale) < 1e-6);
    CHECK(oracles::rel_err(Vec(pol.get_theta() - before), Vec(want_scale * d)) < 1e-6);
}

TEST_CASE("npg_step: measured KL is near the budget on small steps") {
    Rng rng(107);
    PolicyNetwork pol(3, 2, {8});
    pol.init_default(rng);
    // on-policy batch: sample actions from the policy itself
    const Index n = 4000;
    SampleBatch batch;
    batch.states = gaussian_matrix(n, 3, rng);
    batch.actions.resize(n, 2);
    for (Index i = 0; i < n; ++i)
        batch.actions.row(i) = pol.sample_action(batch.states.row(i), rng).transpose();
    batch.next_states = batch.states;
    batch.rewards = Vec::Zero(n);
    batch.logprobs_behavior = pol.log_probs(batch.states, batch.actions);
    batch.q_values = gaussian_vector(n, rng);
    batch.discount_weights = Vec::Ones(n);
    batch.terminal.assign(static_cast<std::size_t>(n), 0);
    batch.terminal.back() = 1;
    batch.episode_starts = {0};

    Vec d = gaussian_vector(pol.param_count(), rng);
    const double radius = 1e-4;  // quadratic model regime
    auto res = algos::npg_step(pol, batch, d, 1e-4, radius);
    CHECK(res.accepted);
    CHECK(res.kl <= 1.3 * radius);
    CHECK(res.kl >= 0.7 * radius);
}

TEST_CASE("trpo_step: zero direction no-op; adversarial direction backtracks to no-op") {
    Rng rng(108);
    PolicyNetwork pol(2, 1, {6});
    pol.init_default(rng);
    SampleBatch batch = oracles::synthetic_batch(pol, 50, rng);
    Vec before = pol.get_theta();

    auto zero = algos::trpo_step(pol, batch, Vec::Zero(pol.param_count()), 0.1, 0.01);
    CHECK(zero.accepted);
    CHECK((pol.get_theta() - before).norm() == 0.0);

    // direction opposite the surrogate gradient: improvement < 0 at any scale
    Vec surr_grad = estimators::mc_gradient(pol, batch).mean;
    auto bad = algos::trpo_step(pol, batch, Vec(-surr_grad), 0.1, 0.01);
    CHECK(!bad.accepted);
    CHECK((pol.get_theta() - before).norm() == 0.0);
    CHECK(bad.backtracks == 10);
}

TEST_CASE("trpo_step: accepts an improving direction and never lowers the surrogate") {
    Rng rng(109);
    PolicyNetwork pol(2, 2, {6});
    pol.init_default(rng);
    SampleBatch batch = oracles::synthetic_batch(pol, 60, rng);
    const double base = algos::surrogate_objective(pol, batch);
    Vec d = estimators::mc_gradient(pol, batch).mean;
    auto res = algos::trpo_step(pol, batch, d, 0.1, 0.01);
    CHECK(res.accepted);
    CHECK(res.backtracks <= 2);
    CHECK(algos::surrogate_objective(pol, batch) >= base);
    CHECK(res.kl <= 0.01 + 1e-12);
}

TEST_CASE("train: zero iterations returns the initial policy and an empty record") {
    TrainConfig cfg = smoke_config();
    cfg.iterations = 0;
    auto record = algos::train(cfg);
    CHECK(record.iterations.empty());
    CHECK(!record.incomplete);
    CHECK(record.final_theta.size() > 0);
    CHECK((record.final_theta - record.initial_theta).norm() == 0.0);
}

TEST_CASE("train: fixed seed reproduces the record bit-for-bit") {
    TrainConfig cfg = smoke_config();
    auto a = algos::train(cfg);
    auto b = algos::train(cfg);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].return_disc == b.iterations[i].return_disc);
        CHECK(a.iterations[i].grad_norm == b.iterations[i].grad_norm);
        CHECK(a.iterations[i].kl == b.iterations[i].kl);
    }
    CHECK((a.final_theta - b.final_theta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("train: dbqpg and npg smoke iterations complete") {
    TrainConfig cfg = smoke_config();
    cfg.estimator = algos::Estimator::dbqpg;
    cfg.iterations = 2;
    auto rec = algos::train(cfg);
    CHECK(!rec.incomplete);
    CHECK(rec.iterations.size() == 2);

    cfg.algorithm = algos::Algorithm::npg;
    cfg.estimator = algos::Estimator::mc;
    auto rec2 = algos::train(cfg);
    CHECK(!rec2.incomplete);
    CHECK(rec2.iterations.back().accepted == 1);

    cfg.algorithm = algos::Algorithm::trpo;
    cfg.estimator = algos::Estimator::uapg;
    cfg.uapg_delta = 16;
    auto rec3 = algos::train(cfg);
    CHECK(!rec3.incomplete);
}

TEST_CASE("train: run record CSV is byte-identical across reruns") {
    namespace fs = std::filesystem;
    TrainConfig cfg = smoke_config();
    cfg.iterations = 2;
    auto read_file = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    cfg.out_dir = (fs::temp_directory_path() / "bqpg_test_run_a").string();
    algos::train(cfg);
    std::string a = read_file(cfg.out_dir + "/train.csv");
    cfg.out_dir = (fs::temp_directory_path() / "bqpg_test_run_b").string();
    algos::train(cfg);
    std::string b = read_file(cfg.out_dir + "/train.csv");
    CHECK(a.size() > 0);
    CHECK(a == b);
    fs::remove_all(fs::temp_directory_path() / "bqpg_test_run_a");
    fs::remove_all(fs::temp_directory_path() / "bqpg_test_run_b");
}

TEST_CASE("checkpoint: policy and kernel round-trip") {
    namespace fs = std::filesystem;
    Rng rng(110);
    PolicyNetwork pol(3, 2, {8, 8});
    pol.init_default(rng);
    const std::string dir = (fs::temp_directory_path() / "bqpg_ckpt_test").string();
    fs::create_directories(dir);

    io::save_policy(pol, dir + "/p.ckpt");
    auto loaded = io::load_policy(dir + "/p.ckpt");
    CHECK(loaded.state_dim() == 3);
    CHECK(loaded.action_dim() == 2);
    CHECK((loaded.get_theta() - pol.get_theta()).lpNorm<Eigen::Infinity>() == 0.0);

    kernels::KernelModel model{kernels::DeepRBFKernel(3, {6}, 4)};
    model.state_kernel.init_default(rng);
    model.c2 = 1e-3;
    model.grid.size = 48;
    io::save_kernel(model, dir + "/k.ckpt");
    auto k = io::load_kernel(dir + "/k.ckpt");
    CHECK(k.c2 == 1e-3);
    CHECK(k.grid.size == 48);
    CHECK((k.state_kernel.get_params() - model.state_kernel.get_params()).lpNorm<Eigen::Infinity>() ==
          0.0);

    CHECK_THROWS_AS(io::load_kernel(dir + "/p.ckpt"), ConfigError);
    CHECK_THROWS_AS(io::load_policy(dir + "/nonexistent.ckpt"), ConfigError);
    fs::remove_all(dir);
}
