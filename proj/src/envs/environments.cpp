#include "bqpg/envs/environment.hpp"

#include <cmath>
#include <numbers>

namespace bqpg::envs {

namespace {

double get_param(const EnvParams& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

class LqrEnv final : public Environment {
public:
    explicit LqrEnv(LqrSpec spec) : spec_(spec) {
        if (spec_.dim <= 0 || spec_.horizon <= 0) throw ConfigError("lqr: dim and horizon must be positive");
    }

    std::string name() const override { return "lqr"; }
    int state_dim() const override { return spec_.dim; }
    int action_dim() const override { return spec_.dim; }
    int horizon() const override { return spec_.horizon; }
    double reward_bound() const override {
        const double s2 = spec_.state_cap * spec_.state_cap * spec_.dim;
        return spec_.q_cost * 4.0 * s2 + spec_.r_cost * 4.0 * s2;  // coarse declared bound
    }

    Vec reset(Rng& rng) const override {
        std::uniform_real_distribution<double> u(-spec_.init_scale, spec_.init_scale);
        Vec s(spec_.dim);
        for (int i = 0; i < spec_.dim; ++i) s[i] = u(rng);
        return s;
    }

    Step step(const Vec& state, const Vec& action, Rng& rng) const override {
        Step out;
        out.reward = -(spec_.q_cost * state.squaredNorm() + spec_.r_cost * action.squaredNorm());
        out.next_state = spec_.a_scale * state + spec_.b_scale * action;
        if (spec_.noise_std > 0.0) out.next_state += spec_.noise_std * gaussian_vector(spec_.dim, rng);
        out.terminal = out.next_state.lpNorm<Eigen::Infinity>() > spec_.state_cap;
        return out;
    }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<LqrEnv>(spec_); }

    const LqrSpec& spec() const { return spec_; }

private:
    LqrSpec spec_;
};

class PointmassEnv final : public Environment {
public:
    PointmassEnv(double dt, double action_cost, double init_scale, int horizon)
        : dt_(dt), action_cost_(action_cost), init_scale_(init_scale), horizon_(horizon) {}

    std::string name() const override { return "pointmass"; }
    int state_dim() const override { return 2; }
    int action_dim() const override { return 2; }
    int horizon() const override { return horizon_; }
    double reward_bound() const override { return 1e6; }

    Vec reset(Rng& rng) const override {
        std::uniform_real_distribution<double> u(-init_scale_, init_scale_);
        Vec s(2);
        s[0] = u(rng);
        s[1] = u(rng);
        return s;
    }

    Step step(const Vec& state, const Vec& action, Rng&) const override {
        Step out;
        out.reward = -(state.squaredNorm() + action_cost_ * action.squaredNorm());
        out.next_state = state + dt_ * action;
        out.terminal = false;
        return out;
    }

    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PointmassEnv>(dt_, action_cost_, init_scale_, horizon_);
    }

private:
    double dt_;
    double action_cost_;
    double init_scale_;
    int horizon_;
};

class PendulumEnv final : public Environment {
public:
    PendulumEnv(double dt, double gravity, double mass, double length, double max_torque,
                double max_speed, int horizon)
        : dt_(dt), g_(gravity), m_(mass), l_(length), max_torque_(max_torque),
          max_speed_(max_speed), horizon_(horizon) {}

    std::string name() const override { return "pendulum"; }
    int state_dim() const override { return 2; }  // (theta, theta_dot), theta = 0 upright
    int action_dim() const override { return 1; }
    int horizon() const override { return horizon_; }
    double reward_bound() const override {
        const double pi = std::numbers::pi;
        return pi * pi + 0.1 * max_speed_ * max_speed_ + 0.001 * max_torque_ * max_torque_ + 1.0;
    }

    Vec reset(Rng& rng) const override {
        std::uniform_real_distribution<double> ua(-std::numbers::pi, std::numbers::pi);
        std::uniform_real_distribution<double> uv(-1.0, 1.0);
        Vec s(2);
        s[0] = ua(rng);
        s[1] = uv(rng);
        return s;
    }

    Step step(const Vec& state, const Vec& action, Rng&) const override {
        const double theta = state[0];
        const double omega = state[1];
        const double u = std::clamp(action[0], -max_torque_, max_torque_);

        Step out;
        out.reward = -(theta * theta + 0.1 * omega * omega + 0.001 * u * u);
        double omega2 = omega + dt_ * (3.0 * g_ / (2.0 * l_) * std::sin(theta) +
                                       3.0 / (m_ * l_ * l_) * u);
        omega2 = std::clamp(omega2, -max_speed_, max_speed_);
        double theta2 = theta + dt_ * omega2;
        theta2 = wrap_angle(theta2);
        out.next_state = Vec(2);
        out.next_state << theta2, omega2;
        out.terminal = false;
        return out;
    }

    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PendulumEnv>(dt_, g_, m_, l_, max_torque_, max_speed_, horizon_);
    }

private:
    static double wrap_angle(double x) {
        const double pi = std::numbers::pi;
        x = std::fmod(x + pi, 2.0 * pi);
        if (x < 0.0) x += 2.0 * pi;
        return x - pi;
    }

    double dt_, g_, m_, l_, max_torque_, max_speed_;
    int horizon_;
};

}  // namespace

std::unique_ptr<Environment> make_lqr(const LqrSpec& spec) { return std::make_unique<LqrEnv>(spec); }

std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& params) {
    if (name == "lqr") {
        LqrSpec spec;
        spec.dim = static_cast<int>(get_param(params, "dim", spec.dim));
        spec.a_scale = get_param(params, "a_scale", spec.a_scale);
        spec.b_scale = get_param(params, "b_scale", spec.b_scale);
        spec.q_cost = get_param(params, "q_cost", spec.q_cost);
        spec.r_cost = get_param(params, "r_cost", spec.r_cost);
        spec.noise_std = get_param(params, "noise_std", spec.noise_std);
        spec.init_scale = get_param(params, "init_scale", spec.init_scale);
        spec.horizon = static_cast<int>(get_param(params, "horizon", spec.horizon));
        spec.state_cap = get_param(params, "state_cap", spec.state_cap);
        return make_lqr(spec);
    }
    if (name == "pointmass") {
        return std::make_unique<PointmassEnv>(
            get_param(params, "dt", 0.1), get_param(params, "action_cost", 0.01),
            get_param(params, "init_scale", 1.0), static_cast<int>(get_param(params, "horizon", 64)));
    }
    if (name == "pendulum") {
        return std::make_unique<PendulumEnv>(
            get_param(params, "dt", 0.05), get_param(params, "gravity", 10.0),
            get_param(params, "mass", 1.0), get_param(params, "length", 1.0),
            get_param(params, "max_torque", 2.0), get_param(params, "max_speed", 8.0),
            static_cast<int>(get_param(params, "horizon", 100)));
    }
    throw ConfigError("make_env: unknown environment '" + name + "'");
}

double lqr_expected_return(const LqrSpec& spec, const Mat& gain, const Mat& action_cov,
                           double gamma) {
    const int d = spec.dim;
    if (gain.rows() != d || gain.cols() != d || action_cov.rows() != d || action_cov.cols() != d)
        throw DimensionError("lqr_expected_return: gain/cov must be dim x dim");

    // s0 ~ U[-v, v]^d: E[s0] = 0, E[s0 s0'] = v^2/3 I
    Mat second = (spec.init_scale * spec.init_scale / 3.0) * Mat::Identity(d, d);
    const Mat closed = spec.a_scale * Mat::Identity(d, d) + spec.b_scale * gain;
    const Mat process = spec.noise_std * spec.noise_std * Mat::Identity(d, d);

    double ret = 0.0;
    double discount = 1.0;
    for (int t = 0; t < spec.horizon; ++t) {
        const double e_scost = spec.q_cost * second.trace();
        const double e_acost =
            spec.r_cost * ((gain * second * gain.transpose()).trace() + action_cov.trace());
        ret -= discount * (e_scost + e_acost);
        discount *= gamma;
        second = closed * second * closed.transpose() +
                 spec.b_scale * spec.b_scale * action_cov + process;
    }
    return ret;
}

}  // namespace bqpg::envs
