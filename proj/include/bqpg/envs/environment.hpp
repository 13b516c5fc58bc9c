#pragma once

#include <map>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "bqpg/errors.hpp"
#include "bqpg/rng.hpp"

namespace bqpg::envs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Immutable continuous-control MDP. Dynamics are pure: the caller owns the
/// state and passes it back in, so one instance can serve many parallel
/// rollouts.
class Environment {
public:
    struct Step {
        Vec next_state;
        double reward = 0.0;
        bool terminal = false;
    };

    virtual ~Environment() = default;
    virtual std::string name() const = 0;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual int horizon() const = 0;
    virtual double reward_bound() const = 0;
    virtual Vec reset(Rng& rng) const = 0;
    virtual Step step(const Vec& state, const Vec& action, Rng& rng) const = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;
};

using EnvParams = std::map<std::string, double>;

/// Environments:
///   lqr       - linear dynamics s' = a_scale*s + b_scale*a + noise,
///               reward -(s'Q s + a'R a) with Q = q_cost*I, R = r_cost*I;
///               params: dim, a_scale, b_scale, q_cost, r_cost, noise_std,
///               init_scale (s0 ~ U[-v,v]^dim), horizon, state_cap
///   pointmass - 2-d single integrator s' = s + dt*a, reward
///               -(|s|^2 + action_cost*|a|^2); params: dt, action_cost,
///               init_scale, horizon
///   pendulum  - torque-limited pendulum, theta = 0 upright; params: dt,
///               gravity, mass, length, max_torque, max_speed, horizon
std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& params = {});

struct LqrSpec {
    int dim = 2;
    double a_scale = 1.0;
    double b_scale = 1.0;
    double q_cost = 1.0;
    double r_cost = 0.1;
    double noise_std = 0.0;
    double init_scale = 1.0;
    int horizon = 50;
    double state_cap = 1e3;  // |s|_inf above this ends the episode
};

std::unique_ptr<Environment> make_lqr(const LqrSpec& spec);

/// Expected discounted return of the linear policy a = K s + xi,
/// xi ~ N(0, action_cov), under the finite-horizon LQR above, by exact
/// propagation of the first two state moments.
double lqr_expected_return(const LqrSpec& spec, const Mat& gain, const Mat& action_cov,
                           double gamma);

}  // namespace bqpg::envs
