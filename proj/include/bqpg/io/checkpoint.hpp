#pragma once

#include <string>

#include "bqpg/kernels/kernel_model.hpp"
#include "bqpg/policy/policy_network.hpp"

namespace bqpg::io {

/// Binary checkpoint container, little-endian throughout:
///   bytes 0..7   magic "BQPGCKP1"
///   u32          kind (1 = policy, 2 = kernel)
/// policy payload:
///   u32 state_dim, u32 action_dim, u32 hidden_count, u32[] hidden dims,
///   u64 param_count, f64[] theta
/// kernel payload:
///   u32 state_dim, u32 hidden_count, u32[] hidden dims, u32 feature_dim,
///   u64 param_count, f64[] params, f64 c1, f64 c2, f64 sigma2, u32 grid_size
void save_policy(const policy::PolicyNetwork& policy, const std::string& path);
policy::PolicyNetwork load_policy(const std::string& path);

void save_kernel(const kernels::KernelModel& model, const std::string& path);
kernels::KernelModel load_kernel(const std::string& path);

}  // namespace bqpg::io
