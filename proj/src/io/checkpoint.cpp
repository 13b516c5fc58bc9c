#include "bqpg/io/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace bqpg::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout is little-endian; big-endian hosts need byte swaps");

namespace {

constexpr char kMagic[8] = {'B', 'Q', 'P', 'G', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kKindPolicy = 1;
constexpr std::uint32_t kKindKernel = 2;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw ConfigError("checkpoint: cannot open '" + path + "' for writing");
    }
    template <typename T>
    void put(T v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_vec(const Eigen::VectorXd& v) {
        put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(v.size())));
    }
};

struct Reader {
    std::ifstream in;
    explicit Reader(const std::string& path) : in(path, std::ios::binary) {
        if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
    }
    template <typename T>
    T get() {
        T v{};
        in.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in) throw ConfigError("checkpoint: truncated file");
        return v;
    }
    Eigen::VectorXd get_vec() {
        auto n = get<std::uint64_t>();
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(sizeof(double) * n));
        if (!in) throw ConfigError("checkpoint: truncated payload");
        return v;
    }
};

std::uint32_t read_header(Reader& r) {
    char magic[8];
    r.in.read(magic, 8);
    if (!r.in || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("checkpoint: bad magic");
    return r.get<std::uint32_t>();
}

}  // namespace

void save_policy(const policy::PolicyNetwork& policy, const std::string& path) {
    Writer w(path);
    w.out.write(kMagic, 8);
    w.put(kKindPolicy);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(policy.state_dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(policy.action_dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(policy.hidden_dims().size()));
    for (int h : policy.hidden_dims()) w.put<std::uint32_t>(static_cast<std::uint32_t>(h));
    w.put_vec(policy.get_theta());
    if (!w.out) throw ConfigError("checkpoint: write failed for '" + path + "'");
}

policy::PolicyNetwork load_policy(const std::string& path) {
    Reader r(path);
    if (read_header(r) != kKindPolicy) throw ConfigError("checkpoint: not a policy checkpoint");
    const int state_dim = static_cast<int>(r.get<std::uint32_t>());
    const int action_dim = static_cast<int>(r.get<std::uint32_t>());
    const auto hidden_count = r.get<std::uint32_t>();
    std::vector<int> hidden(hidden_count);
    for (auto& h : hidden) h = static_cast<int>(r.get<std::uint32_t>());
    Eigen::VectorXd theta = r.get_vec();
    policy::PolicyNetwork policy(state_dim, action_dim, hidden);
    if (theta.size() != policy.param_count()) throw ConfigError("checkpoint: parameter count mismatch");
    policy.set_theta(theta);
    return policy;
}

void save_kernel(const kernels::KernelModel& model, const std::string& path) {
    Writer w(path);
    w.out.write(kMagic, 8);
    w.put(kKindKernel);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.state_kernel.state_dim()));
    // hidden layout is recoverable from the feature net param count plus dims;
    // store dims explicitly to keep the reader dumb
    std::vector<int> hidden;
    if (model.state_kernel.has_feature_net()) hidden = model.state_kernel.feature_hidden_dims();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(hidden.size()));
    for (int h : hidden) w.put<std::uint32_t>(static_cast<std::uint32_t>(h));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.state_kernel.feature_dim()));
    w.put_vec(model.state_kernel.get_params());
    w.put(model.c1);
    w.put(model.c2);
    w.put(model.sigma2);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.grid.size));
    if (!w.out) throw ConfigError("checkpoint: write failed for '" + path + "'");
}

kernels::KernelModel load_kernel(const std::string& path) {
    Reader r(path);
    if (read_header(r) != kKindKernel) throw ConfigError("checkpoint: not a kernel checkpoint");
    const int state_dim = static_cast<int>(r.get<std::uint32_t>());
    const auto hidden_count = r.get<std::uint32_t>();
    std::vector<int> hidden(hidden_count);
    for (auto& h : hidden) h = static_cast<int>(r.get<std::uint32_t>());
    const int feature_dim = static_cast<int>(r.get<std::uint32_t>());
    Eigen::VectorXd params = r.get_vec();

    kernels::KernelModel model{kernels::DeepRBFKernel(state_dim, hidden, feature_dim)};
    if (params.size() != model.state_kernel.param_count())
        throw ConfigError("checkpoint: kernel parameter count mismatch");
    model.state_kernel.set_params(params);
    model.c1 = r.get<double>();
    model.c2 = r.get<double>();
    model.sigma2 = r.get<double>();
    model.grid.size = static_cast<int>(r.get<std::uint32_t>());
    return model;
}

}  // namespace bqpg::io
