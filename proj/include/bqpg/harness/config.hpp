#pragma once

#include <map>
#include <string>
#include <vector>

#include "bqpg/errors.hpp"

namespace bqpg::harness {

/// Flat key-value configuration with dotted section keys. Grammar, one
/// entry per line:
///   key.subkey = value        # trailing comments allowed
/// Blank lines and lines starting with '#' are skipped. Values are strings
/// until a typed getter parses them. Environment variables named
/// BQPG_<KEY>, with dots replaced by underscores and uppercased
/// (e.g. BQPG_TRAIN_ITERATIONS), override file entries.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    void apply_env_overrides();           // reads BQPG_* from the process env
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<long> get_int_list(const std::string& key, std::vector<long> fallback) const;
    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    /// Entries under "env." parsed as doubles (environment parameters).
    std::map<std::string, double> section_doubles(const std::string& prefix) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace bqpg::harness
