#pragma once

#include <memory>

#include "bqpg/linalg/linear_operator.hpp"

namespace bqpg::linalg {

/// Symmetric Toeplitz matrix T[i][j] = first_column[|i-j|], stored as its
/// generator plus the precomputed FFT of the circulant embedding (length: next
/// power of two >= 2m-1). Copies share the immutable workspace; mvm() is safe
/// to call concurrently.
class ToeplitzSpec {
public:
    explicit ToeplitzSpec(Vec first_column);

    Index size() const;
    const Vec& first_column() const;

    /// T*v via circulant embedding + FFT, O(m log m).
    Vec mvm(const Vec& v) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

inline Vec toeplitz_mvm(const ToeplitzSpec& spec, const Vec& v) { return spec.mvm(v); }

}  // namespace bqpg::linalg
