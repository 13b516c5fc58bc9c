#pragma once

#include <cstdint>
#include <iosfwd>

namespace bqpg::harness {

/// Dense-oracle invariant suite: solver-vs-factorization checks, score
/// identities, SKI fidelity, degenerate-kernel equivalences and UAPG
/// whitening, each printed as one pass/fail line. Returns true when every
/// property holds.
bool run_selftest(std::uint64_t seed, std::ostream& out);

}  // namespace bqpg::harness
