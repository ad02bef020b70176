#pragma once

#include "msvar/types.hpp"

#include <cstdint>

namespace msvar {

// Deterministic random stream keyed by (seed, stream_id). Identical keys give
// bit-identical sequences regardless of platform, thread, or call order, so
// replication r of a Monte Carlo or bootstrap run always sees stream_id = r.
// Generator: xoshiro256++ with per-stream state derived through SplitMix64.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via the Marsaglia polar method (pairs cached).
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  double cached_normal_;
  bool has_cached_;
};

// mean + chol_lower * z with z a vector of independent standard normals drawn
// from rng. chol_lower must be square and match mean's length.
Vector mvn_draw(const Vector& mean, const Matrix& chol_lower, RngStream& rng);

}  // namespace msvar
