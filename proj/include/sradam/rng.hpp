#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "sradam/vec.hpp"

namespace sradam {

/// Deterministic random stream. Same seed, same platform, same sequence.
///
/// Generator: xoshiro256++ with the state filled from a splitmix64 sequence
/// over the seed (the canonical seeding recipe). uniform() maps the top 53
/// bits onto [0, 1). normal() inverts the standard normal CDF with Acklam's
/// rational approximation (|rel err| < 1.2e-9) on a uniform that is offset
/// away from 0 and 1, so it never produces an infinity.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform();

  /// Standard normal draw.
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream derived from this rng's seed and a stream tag.
  /// Pure function of (seed, stream); does not advance this rng.
  Rng child(std::uint64_t stream) const;
  Rng child(std::string_view tag) const;

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
};

/// splitmix64 finalizer; bijective on 64-bit ints.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Order-sensitive combiner for deriving child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// FNV-1a over a byte string; used for stream tags and content hashes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t h = 0xcbf29ce484222325ull) noexcept;

/// Quantile function of the standard normal (Acklam's approximation).
/// Requires p in (0, 1).
double inverse_normal_cdf(double p);

/// Vector of independent N(mean, std^2) draws, consumed from rng in index
/// order. std = 0 yields a constant vector without touching the rng.
/// dim = 0 or std < 0 is an error.
ParamVector gauss_vec(Rng& rng, std::size_t dim, double mean, double std);

}  // namespace sradam
