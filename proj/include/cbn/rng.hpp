#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cbn {

/// splitmix64 step; used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministically derives an independent seed for a numbered sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator. Only integer arithmetic and IEEE double
/// conversions are used, so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Unit-rate exponential draw.
  double exponential();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Index drawn from a (nonnegative, normalized) probability vector.
  int categorical(std::span<const double> probs);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace cbn
