#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cbn/graph.hpp"
#include "cbn/model.hpp"
#include "cbn/rng.hpp"

namespace testing_support {

struct Instance {
  cbn::GroundTruthCbn cbn;
  int x = 0;
  int x_val = 0;
  double lambda = 0.0;
};

// Random identifiable instance: n <= 6, |Σ| in {2,3}, d <= 2, k <= 2.
inline Instance random_instance(std::uint64_t seed, bool positive_only = false) {
  cbn::Rng r(cbn::derive_seed(seed, 17));
  const int n = 2 + static_cast<int>(r.below(5));
  const int sigma = 2 + static_cast<int>(r.below(2));
  const int d = static_cast<int>(r.below(3));
  const int k = 1 + static_cast<int>(r.below(2));
  const int x = static_cast<int>(r.below(n));
  const int xv = static_cast<int>(r.below(sigma));
  const double lambda = (positive_only || r.below(2) == 0) ? 0.25 : 1.0;
  cbn::Admg g = cbn::random_identifiable_admg(n, d, k, sigma, x, cbn::derive_seed(seed, 1));
  return {cbn::random_cbn(g, sigma, lambda, cbn::derive_seed(seed, 2)), x, xv, lambda};
}

inline std::vector<int> decode(std::size_t idx, int n, int sigma) {
  std::vector<int> a(n);
  for (int i = n - 1; i >= 0; --i) {
    a[i] = static_cast<int>(idx % sigma);
    idx /= sigma;
  }
  return a;
}

inline std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace testing_support
