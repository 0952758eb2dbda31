#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cbn/samples.hpp"
#include "cbn/sets.hpp"

namespace cbn {

enum class Exec { parallel, serial };

namespace kernels {

/// Threads used by parallel kernels: CBN_THREADS if set, else the OpenMP default.
int thread_count();

/// Row counts per conditioning key. Key is the mixed-radix value of the
/// conditioning variables (ascending ids, first most significant).
struct CountTable {
  int alphabet = 2;
  std::map<std::uint64_t, std::vector<std::int64_t>> rows;

  std::int64_t total(std::uint64_t key) const;
};

/// Counts target symbols over the first `rows` rows whose `fixed` variables
/// hold the given values, grouped by the assignment of `cond`.
CountTable count_conditional(const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                             const std::vector<std::pair<int, int>>& fixed);

/// Calls f(i) for i in [0, n); f must only write to slot i of its outputs.
template <typename F>
void for_each_index(std::size_t n, F&& f) {
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
}

/// Splits [0, rows) into fixed blocks and calls f(block, begin, end). Block
/// boundaries do not depend on the thread count.
inline constexpr std::size_t kBlockRows = 4096;

template <typename F>
void for_each_block(std::size_t rows, F&& f) {
  const std::size_t blocks = (rows + kBlockRows - 1) / kBlockRows;
  for_each_index(blocks, [&](std::size_t b) { f(b, b * kBlockRows, std::min(rows, (b + 1) * kBlockRows)); });
}

namespace serial {

CountTable count_conditional(const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                             const std::vector<std::pair<int, int>>& fixed);

template <typename F>
void for_each_index(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}

template <typename F>
void for_each_block(std::size_t rows, F&& f) {
  const std::size_t blocks = (rows + kBlockRows - 1) / kBlockRows;
  for (std::size_t b = 0; b < blocks; ++b) f(b, b * kBlockRows, std::min(rows, (b + 1) * kBlockRows));
}

}  // namespace serial

template <typename F>
void dispatch_index(Exec e, std::size_t n, F&& f) {
  if (e == Exec::parallel) {
    for_each_index(n, f);
  } else {
    serial::for_each_index(n, f);
  }
}

template <typename F>
void dispatch_block(Exec e, std::size_t rows, F&& f) {
  if (e == Exec::parallel) {
    for_each_block(rows, f);
  } else {
    serial::for_each_block(rows, f);
  }
}

inline CountTable dispatch_count(Exec e, const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                                 const std::vector<std::pair<int, int>>& fixed) {
  return e == Exec::parallel ? count_conditional(b, rows, target, cond, fixed)
                             : serial::count_conditional(b, rows, target, cond, fixed);
}

}  // namespace kernels
}  // namespace cbn
