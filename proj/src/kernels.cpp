#include "cbn/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <unordered_map>

#include "cbn/errors.hpp"

namespace cbn::kernels {

int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("CBN_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v >= 1) return v;
      } catch (const std::exception&) {
      }
    }
    return omp_get_max_threads();
  }();
  return n;
}

std::int64_t CountTable::total(std::uint64_t key) const {
  auto it = rows.find(key);
  if (it == rows.end()) return 0;
  std::int64_t s = 0;
  for (auto c : it->second) s += c;
  return s;
}

namespace {

struct Layout {
  std::vector<int> cond_cols;
  std::vector<std::pair<int, int>> fixed_cols;
  int target_col = 0;
  std::uint64_t key_space = 1;
};

Layout make_layout(const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                   const std::vector<std::pair<int, int>>& fixed) {
  if (rows > b.rows()) throw ContractError("count: batch has fewer rows than requested");
  Layout l;
  if (!b.has(target)) throw ContractError("count: target variable has no column");
  l.target_col = b.column_of(target);
  const auto sigma = static_cast<std::uint64_t>(b.alphabet());
  for (int v : cond) {
    if (!b.has(v)) throw ContractError("count: conditioning variable " + std::to_string(v) + " has no column");
    l.cond_cols.push_back(b.column_of(v));
    if (l.key_space > UINT64_MAX / sigma) throw GuardError("count: conditioning key space exceeds 64 bits");
    l.key_space *= sigma;
  }
  for (auto [v, val] : fixed) {
    if (!b.has(v)) throw ContractError("count: fixed variable " + std::to_string(v) + " has no column");
    l.fixed_cols.emplace_back(b.column_of(v), val);
  }
  return l;
}

inline bool row_matches(const int* r, const Layout& l) {
  for (auto [c, val] : l.fixed_cols) {
    if (r[c] != val) return false;
  }
  return true;
}

inline std::uint64_t row_key(const int* r, const Layout& l, std::uint64_t sigma) {
  std::uint64_t key = 0;
  for (int c : l.cond_cols) key = key * sigma + static_cast<std::uint64_t>(r[c]);
  return key;
}

// dense per-thread arrays are used while key_space * sigma stays below this
constexpr std::uint64_t kDenseCells = std::uint64_t{1} << 16;

}  // namespace

CountTable count_conditional(const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                             const std::vector<std::pair<int, int>>& fixed) {
  const Layout l = make_layout(b, rows, target, cond, fixed);
  const int sigma = b.alphabet();
  const auto usigma = static_cast<std::uint64_t>(sigma);
  CountTable out;
  out.alphabet = sigma;
  const long long n = static_cast<long long>(rows);
  const int threads = thread_count();

  if (l.key_space * usigma <= kDenseCells) {
    const std::size_t cells = l.key_space * usigma;
    std::vector<std::int64_t> total(cells, 0);
#pragma omp parallel num_threads(threads)
    {
      std::vector<std::int64_t> local(cells, 0);
#pragma omp for schedule(static) nowait
      for (long long i = 0; i < n; ++i) {
        const int* r = b.row(static_cast<std::size_t>(i));
        if (!row_matches(r, l)) continue;
        ++local[row_key(r, l, usigma) * usigma + static_cast<std::uint64_t>(r[l.target_col])];
      }
#pragma omp critical
      for (std::size_t c = 0; c < cells; ++c) total[c] += local[c];
    }
    for (std::uint64_t key = 0; key < l.key_space; ++key) {
      const auto* row = total.data() + key * usigma;
      bool any = false;
      for (int s = 0; s < sigma; ++s) any = any || row[s] != 0;
      if (any) out.rows.emplace(key, std::vector<std::int64_t>(row, row + sigma));
    }
    return out;
  }

  // integer addition commutes, so merge order does not affect the result
#pragma omp parallel num_threads(threads)
  {
    std::unordered_map<std::uint64_t, std::vector<std::int64_t>> local;
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < n; ++i) {
      const int* r = b.row(static_cast<std::size_t>(i));
      if (!row_matches(r, l)) continue;
      auto& row = local[row_key(r, l, usigma)];
      if (row.empty()) row.assign(sigma, 0);
      ++row[r[l.target_col]];
    }
#pragma omp critical
    for (auto& [key, row] : local) {
      auto& dst = out.rows[key];
      if (dst.empty()) dst.assign(sigma, 0);
      for (int s = 0; s < sigma; ++s) dst[s] += row[s];
    }
  }
  return out;
}

namespace serial {

CountTable count_conditional(const SampleBatch& b, std::size_t rows, int target, const NodeSet& cond,
                             const std::vector<std::pair<int, int>>& fixed) {
  const Layout l = make_layout(b, rows, target, cond, fixed);
  const auto usigma = static_cast<std::uint64_t>(b.alphabet());
  CountTable out;
  out.alphabet = b.alphabet();
  for (std::size_t i = 0; i < rows; ++i) {
    const int* r = b.row(i);
    if (!row_matches(r, l)) continue;
    auto& row = out.rows[row_key(r, l, usigma)];
    if (row.empty()) row.assign(b.alphabet(), 0);
    ++row[r[l.target_col]];
  }
  return out;
}

}  // namespace serial
}  // namespace cbn::kernels
