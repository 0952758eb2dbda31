#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbn/sets.hpp"

namespace cbn {

// exact enumeration refuses product spaces larger than this
inline constexpr std::uint64_t kStateGuard = std::uint64_t{1} << 24;

/// Product of domain sizes; throws GuardError above `limit`.
std::uint64_t guarded_product(const std::vector<int>& sizes, std::uint64_t limit, const std::string& what);

/// Nonnegative table over a product space, row-major with the last variable
/// varying fastest. Not necessarily normalized.
struct Table {
  std::vector<int> vars;
  std::vector<int> sizes;
  std::vector<double> values;

  Table() = default;
  Table(std::vector<int> vars, std::vector<int> sizes);

  std::size_t cells() const { return values.size(); }
  int position(int var) const;  // -1 if absent
  std::size_t index(std::span<const int> assignment) const;
  /// index from a universe-indexed assignment (value of var v at full[v])
  std::size_t index_from_full(std::span<const int> full) const;
  void decode(std::size_t idx, std::span<int> out) const;
  double sum() const;
};

/// Sums out every variable not in keep; result variables follow `keep`.
Table marginalize(const Table& t, const std::vector<int>& keep);

/// Normalized Table with optional display names.
class DenseDistribution {
 public:
  DenseDistribution() = default;
  /// Validates shape, nonnegativity and normalization (1e-9).
  DenseDistribution(Table table, std::vector<std::string> names = {});

  const Table& table() const { return t_; }
  const std::vector<int>& vars() const { return t_.vars; }
  const std::vector<int>& sizes() const { return t_.sizes; }
  const std::vector<double>& mass() const { return t_.values; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t cells() const { return t_.values.size(); }

  double at(std::span<const int> assignment) const { return t_.values[t_.index(assignment)]; }

  /// Marginal over keep (ids); names carried along.
  DenseDistribution marginal(const std::vector<int>& keep) const;

 private:
  Table t_;
  std::vector<std::string> names_;
};

double tv_distance(const DenseDistribution& p, const DenseDistribution& q);
double kl_distance(const DenseDistribution& p, const DenseDistribution& q);

/// Minimum marginal mass over assignments of s; 1 for the empty set.
double strong_positivity_margin(const DenseDistribution& p, const NodeSet& s);

}  // namespace cbn
