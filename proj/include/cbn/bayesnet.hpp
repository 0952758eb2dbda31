#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbn/identify.hpp"
#include "cbn/sets.hpp"

namespace cbn {

/// One conditional table P(node | cond) restricted to rows where the `fixed`
/// variables take the listed values. Rows are keyed by the mixed-radix value
/// of cond (ascending ids, first most significant); missing rows are uniform.
struct Factor {
  int node = 0;
  NodeSet cond;
  FixedValues fixed;
  bool substituted = false;  // X in the conditioning was replaced by the constant x
  RowMap rows;

  bool operator==(const Factor&) const = default;
};

/// Bayes net over a subset of a universe of variables, factors listed in a
/// topological order. Represents learned P, D_x and c-component models.
class BayesNetModel {
 public:
  BayesNetModel() = default;
  BayesNetModel(int universe, int alphabet, std::vector<std::string> names, std::vector<Factor> factors,
                std::optional<std::pair<int, int>> x_substitution = std::nullopt);

  int universe() const { return universe_; }
  int alphabet() const { return alphabet_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Factor>& factors() const { return factors_; }
  std::vector<Factor>& mutable_factors() { return factors_; }
  const std::optional<std::pair<int, int>>& x_substitution() const { return x_sub_; }
  std::vector<int> order() const;
  NodeSet nodes() const { return make_set(order()); }
  int factor_index(int node) const { return node < universe_ ? factor_of_[node] : -1; }

  std::uint64_t key(std::size_t factor, const int* full) const;
  /// nullptr means the uniform row.
  const std::vector<double>* row(std::size_t factor, std::uint64_t key) const;
  double conditional(std::size_t factor, const int* full) const;
  /// Product of all factors at a universe-indexed assignment.
  double prob(const int* full) const;
  /// Whether every fixed variable of the factor matches the assignment.
  bool applies(std::size_t factor, const int* full) const;

  std::size_t stored_rows() const;

  bool operator==(const BayesNetModel& o) const {
    return universe_ == o.universe_ && alphabet_ == o.alphabet_ && names_ == o.names_ && factors_ == o.factors_ &&
           x_sub_ == o.x_sub_;
  }

 private:
  int universe_ = 0;
  int alphabet_ = 2;
  std::vector<std::string> names_;
  std::vector<Factor> factors_;
  std::vector<int> factor_of_;
  std::optional<std::pair<int, int>> x_sub_;
  double uniform_ = 0.5;
};

}  // namespace cbn
