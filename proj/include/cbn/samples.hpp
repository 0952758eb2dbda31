#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cbn/sets.hpp"

namespace cbn {

class Admg;

/// m rows of symbols over a list of variable ids, stored row-major.
class SampleBatch {
 public:
  SampleBatch() = default;
  /// columns: variable ids (any order, distinct); universe: size of the id space.
  SampleBatch(int universe, int alphabet, std::vector<int> columns, std::vector<std::string> names = {});

  int universe() const { return universe_; }
  int alphabet() const { return alphabet_; }
  const std::vector<int>& columns() const { return columns_; }
  const std::vector<std::string>& names() const { return names_; }
  int column_of(int var) const { return var < universe_ ? col_of_[var] : -1; }
  bool has(int var) const { return var >= 0 && column_of(var) >= 0; }

  std::size_t rows() const { return columns_.empty() ? 0 : data_.size() / columns_.size(); }
  std::size_t width() const { return columns_.size(); }
  int at(std::size_t row, int var) const { return data_[row * width() + col_of_[var]]; }
  const int* row(std::size_t r) const { return data_.data() + r * width(); }
  int* row(std::size_t r) { return data_.data() + r * width(); }

  void resize_rows(std::size_t m) { data_.assign(m * width(), 0); }
  void append_row(const std::vector<int>& values);  // in column order
  std::vector<int>& data() { return data_; }
  const std::vector<int>& data() const { return data_; }

  /// Row range [begin, begin + count).
  SampleBatch slice(std::size_t begin, std::size_t count) const;
  /// Keeps `vars` and renames vars[i] -> new_ids[i] in a universe of new_universe.
  SampleBatch project(const std::vector<int>& vars, const std::vector<int>& new_ids, int new_universe,
                      std::vector<std::string> names = {}) const;

  /// Universe-indexed assignment of row r (unset entries left untouched).
  void fill_full(std::size_t r, std::vector<int>& full) const;

  /// Throws ContractError unless every node of g has a column and symbols are in range.
  void check_matches(const Admg& g) const;

 private:
  int universe_ = 0;
  int alphabet_ = 2;
  std::vector<int> columns_;
  std::vector<int> col_of_;
  std::vector<std::string> names_;
  std::vector<int> data_;
};

}  // namespace cbn
