#include "cbn/samples.hpp"

#include "cbn/errors.hpp"
#include "cbn/graph.hpp"

namespace cbn {

SampleBatch::SampleBatch(int universe, int alphabet, std::vector<int> columns, std::vector<std::string> names)
    : universe_(universe), alphabet_(alphabet), columns_(std::move(columns)), names_(std::move(names)) {
  if (alphabet_ < 2) throw ContractError("sample batch: alphabet must be at least 2");
  col_of_.assign(universe_, -1);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const int v = columns_[c];
    if (v < 0 || v >= universe_) throw ContractError("sample batch: column id out of range");
    if (col_of_[v] >= 0) throw ContractError("sample batch: repeated column");
    col_of_[v] = static_cast<int>(c);
  }
  if (!names_.empty() && names_.size() != columns_.size()) {
    throw ContractError("sample batch: name count does not match column count");
  }
}

void SampleBatch::append_row(const std::vector<int>& values) {
  if (values.size() != width()) throw ContractError("sample batch: row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
}

SampleBatch SampleBatch::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > rows()) throw ContractError("sample batch: slice beyond the last row");
  SampleBatch out(universe_, alphabet_, columns_, names_);
  out.data_.assign(data_.begin() + begin * width(), data_.begin() + (begin + count) * width());
  return out;
}

SampleBatch SampleBatch::project(const std::vector<int>& vars, const std::vector<int>& new_ids, int new_universe,
                                 std::vector<std::string> names) const {
  if (vars.size() != new_ids.size()) throw ContractError("sample batch: projection lists differ in length");
  std::vector<int> src;
  for (int v : vars) {
    if (!has(v)) throw ContractError("sample batch: variable " + std::to_string(v) + " has no column");
    src.push_back(col_of_[v]);
  }
  SampleBatch out(new_universe, alphabet_, new_ids, std::move(names));
  const std::size_t m = rows();
  out.data_.resize(m * src.size());
  for (std::size_t r = 0; r < m; ++r) {
    const int* in = row(r);
    int* o = out.data_.data() + r * src.size();
    for (std::size_t j = 0; j < src.size(); ++j) o[j] = in[src[j]];
  }
  return out;
}

void SampleBatch::fill_full(std::size_t r, std::vector<int>& full) const {
  const int* in = row(r);
  for (std::size_t c = 0; c < columns_.size(); ++c) full[columns_[c]] = in[c];
}

void SampleBatch::check_matches(const Admg& g) const {
  if (alphabet_ != g.alphabet()) throw ContractError("samples use a different alphabet than the graph");
  for (int v = 0; v < g.size(); ++v) {
    if (!has(v)) throw ContractError("samples lack a column for " + g.name(v));
  }
  for (int s : data_) {
    if (s < 0 || s >= alphabet_) throw ContractError("sample symbol " + std::to_string(s) + " out of range");
  }
}

}  // namespace cbn
