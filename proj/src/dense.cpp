#include "cbn/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbn/errors.hpp"

namespace cbn {

std::uint64_t guarded_product(const std::vector<int>& sizes, std::uint64_t limit, const std::string& what) {
  std::uint64_t total = 1;
  for (int s : sizes) {
    if (s < 1) throw ContractError(what + ": domain size must be positive");
    if (total > limit / static_cast<std::uint64_t>(s)) {
      throw GuardError(what + ": state space exceeds " + std::to_string(limit) + " states");
    }
    total *= static_cast<std::uint64_t>(s);
  }
  return total;
}

Table::Table(std::vector<int> v, std::vector<int> s) : vars(std::move(v)), sizes(std::move(s)) {
  if (vars.size() != sizes.size()) throw ContractError("table: variable and size lists differ in length");
  {
    auto sorted = vars;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ContractError("table: repeated variable");
    }
  }
  values.assign(guarded_product(sizes, kStateGuard, "table"), 0.0);
}

int Table::position(int var) const {
  auto it = std::find(vars.begin(), vars.end(), var);
  return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

std::size_t Table::index(std::span<const int> a) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) idx = idx * sizes[i] + a[i];
  return idx;
}

std::size_t Table::index_from_full(std::span<const int> full) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) idx = idx * sizes[i] + full[vars[i]];
  return idx;
}

void Table::decode(std::size_t idx, std::span<int> out) const {
  for (std::size_t i = vars.size(); i-- > 0;) {
    out[i] = static_cast<int>(idx % sizes[i]);
    idx /= sizes[i];
  }
}

double Table::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

Table marginalize(const Table& t, const std::vector<int>& keep) {
  std::vector<int> kept_sizes;
  std::vector<int> src_pos;
  for (int v : keep) {
    const int p = t.position(v);
    if (p < 0) throw ContractError("marginalize: variable " + std::to_string(v) + " not in table");
    src_pos.push_back(p);
    kept_sizes.push_back(t.sizes[p]);
  }
  Table out(keep, kept_sizes);
  std::vector<int> a(t.vars.size(), 0);
  // odometer over the source, last variable fastest
  for (std::size_t idx = 0; idx < t.values.size(); ++idx) {
    std::size_t o = 0;
    for (std::size_t i = 0; i < src_pos.size(); ++i) o = o * out.sizes[i] + a[src_pos[i]];
    out.values[o] += t.values[idx];
    for (std::size_t i = a.size(); i-- > 0;) {
      if (++a[i] < t.sizes[i]) break;
      a[i] = 0;
    }
  }
  return out;
}

DenseDistribution::DenseDistribution(Table table, std::vector<std::string> names)
    : t_(std::move(table)), names_(std::move(names)) {
  if (!names_.empty() && names_.size() != t_.vars.size()) {
    throw ContractError("dense distribution: name count does not match variable count");
  }
  std::uint64_t expected = 1;
  for (int s : t_.sizes) expected *= static_cast<std::uint64_t>(s);
  if (expected != t_.values.size()) throw ContractError("dense distribution: mass length does not match shape");
  double total = 0.0;
  for (double v : t_.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("dense distribution: negative or non-finite mass");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError("dense distribution: mass sums to " + std::to_string(total));
  }
}

DenseDistribution DenseDistribution::marginal(const std::vector<int>& keep) const {
  std::vector<std::string> names;
  if (!names_.empty()) {
    for (int v : keep) {
      const int p = t_.position(v);
      if (p >= 0) names.push_back(names_[p]);
    }
  }
  return DenseDistribution(marginalize(t_, keep), std::move(names));
}

namespace {
void check_same_shape(const DenseDistribution& p, const DenseDistribution& q) {
  if (p.vars() != q.vars() || p.sizes() != q.sizes()) {
    throw ContractError("distance: distributions have different shapes");
  }
}
}  // namespace

double tv_distance(const DenseDistribution& p, const DenseDistribution& q) {
  check_same_shape(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) s += std::abs(p.mass()[i] - q.mass()[i]);
  return 0.5 * s;
}

double kl_distance(const DenseDistribution& p, const DenseDistribution& q) {
  check_same_shape(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const double a = p.mass()[i];
    if (a == 0.0) continue;
    const double b = q.mass()[i];
    if (b <= 0.0) throw ContractError("kl: q vanishes at cell " + std::to_string(i) + " where p is positive");
    s += a * std::log(a / b);
  }
  return s;
}

double strong_positivity_margin(const DenseDistribution& p, const NodeSet& s) {
  if (s.empty()) return 1.0;
  const Table m = marginalize(p.table(), s);
  return *std::min_element(m.values.begin(), m.values.end());
}

}  // namespace cbn
