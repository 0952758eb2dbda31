#include "cbn/bayesnet.hpp"

#include <cmath>

#include "cbn/errors.hpp"

namespace cbn {

BayesNetModel::BayesNetModel(int universe, int alphabet, std::vector<std::string> names, std::vector<Factor> factors,
                             std::optional<std::pair<int, int>> x_substitution)
    : universe_(universe),
      alphabet_(alphabet),
      names_(std::move(names)),
      factors_(std::move(factors)),
      x_sub_(x_substitution) {
  if (universe_ < 1) throw ContractError("model: universe must be nonempty");
  if (alphabet_ < 2) throw ContractError("model: alphabet must be at least 2");
  if (names_.empty()) {
    for (int v = 0; v < universe_; ++v) names_.push_back("V" + std::to_string(v));
  }
  if (static_cast<int>(names_.size()) != universe_) throw ContractError("model: name count mismatch");
  uniform_ = 1.0 / alphabet_;
  factor_of_.assign(universe_, -1);
  auto in_range = [&](int v) { return v >= 0 && v < universe_; };
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const Factor& fa = factors_[f];
    if (!in_range(fa.node)) throw ContractError("model: factor node out of range");
    if (factor_of_[fa.node] >= 0) throw ContractError("model: two factors for " + names_[fa.node]);
    if (make_set(fa.cond) != fa.cond) throw ContractError("model: conditioning set not sorted");
    std::uint64_t keys = 1;
    for (int v : fa.cond) {
      if (!in_range(v) || factor_of_[v] < 0) {
        throw ContractError("model: conditioning variable of " + names_[fa.node] + " is not an earlier factor");
      }
      if (keys > UINT64_MAX / static_cast<std::uint64_t>(alphabet_)) {
        throw GuardError("model: conditioning key space of " + names_[fa.node] + " exceeds 64 bits");
      }
      keys *= alphabet_;
    }
    for (auto [v, val] : fa.fixed) {
      if (!in_range(v) || val < 0 || val >= alphabet_) throw ContractError("model: bad fixed value");
      if (contains(fa.cond, v)) throw ContractError("model: variable both conditioned on and fixed");
    }
    if (fa.substituted) {
      if (!x_sub_) throw ContractError("model: substituted factor without x_substitution");
      if (contains(fa.cond, x_sub_->first)) throw ContractError("model: substituted factor still conditions on X");
    }
    for (const auto& [key, r] : fa.rows) {
      if (key >= keys) throw ContractError("model: row key out of range for " + names_[fa.node]);
      if (static_cast<int>(r.size()) != alphabet_) throw ContractError("model: row width mismatch");
      double s = 0.0;
      for (double p : r) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ContractError("model: negative or non-finite row entry");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) {
        throw ContractError("model: row of " + names_[fa.node] + " sums to " + std::to_string(s));
      }
    }
    factor_of_[fa.node] = static_cast<int>(f);
  }
  if (x_sub_ && (!in_range(x_sub_->first) || x_sub_->second < 0 || x_sub_->second >= alphabet_)) {
    throw ContractError("model: x_substitution out of range");
  }
}

std::vector<int> BayesNetModel::order() const {
  std::vector<int> out;
  for (const auto& f : factors_) out.push_back(f.node);
  return out;
}

std::uint64_t BayesNetModel::key(std::size_t factor, const int* full) const {
  std::uint64_t k = 0;
  for (int v : factors_[factor].cond) k = k * alphabet_ + static_cast<std::uint64_t>(full[v]);
  return k;
}

const std::vector<double>* BayesNetModel::row(std::size_t factor, std::uint64_t k) const {
  const auto& rows = factors_[factor].rows;
  auto it = rows.find(k);
  return it == rows.end() ? nullptr : &it->second;
}

double BayesNetModel::conditional(std::size_t factor, const int* full) const {
  const auto* r = row(factor, key(factor, full));
  return r ? (*r)[full[factors_[factor].node]] : uniform_;
}

double BayesNetModel::prob(const int* full) const {
  double p = 1.0;
  for (std::size_t f = 0; f < factors_.size(); ++f) p *= conditional(f, full);
  return p;
}

bool BayesNetModel::applies(std::size_t factor, const int* full) const {
  for (auto [v, val] : factors_[factor].fixed) {
    if (full[v] != val) return false;
  }
  return true;
}

std::size_t BayesNetModel::stored_rows() const {
  std::size_t s = 0;
  for (const auto& f : factors_) s += f.rows.size();
  return s;
}

}  // namespace cbn
