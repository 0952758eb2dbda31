#include "cbn/model.hpp"

#include <cmath>
#include <optional>

#include "cbn/errors.hpp"
#include "cbn/rng.hpp"

namespace cbn {

namespace {

void check_row(const std::vector<double>& row, std::size_t size, const std::string& what) {
  if (row.size() != size) {
    throw ContractError(what + ": expected " + std::to_string(size) + " entries, got " + std::to_string(row.size()));
  }
  double s = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ContractError(what + ": negative or non-finite entry");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ContractError(what + ": entries sum to " + std::to_string(s));
}

std::vector<double> normalized_exponentials(Rng& rng, int size) {
  std::vector<double> row(size);
  double s = 0.0;
  for (auto& p : row) {
    p = rng.exponential();
    s += p;
  }
  if (s <= 0.0) return std::vector<double>(size, 1.0 / size);
  for (auto& p : row) p /= s;
  return row;
}

}  // namespace

GroundTruthCbn::GroundTruthCbn(Admg graph, int hidden_domain, std::vector<Row> hidden_priors,
                               std::vector<std::vector<Row>> cpts)
    : g_(std::move(graph)), hidden_domain_(hidden_domain), priors_(std::move(hidden_priors)), cpts_(std::move(cpts)) {
  if (hidden_domain_ < 2) throw ContractError("hidden_domain must be at least 2");
  if (priors_.size() != g_.bidirected().size()) {
    throw ContractError("expected one hidden prior per bidirected edge (" + std::to_string(g_.bidirected().size()) +
                        "), got " + std::to_string(priors_.size()));
  }
  for (std::size_t e = 0; e < priors_.size(); ++e) {
    check_row(priors_[e], hidden_domain_, "hidden prior " + std::to_string(e));
  }
  if (static_cast<int>(cpts_.size()) != g_.size()) throw ContractError("expected one CPT per node");
  for (int v = 0; v < g_.size(); ++v) {
    const std::size_t rows = row_count(v);
    if (cpts_[v].size() != rows) {
      throw ContractError("CPT of " + g_.name(v) + ": expected " + std::to_string(rows) + " rows, got " +
                          std::to_string(cpts_[v].size()));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      check_row(cpts_[v][r], g_.alphabet(), "CPT of " + g_.name(v) + " row " + std::to_string(r));
    }
  }
}

std::size_t GroundTruthCbn::row_count(int node) const {
  std::vector<int> sizes(g_.parents(node).size(), g_.alphabet());
  sizes.insert(sizes.end(), g_.incident_bidirected(node).size(), hidden_domain_);
  return guarded_product(sizes, kStateGuard, "CPT of " + g_.name(node));
}

std::size_t GroundTruthCbn::row_index(int node, const int* obs, const int* hidden) const {
  std::size_t idx = 0;
  for (int p : g_.parents(node)) idx = idx * g_.alphabet() + obs[p];
  for (int e : g_.incident_bidirected(node)) idx = idx * hidden_domain_ + hidden[e];
  return idx;
}

GroundTruthCbn random_cbn(const Admg& g, int hidden_domain, double lambda, std::uint64_t seed) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ContractError("smoothing must lie in [0,1]");
  if (hidden_domain < 2) throw ContractError("hidden_domain must be at least 2");
  Rng rng(seed);
  std::vector<GroundTruthCbn::Row> priors;
  for (std::size_t e = 0; e < g.bidirected().size(); ++e) priors.push_back(normalized_exponentials(rng, hidden_domain));

  const int sigma = g.alphabet();
  std::vector<std::vector<GroundTruthCbn::Row>> cpts(g.size());
  for (int v = 0; v < g.size(); ++v) {
    std::vector<int> sizes(g.parents(v).size(), sigma);
    sizes.insert(sizes.end(), g.incident_bidirected(v).size(), hidden_domain);
    const std::uint64_t rows = guarded_product(sizes, kStateGuard, "CPT of " + g.name(v));
    cpts[v].reserve(rows);
    for (std::uint64_t r = 0; r < rows; ++r) {
      auto row = normalized_exponentials(rng, sigma);
      double s = 0.0;
      for (auto& p : row) {
        p = (1.0 - lambda) * p + lambda / sigma;
        s += p;
      }
      // renormalize away rounding so rows pass the 1e-12 check
      for (auto& p : row) p /= s;
      cpts[v].push_back(std::move(row));
    }
  }
  return GroundTruthCbn(g, hidden_domain, std::move(priors), std::move(cpts));
}

SampleBatch sample_observational(const GroundTruthCbn& cbn, std::size_t m, std::uint64_t seed, Exec exec) {
  if (m < 1) throw ContractError("sample count must be at least 1");
  const Admg& g = cbn.graph();
  SampleBatch out(g.size(), g.alphabet(), g.order(), names_of(g, g.order()));
  out.resize_rows(m);
  const int width = g.size();
  const auto& order = g.order();
  kernels::dispatch_block(exec, m, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, block));
    std::vector<int> obs(width), hidden(cbn.hidden_count());
    for (std::size_t r = begin; r < end; ++r) {
      for (int e = 0; e < cbn.hidden_count(); ++e) hidden[e] = rng.categorical(cbn.hidden_priors()[e]);
      for (int v : order) obs[v] = rng.categorical(cbn.row(v, cbn.row_index(v, obs.data(), hidden.data())));
      int* dst = out.row(r);
      for (int c = 0; c < width; ++c) dst[c] = obs[order[c]];
    }
  });
  return out;
}

namespace {

// Sum over hidden assignments of the product of factors at a full observable
// assignment; `skip` drops one node's factor.
double joint_mass(const GroundTruthCbn& cbn, const std::vector<int>& obs, int skip) {
  const Admg& g = cbn.graph();
  const int e_count = cbn.hidden_count();
  const int hd = cbn.hidden_domain();
  std::vector<int> hidden(e_count, 0);
  double total = 0.0;
  for (;;) {
    double p = 1.0;
    for (int e = 0; e < e_count && p != 0.0; ++e) p *= cbn.hidden_priors()[e][hidden[e]];
    for (int v = 0; v < g.size() && p != 0.0; ++v) {
      if (v == skip) continue;
      p *= cbn.row(v, cbn.row_index(v, obs.data(), hidden.data()))[obs[v]];
    }
    total += p;
    int i = e_count - 1;
    while (i >= 0 && ++hidden[i] == hd) hidden[i--] = 0;
    if (i < 0) break;
  }
  return total;
}

DenseDistribution enumerate(const GroundTruthCbn& cbn, std::optional<std::pair<int, int>> x, Exec exec) {
  const Admg& g = cbn.graph();
  std::vector<int> vars;
  for (int v = 0; v < g.size(); ++v) {
    if (!x || v != x->first) vars.push_back(v);
  }
  std::vector<int> all_sizes(g.size(), g.alphabet());
  all_sizes.insert(all_sizes.end(), cbn.hidden_count(), cbn.hidden_domain());
  guarded_product(all_sizes, kStateGuard, "exact enumeration");

  Table t(vars, std::vector<int>(vars.size(), g.alphabet()));
  kernels::dispatch_index(exec, t.cells(), [&](std::size_t idx) {
    std::vector<int> a(vars.size());
    t.decode(idx, a);
    std::vector<int> obs(g.size(), 0);
    for (std::size_t i = 0; i < vars.size(); ++i) obs[vars[i]] = a[i];
    if (x) obs[x->first] = x->second;
    t.values[idx] = joint_mass(cbn, obs, x ? x->first : -1);
  });
  auto names = names_of(g, vars);
  return DenseDistribution(std::move(t), std::move(names));
}

}  // namespace

DenseDistribution exact_observational(const GroundTruthCbn& cbn, Exec exec) {
  return enumerate(cbn, std::nullopt, exec);
}

DenseDistribution exact_interventional(const GroundTruthCbn& cbn, int x_node, int x_val, Exec exec) {
  const Admg& g = cbn.graph();
  if (x_node < 0 || x_node >= g.size()) throw ContractError("intervened node out of range");
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  return enumerate(cbn, std::make_pair(x_node, x_val), exec);
}

std::vector<std::string> names_of(const Admg& g, const std::vector<int>& vars) {
  std::vector<std::string> out;
  out.reserve(vars.size());
  for (int v : vars) out.push_back(g.name(v));
  return out;
}

}  // namespace cbn
