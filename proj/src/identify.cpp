#include "cbn/identify.hpp"

#include <cmath>
#include <stdexcept>

#include "cbn/errors.hpp"

namespace cbn {

namespace {

void check_over_graph(const DenseDistribution& p, const Admg& g) {
  if (static_cast<int>(p.vars().size()) != g.size()) {
    throw ContractError("distribution must range over every node of the graph");
  }
  for (int v = 0; v < g.size(); ++v) {
    if (p.vars()[v] != v || p.sizes()[v] != g.alphabet()) {
      throw ContractError("distribution variables must be the graph's nodes in ascending order");
    }
  }
}

std::string describe(const Admg& g, const NodeSet& cond, std::uint64_t key, const FixedValues& fixed) {
  std::vector<int> vals(cond.size());
  for (std::size_t i = cond.size(); i-- > 0;) {
    vals[i] = static_cast<int>(key % g.alphabet());
    key /= g.alphabet();
  }
  std::string out;
  for (std::size_t i = 0; i < cond.size(); ++i) {
    if (!out.empty()) out += ",";
    out += g.name(cond[i]) + "=" + std::to_string(vals[i]);
  }
  for (auto [v, val] : fixed) {
    if (!out.empty()) out += ",";
    out += g.name(v) + "=" + std::to_string(val);
  }
  return out;
}

std::uint64_t key_of(const NodeSet& cond, const int* full, int sigma) {
  std::uint64_t key = 0;
  for (int v : cond) key = key * sigma + full[v];
  return key;
}

}  // namespace

void require_identifiable(const Admg& g, int x_node) {
  const auto r = check_identifiability(g, x_node);
  if (!r.identifiable) {
    throw IdentifiabilityError("P_x is not identifiable for X=" + g.name(x_node) + ": child " +
                               g.name(*r.witness) + " lies in the c-component of X");
  }
}

RowMap exact_conditional_rows(const DenseDistribution& p, const Admg& g, int node, const NodeSet& cond,
                              const FixedValues& fixed, bool strict) {
  const int sigma = g.alphabet();
  std::vector<int> keep = cond;
  for (auto [v, val] : fixed) {
    if (val < 0 || val >= sigma) throw ContractError("fixed value out of range");
    keep.push_back(v);
  }
  keep.push_back(node);
  const Table m = marginalize(p.table(), keep);

  std::uint64_t fixed_offset = 0;
  std::uint64_t fixed_span = 1;
  for (auto [v, val] : fixed) {
    fixed_offset = fixed_offset * sigma + val;
    fixed_span *= sigma;
  }
  std::uint64_t keys = 1;
  for (std::size_t i = 0; i < cond.size(); ++i) keys *= sigma;

  RowMap out;
  for (std::uint64_t key = 0; key < keys; ++key) {
    const double* row = m.values.data() + (key * fixed_span + fixed_offset) * sigma;
    double s = 0.0;
    for (int k = 0; k < sigma; ++k) s += row[k];
    if (s <= 0.0) {
      if (strict) {
        throw PositivityError("zero-probability conditioning event {" + describe(g, cond, key, fixed) +
                              "} for " + g.name(node));
      }
      continue;
    }
    std::vector<double> r(row, row + sigma);
    for (auto& v : r) v /= s;
    out.emplace(key, std::move(r));
  }
  return out;
}

namespace {

Table q_from_rows(const Admg& g, const NodeSet& comp, const std::vector<NodeSet>& conds, const std::vector<RowMap>& rows,
                  const NodeSet& over, Exec exec) {
  Table t(over, std::vector<int>(over.size(), g.alphabet()));
  kernels::dispatch_index(exec, t.cells(), [&](std::size_t idx) {
    std::vector<int> a(over.size()), full(g.size(), 0);
    t.decode(idx, a);
    for (std::size_t i = 0; i < over.size(); ++i) full[over[i]] = a[i];
    double q = 1.0;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      const auto& row = rows[i].at(key_of(conds[i], full.data(), g.alphabet()));
      q *= row[full[comp[i]]];
    }
    t.values[idx] = q;
  });
  return t;
}

}  // namespace

Table compute_q_factor(const DenseDistribution& p, const Admg& g, int component, Exec exec) {
  check_over_graph(p, g);
  const auto cc = c_components(g);
  if (component < 0 || component >= static_cast<int>(cc.components.size())) {
    throw ContractError("component index out of range");
  }
  const NodeSet& comp = cc.components[component];
  const auto ep = effective_parents(g);
  std::vector<NodeSet> conds;
  std::vector<RowMap> rows;
  for (int v : comp) {
    conds.push_back(ep.sets[v]);
    rows.push_back(exact_conditional_rows(p, g, v, ep.sets[v], {}, true));
  }
  return q_from_rows(g, comp, conds, rows, parent_sets(g, comp).pa_plus, exec);
}

Table q_factor_prefix(const DenseDistribution& p, const Admg& g, int component, Exec exec) {
  check_over_graph(p, g);
  const auto cc = c_components(g);
  if (component < 0 || component >= static_cast<int>(cc.components.size())) {
    throw ContractError("component index out of range");
  }
  const NodeSet& comp = cc.components[component];
  std::vector<NodeSet> conds;
  std::vector<RowMap> rows;
  for (int v : comp) {
    NodeSet pred(g.order().begin(), g.order().begin() + g.position()[v]);
    pred = make_set(std::move(pred));
    conds.push_back(pred);
    rows.push_back(exact_conditional_rows(p, g, v, pred, {}, true));
  }
  NodeSet all(g.size());
  for (int v = 0; v < g.size(); ++v) all[v] = v;
  return q_from_rows(g, comp, conds, rows, all, exec);
}

DenseDistribution tian_pearl_do(const DenseDistribution& p, const Admg& g, int x_node, int x_val, Exec exec) {
  check_over_graph(p, g);
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  require_identifiable(g, x_node);
  const auto cc = c_components(g);
  const int s1 = cc.component_of[x_node];
  std::vector<Table> q;
  for (std::size_t j = 0; j < cc.components.size(); ++j) q.push_back(compute_q_factor(p, g, static_cast<int>(j), exec));

  std::vector<int> w;
  for (int v = 0; v < g.size(); ++v) {
    if (v != x_node) w.push_back(v);
  }
  Table out(w, std::vector<int>(w.size(), g.alphabet()));
  kernels::dispatch_index(exec, out.cells(), [&](std::size_t idx) {
    std::vector<int> a(w.size()), full(g.size(), 0);
    out.decode(idx, a);
    for (std::size_t i = 0; i < w.size(); ++i) full[w[i]] = a[i];
    double first = 0.0;
    for (int xp = 0; xp < g.alphabet(); ++xp) {
      full[x_node] = xp;
      first += q[s1].values[q[s1].index_from_full(full)];
    }
    full[x_node] = x_val;
    double rest = 1.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (static_cast<int>(j) != s1) rest *= q[j].values[q[j].index_from_full(full)];
    }
    out.values[idx] = first * rest;
  });
  const double total = out.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error("identification formula sums to " + std::to_string(total));
  }
  std::vector<std::string> names;
  for (int v : w) names.push_back(g.name(v));
  return DenseDistribution(std::move(out), std::move(names));
}

DenseDistribution exact_dx(const DenseDistribution& p, const Admg& g, int x_node, int x_val, Exec exec) {
  check_over_graph(p, g);
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  require_identifiable(g, x_node);
  const auto cc = c_components(g);
  const NodeSet& s1 = cc.of(x_node);
  const auto ep = effective_parents(g);

  std::vector<NodeSet> conds(g.size());
  std::vector<RowMap> rows(g.size());
  for (int v = 0; v < g.size(); ++v) {
    const NodeSet& z = ep.sets[v];
    if (!contains(s1, v) && contains(z, x_node)) {
      conds[v] = set_difference(z, NodeSet{x_node});
      rows[v] = exact_conditional_rows(p, g, v, conds[v], {{x_node, x_val}}, true);
    } else {
      conds[v] = z;
      rows[v] = exact_conditional_rows(p, g, v, z, {}, true);
    }
  }
  NodeSet all(g.size());
  for (int v = 0; v < g.size(); ++v) all[v] = v;
  Table out(all, std::vector<int>(all.size(), g.alphabet()));
  kernels::dispatch_index(exec, out.cells(), [&](std::size_t idx) {
    std::vector<int> full(g.size());
    out.decode(idx, full);
    double d = 1.0;
    for (int v = 0; v < g.size(); ++v) d *= rows[v].at(key_of(conds[v], full.data(), g.alphabet()))[full[v]];
    out.values[idx] = d;
  });
  return DenseDistribution(std::move(out), g.names());
}

}  // namespace cbn
