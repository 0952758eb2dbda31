#include "cbn/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "cbn/errors.hpp"
#include "cbn/rng.hpp"

namespace cbn {

namespace {

std::string edge_text(int a, int b, const char* arrow) {
  return std::to_string(a) + arrow + std::to_string(b);
}

void check_node(int v, int n, const char* what) {
  if (v < 0 || v >= n) {
    throw StructuralError(std::string(what) + ": node " + std::to_string(v) + " out of range [0," +
                          std::to_string(n) + ")");
  }
}

// Follows unprocessed parents from `start` until a node repeats; returns one
// edge of the cycle found.
Edge find_cycle_edge(int n, const std::vector<Edge>& directed, const std::vector<bool>& done, int start) {
  std::vector<std::vector<int>> parents(n);
  for (auto [a, b] : directed) {
    if (!done[a] && !done[b]) parents[b].push_back(a);
  }
  std::vector<int> seen_at(n, -1);
  std::vector<int> path;
  int v = start;
  while (seen_at[v] < 0) {
    seen_at[v] = static_cast<int>(path.size());
    path.push_back(v);
    v = *std::min_element(parents[v].begin(), parents[v].end());
  }
  // v is a parent of path.back() and already on the walk
  return {v, path.back()};
}

}  // namespace

std::vector<int> topological_order(int node_count, const std::vector<Edge>& directed) {
  std::vector<int> indegree(node_count, 0);
  std::vector<std::vector<int>> children(node_count);
  for (auto [a, b] : directed) {
    check_node(a, node_count, "directed edge");
    check_node(b, node_count, "directed edge");
    children[a].push_back(b);
    ++indegree[b];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < node_count; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(node_count);
  std::vector<bool> done(node_count, false);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    done[v] = true;
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) != node_count) {
    int start = 0;
    while (done[start]) ++start;
    auto [a, b] = find_cycle_edge(node_count, directed, done, start);
    throw StructuralError("directed cycle through edge " + edge_text(a, b, "->"));
  }
  return order;
}

std::vector<int> topological_order(const Admg& g) { return g.order(); }

Admg::Admg(int node_count, int alphabet_size, std::vector<Edge> directed, std::vector<Edge> bidirected,
           std::vector<std::string> names)
    : n_(node_count), alphabet_(alphabet_size) {
  if (n_ < 1) throw StructuralError("graph must have at least one node");
  if (alphabet_ < 2) throw StructuralError("alphabet size must be at least 2");
  if (names.empty()) {
    for (int v = 0; v < n_; ++v) names.push_back("V" + std::to_string(v));
  }
  if (static_cast<int>(names.size()) != n_) {
    throw StructuralError("expected " + std::to_string(n_) + " names, got " + std::to_string(names.size()));
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : names) {
      if (s.empty()) throw StructuralError("empty node name");
      if (!seen.insert(s).second) throw StructuralError("duplicate node name '" + s + "'");
    }
  }
  names_ = std::move(names);

  for (auto [a, b] : directed) {
    check_node(a, n_, "directed edge");
    check_node(b, n_, "directed edge");
    if (a == b) throw StructuralError("self-loop " + edge_text(a, b, "->"));
  }
  for (auto& e : bidirected) {
    check_node(e.first, n_, "bidirected edge");
    check_node(e.second, n_, "bidirected edge");
    if (e.first == e.second) throw StructuralError("self-loop " + edge_text(e.first, e.second, "<->"));
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  std::sort(bidirected.begin(), bidirected.end());
  bidirected.erase(std::unique(bidirected.begin(), bidirected.end()), bidirected.end());
  directed_ = std::move(directed);
  bidirected_ = std::move(bidirected);

  order_ = topological_order(n_, directed_);
  position_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) position_[order_[i]] = i;

  parents_.assign(n_, {});
  children_.assign(n_, {});
  siblings_.assign(n_, {});
  incident_.assign(n_, {});
  for (auto [a, b] : directed_) {
    parents_[b].push_back(a);
    children_[a].push_back(b);
  }
  for (std::size_t e = 0; e < bidirected_.size(); ++e) {
    auto [a, b] = bidirected_[e];
    siblings_[a].push_back(b);
    siblings_[b].push_back(a);
    incident_[a].push_back(static_cast<int>(e));
    incident_[b].push_back(static_cast<int>(e));
  }
  for (int v = 0; v < n_; ++v) {
    parents_[v] = make_set(parents_[v]);
    children_[v] = make_set(children_[v]);
    siblings_[v] = make_set(siblings_[v]);
  }
}

std::optional<int> Admg::index_of(const std::string& name) const {
  for (int v = 0; v < n_; ++v) {
    if (names_[v] == name) return v;
  }
  return std::nullopt;
}

int Admg::max_in_degree() const {
  std::size_t d = 0;
  for (const auto& p : parents_) d = std::max(d, p.size());
  return static_cast<int>(d);
}

std::size_t CComponentPartition::max_size() const {
  std::size_t k = 0;
  for (const auto& c : components) k = std::max(k, c.size());
  return k;
}

CComponentPartition c_components_induced(const Admg& g, const NodeSet& nodes) {
  const int n = g.size();
  std::vector<bool> inside(n, false);
  for (int v : nodes) {
    check_node(v, n, "c_components");
    inside[v] = true;
  }
  CComponentPartition out;
  out.component_of.assign(n, -1);
  for (int v : nodes) {  // ascending, so components come out ordered by minimum
    if (out.component_of[v] >= 0) continue;
    const int id = static_cast<int>(out.components.size());
    NodeSet comp;
    std::vector<int> stack{v};
    out.component_of[v] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int s : g.siblings(u)) {
        if (inside[s] && out.component_of[s] < 0) {
          out.component_of[s] = id;
          stack.push_back(s);
        }
      }
    }
    out.components.push_back(make_set(std::move(comp)));
  }
  return out;
}

CComponentPartition c_components(const Admg& g) {
  NodeSet all(g.size());
  std::iota(all.begin(), all.end(), 0);
  return c_components_induced(g, all);
}

ParentSets parent_sets(const Admg& g, const NodeSet& s) {
  ParentSets out;
  for (int v : s) {
    check_node(v, g.size(), "parent_sets");
    out.pa.insert(out.pa.end(), g.parents(v).begin(), g.parents(v).end());
  }
  out.pa = make_set(std::move(out.pa));
  out.pa_plus = set_union(out.pa, make_set(s));
  out.pa_minus = set_difference(out.pa, make_set(s));
  return out;
}

EffectiveParents effective_parents(const Admg& g) {
  EffectiveParents out;
  out.order = g.order();
  out.sets.assign(g.size(), {});
  out.k = static_cast<int>(c_components(g).max_size());
  out.d = g.max_in_degree();

  NodeSet prefix;
  for (std::size_t i = 0; i < out.order.size(); ++i) {
    const int v = out.order[i];
    NodeSet predecessors = prefix;
    prefix = set_union(prefix, NodeSet{v});
    const auto cc = c_components_induced(g, prefix);
    const NodeSet& t = cc.of(v);
    out.sets[v] = set_intersection(parent_sets(g, t).pa_plus, predecessors);
    out.max_set_size = std::max(out.max_set_size, out.sets[v].size());
  }
  if (static_cast<int>(out.max_set_size) > out.bound()) {
    throw std::logic_error("effective parent set exceeds kd+k-1");
  }
  return out;
}

Identifiability check_identifiability(const Admg& g, int x) {
  check_node(x, g.size(), "check_identifiability");
  const auto cc = c_components(g);
  const NodeSet& s1 = cc.of(x);
  for (int c : g.children(x)) {
    if (contains(s1, c)) return {false, c};
  }
  return {true, std::nullopt};
}

LatentGraph::LatentGraph(int node_count, std::vector<bool> observable, std::vector<Edge> directed, int alphabet,
                         std::vector<std::string> names)
    : n_(node_count), alphabet_(alphabet), observable_(std::move(observable)) {
  if (static_cast<int>(observable_.size()) != n_) throw StructuralError("observable flag count mismatch");
  for (auto [a, b] : directed) {
    check_node(a, n_, "latent edge");
    check_node(b, n_, "latent edge");
    if (a == b) throw StructuralError("self-loop " + edge_text(a, b, "->"));
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  topological_order(n_, directed);
  directed_ = std::move(directed);
  if (names.empty()) {
    for (int v = 0; v < n_; ++v) names.push_back("V" + std::to_string(v));
  }
  if (static_cast<int>(names.size()) != n_) throw StructuralError("latent graph name count mismatch");
  names_ = std::move(names);
  children_.assign(n_, {});
  for (auto [a, b] : directed_) children_[a].push_back(b);
  for (auto& c : children_) c = make_set(std::move(c));
  for (int v = 0; v < n_; ++v) {
    if (observable_[v]) observables_.push_back(v);
  }
  if (observables_.empty()) throw StructuralError("latent graph has no observable node");
}

LatentGraph to_latent_graph(const Admg& g, const std::vector<bool>& hidden_mask) {
  const int n = g.size();
  const int total = n + static_cast<int>(g.bidirected().size());
  std::vector<bool> observable(total, false);
  for (int v = 0; v < n; ++v) observable[v] = hidden_mask.empty() || !hidden_mask.at(v);
  std::vector<Edge> edges = g.directed();
  std::vector<std::string> names = g.names();
  for (std::size_t e = 0; e < g.bidirected().size(); ++e) {
    const int u = n + static_cast<int>(e);
    edges.emplace_back(u, g.bidirected()[e].first);
    edges.emplace_back(u, g.bidirected()[e].second);
    names.push_back("_U" + std::to_string(e));
  }
  return LatentGraph(total, std::move(observable), std::move(edges), g.alphabet(), std::move(names));
}

Admg latent_project(const LatentGraph& g) {
  const int n = g.size();
  std::vector<int> to_obs(n, -1);
  const auto& obs = g.observables();
  for (std::size_t i = 0; i < obs.size(); ++i) to_obs[obs[i]] = static_cast<int>(i);

  // Observables reachable from `start` along directed paths whose interior is hidden.
  auto reach = [&](int start) {
    NodeSet found;
    std::vector<bool> visited(n, false);
    std::vector<int> stack{start};
    visited[start] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int c : g.children(u)) {
        if (g.observable(c)) {
          found.push_back(c);
        } else if (!visited[c]) {
          visited[c] = true;
          stack.push_back(c);
        }
      }
    }
    return make_set(std::move(found));
  };

  std::vector<Edge> directed, bidirected;
  for (int v : obs) {
    for (int c : reach(v)) directed.emplace_back(to_obs[v], to_obs[c]);
  }
  for (int u = 0; u < n; ++u) {
    if (g.observable(u)) continue;
    const NodeSet r = reach(u);
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t j = i + 1; j < r.size(); ++j) bidirected.emplace_back(to_obs[r[i]], to_obs[r[j]]);
    }
  }
  std::vector<std::string> names;
  for (int v : obs) names.push_back(g.names()[v]);
  return Admg(static_cast<int>(obs.size()), g.alphabet(), std::move(directed), std::move(bidirected),
              std::move(names));
}

Admg induced_subgraph(const Admg& g, const NodeSet& nodes) {
  std::vector<int> to_sub(g.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    check_node(nodes[i], g.size(), "induced_subgraph");
    to_sub[nodes[i]] = static_cast<int>(i);
  }
  std::vector<Edge> directed, bidirected;
  for (auto [a, b] : g.directed()) {
    if (to_sub[a] >= 0 && to_sub[b] >= 0) directed.emplace_back(to_sub[a], to_sub[b]);
  }
  for (auto [a, b] : g.bidirected()) {
    if (to_sub[a] >= 0 && to_sub[b] >= 0) bidirected.emplace_back(to_sub[a], to_sub[b]);
  }
  std::vector<std::string> names;
  for (int v : nodes) names.push_back(g.name(v));
  return Admg(static_cast<int>(nodes.size()), g.alphabet(), std::move(directed), std::move(bidirected),
              std::move(names));
}

Reduction reduce_for_marginal(const Admg& g, int x, const NodeSet& f_in) {
  check_node(x, g.size(), "reduce_for_marginal");
  const NodeSet f = make_set(f_in);
  for (int v : f) {
    check_node(v, g.size(), "reduce_for_marginal");
    if (v == x) throw ContractError("target set must not contain the intervened node");
  }
  const auto ident = check_identifiability(g, x);
  if (!ident.identifiable) {
    throw IdentifiabilityError("intervention on " + g.name(x) + " is not identifiable: child " +
                               g.name(*ident.witness) + " shares its c-component");
  }
  const auto cc = c_components(g);
  const NodeSet& s1 = cc.of(x);
  const NodeSet pa_plus = parent_sets(g, s1).pa_plus;
  const NodeSet w = set_union(f, pa_plus);

  std::vector<bool> hidden(g.size(), true);
  for (int v : w) hidden[v] = false;
  const LatentGraph lg = to_latent_graph(g, hidden);

  Reduction out{latent_project(lg), w, std::vector<int>(g.size(), -1), {}};
  for (std::size_t i = 0; i < w.size(); ++i) out.to_h[w[i]] = static_cast<int>(i);

  auto to_original = [&](const NodeSet& s) {
    NodeSet r;
    for (int v : s) r.push_back(w[v]);
    return make_set(std::move(r));
  };
  auto to_h = [&](const NodeSet& s) {
    NodeSet r;
    for (int v : s) r.push_back(out.to_h[v]);
    return make_set(std::move(r));
  };

  const Admg& h = out.h;
  const int xh = out.to_h[x];
  const auto cch = c_components(h);
  const NodeSet comp_h = to_original(cch.of(xh));
  auto& rep = out.report;
  rep.s1_preserved = comp_h == s1;
  rep.identifiable_in_h = check_identifiability(h, xh).identifiable;
  rep.pa_plus_preserved = to_original(parent_sets(h, to_h(s1)).pa_plus) == pa_plus;
  rep.positivity_preserved = to_original(parent_sets(h, cch.of(xh)).pa_plus) == pa_plus;
  const int k = static_cast<int>(cc.max_size());
  const int d = g.max_in_degree();
  const int fs = static_cast<int>(f.size());
  rep.in_degree = h.max_in_degree();
  rep.in_degree_bound = fs + k * (d + 1);
  rep.max_component = 0;
  for (std::size_t c = 0; c < cch.components.size(); ++c) {
    if (static_cast<int>(c) != cch.component_of[xh]) {
      rep.max_component = std::max(rep.max_component, static_cast<int>(cch.components[c].size()));
    }
  }
  rep.component_bound = fs + k * d;
  rep.s1_size = static_cast<int>(cch.of(xh).size());
  rep.s1_bound = k;
  return out;
}

NodeSet ancestors_inclusive(const Admg& g, const NodeSet& f) {
  std::vector<bool> seen(g.size(), false);
  std::vector<int> stack;
  for (int v : f) {
    check_node(v, g.size(), "ancestors");
    if (!seen[v]) {
      seen[v] = true;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : g.parents(v)) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  NodeSet out;
  for (int v = 0; v < g.size(); ++v) {
    if (seen[v]) out.push_back(v);
  }
  return out;
}

Pruned prune_to_ancestors(const Admg& g, const NodeSet& f) {
  NodeSet kept = ancestors_inclusive(g, f);
  return {induced_subgraph(g, kept), kept};
}

Admg random_admg(int node_count, int max_in_degree, int max_component, int alphabet, std::uint64_t seed) {
  if (node_count < 1 || max_in_degree < 0 || max_component < 1) {
    throw ContractError("random_admg: need nodes >= 1, in-degree >= 0, c-component size >= 1");
  }
  Rng rng(seed);
  std::vector<int> slot(node_count);  // slot[p] = node at topological position p
  std::iota(slot.begin(), slot.end(), 0);
  rng.shuffle(slot);

  std::vector<Edge> directed;
  for (int p = 1; p < node_count; ++p) {
    const int cap = std::min(max_in_degree, p);
    const int indeg = static_cast<int>(rng.below(static_cast<std::size_t>(cap) + 1));
    std::vector<int> earlier(slot.begin(), slot.begin() + p);
    rng.shuffle(earlier);
    for (int j = 0; j < indeg; ++j) directed.emplace_back(earlier[j], slot[p]);
  }

  std::vector<int> nodes(node_count);
  std::iota(nodes.begin(), nodes.end(), 0);
  rng.shuffle(nodes);
  std::vector<Edge> bidirected;
  std::size_t i = 0;
  while (i < nodes.size()) {
    const std::size_t remaining = nodes.size() - i;
    const std::size_t size =
        1 + rng.below(std::min<std::size_t>(static_cast<std::size_t>(max_component), remaining));
    for (std::size_t j = 1; j < size; ++j) {
      const std::size_t partner = i + rng.below(j);
      bidirected.emplace_back(nodes[partner], nodes[i + j]);
    }
    i += size;
  }
  return Admg(node_count, alphabet, std::move(directed), std::move(bidirected));
}

Admg random_identifiable_admg(int node_count, int max_in_degree, int max_component, int alphabet, int x,
                              std::uint64_t seed, int max_tries) {
  check_node(x, node_count, "random_identifiable_admg");
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Admg g = random_admg(node_count, max_in_degree, max_component, alphabet, derive_seed(seed, attempt));
    if (check_identifiability(g, x).identifiable) return g;
  }
  throw ContractError("no identifiable graph found within " + std::to_string(max_tries) + " attempts");
}

}  // namespace cbn
