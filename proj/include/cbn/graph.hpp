#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbn/sets.hpp"

namespace cbn {

using Edge = std::pair<int, int>;

/// Acyclic directed mixed graph over observable variables sharing one finite
/// alphabet. Nodes are identified by index; names are display metadata.
///
/// Construction validates every invariant (range, self-loops, distinct names,
/// acyclicity) and canonicalizes edge lists: directed edges sorted, bidirected
/// edges stored as (min, max) and sorted. Instances are immutable.
class Admg {
 public:
  Admg(int node_count, int alphabet_size, std::vector<Edge> directed, std::vector<Edge> bidirected,
       std::vector<std::string> names = {});

  int size() const { return n_; }
  int alphabet() const { return alphabet_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int v) const { return names_.at(v); }
  std::optional<int> index_of(const std::string& name) const;

  const std::vector<Edge>& directed() const { return directed_; }
  const std::vector<Edge>& bidirected() const { return bidirected_; }

  const NodeSet& parents(int v) const { return parents_.at(v); }
  const NodeSet& children(int v) const { return children_.at(v); }
  /// Endpoints of bidirected edges incident to v.
  const NodeSet& siblings(int v) const { return siblings_.at(v); }
  /// Indices (into bidirected()) of the bidirected edges incident to v.
  const std::vector<int>& incident_bidirected(int v) const { return incident_.at(v); }

  /// Topological order, ties broken by ascending index.
  const std::vector<int>& order() const { return order_; }
  /// Position of each node in order().
  const std::vector<int>& position() const { return position_; }

  int max_in_degree() const;

  bool operator==(const Admg& other) const {
    return n_ == other.n_ && alphabet_ == other.alphabet_ && names_ == other.names_ &&
           directed_ == other.directed_ && bidirected_ == other.bidirected_;
  }

 private:
  int n_;
  int alphabet_;
  std::vector<std::string> names_;
  std::vector<Edge> directed_;
  std::vector<Edge> bidirected_;
  std::vector<NodeSet> parents_, children_, siblings_;
  std::vector<std::vector<int>> incident_;
  std::vector<int> order_, position_;
};

/// Kahn's algorithm with a min-heap. Throws StructuralError naming one edge
/// that lies on a directed cycle.
std::vector<int> topological_order(int node_count, const std::vector<Edge>& directed);
std::vector<int> topological_order(const Admg& g);

struct CComponentPartition {
  std::vector<NodeSet> components;  // ascending by minimum element
  std::vector<int> component_of;    // node -> component index

  std::size_t max_size() const;
  const NodeSet& of(int v) const { return components.at(component_of.at(v)); }
};

CComponentPartition c_components(const Admg& g);

/// c-components of the subgraph induced on `nodes` (bidirected edges only).
CComponentPartition c_components_induced(const Admg& g, const NodeSet& nodes);

struct ParentSets {
  NodeSet pa;
  NodeSet pa_plus;
  NodeSet pa_minus;
};

ParentSets parent_sets(const Admg& g, const NodeSet& s);

/// Conditioning sets that turn the observational distribution into a
/// hidden-free Bayes net. For the i-th node V_i of the topological order,
/// Z_i = Pa+(T_i) minus V_i intersected with its predecessors, where T_i is
/// the c-component containing V_i in the subgraph induced by the first i nodes.
struct EffectiveParents {
  std::vector<int> order;
  std::vector<NodeSet> sets;  // indexed by node
  int k = 0;                  // max c-component size
  int d = 0;                  // max in-degree
  std::size_t max_set_size = 0;

  int bound() const { return k * d + k - 1; }
};

EffectiveParents effective_parents(const Admg& g);

struct Identifiability {
  bool identifiable = true;
  std::optional<int> witness;  // a child of x inside x's c-component
};

/// True iff no directed child of x lies in x's c-component.
Identifiability check_identifiability(const Admg& g, int x);

/// General DAG whose nodes are flagged observable or hidden.
class LatentGraph {
 public:
  LatentGraph(int node_count, std::vector<bool> observable, std::vector<Edge> directed, int alphabet,
              std::vector<std::string> names = {});

  int size() const { return n_; }
  int alphabet() const { return alphabet_; }
  bool observable(int v) const { return observable_.at(v); }
  const std::vector<bool>& observable_flags() const { return observable_; }
  const std::vector<Edge>& directed() const { return directed_; }
  const std::vector<std::string>& names() const { return names_; }
  const NodeSet& children(int v) const { return children_.at(v); }
  /// Observable nodes in ascending order; their position is the node index in
  /// the projected ADMG.
  const std::vector<int>& observables() const { return observables_; }

 private:
  int n_;
  int alphabet_;
  std::vector<bool> observable_;
  std::vector<Edge> directed_;
  std::vector<std::string> names_;
  std::vector<NodeSet> children_;
  std::vector<int> observables_;
};

/// Realizes each bidirected edge of g as a hidden root with two children;
/// nodes of g with hidden_mask set become hidden too.
LatentGraph to_latent_graph(const Admg& g, const std::vector<bool>& hidden_mask);

/// Latent projection onto the observable nodes.
Admg latent_project(const LatentGraph& g);

/// Sub-ADMG induced on `nodes`; node i of the result is nodes[i].
Admg induced_subgraph(const Admg& g, const NodeSet& nodes);

struct ReductionReport {
  bool s1_preserved = false;         // c-component of x in h equals S_1
  bool identifiable_in_h = false;    // assumption 1 holds in h
  bool pa_plus_preserved = false;    // Pa+(S_1) identical in g and h
  bool positivity_preserved = false; // positivity set of x in h equals Pa+_g(S_1)
  int in_degree = 0;
  int in_degree_bound = 0;  // f + k(d+1)
  int max_component = 0;     // largest c-component of h other than S_1
  int component_bound = 0;   // f + kd
  int s1_size = 0;
  int s1_bound = 0;          // k

  bool all_hold() const {
    return s1_preserved && identifiable_in_h && pa_plus_preserved && positivity_preserved &&
           in_degree <= in_degree_bound && max_component <= component_bound && s1_size <= s1_bound;
  }
};

struct Reduction {
  Admg h;
  NodeSet w;                 // original ids; node i of h is w[i]
  std::vector<int> to_h;     // original id -> index in h, or -1
  ReductionReport report;
};

/// Marks V \ (f u Pa+(S_1)) hidden and projects. Throws IdentifiabilityError
/// when assumption 1 fails in g.
Reduction reduce_for_marginal(const Admg& g, int x, const NodeSet& f);

struct Pruned {
  Admg graph;
  NodeSet kept;  // original ids; node i of graph is kept[i]
};

/// Restriction to the observable ancestors of f, f included.
Pruned prune_to_ancestors(const Admg& g, const NodeSet& f);

/// Observable ancestors of f including f.
NodeSet ancestors_inclusive(const Admg& g, const NodeSet& f);

/// Random ADMG: directed in-degree at most max_in_degree, c-components of size
/// at most max_component; topological positions are a random permutation.
Admg random_admg(int node_count, int max_in_degree, int max_component, int alphabet, std::uint64_t seed);

/// Rejection-samples random_admg until assumption 1 holds for x.
Admg random_identifiable_admg(int node_count, int max_in_degree, int max_component, int alphabet, int x,
                              std::uint64_t seed, int max_tries = 10000);

}  // namespace cbn
