#pragma once

#include <cstdint>
#include <vector>

#include "cbn/dense.hpp"
#include "cbn/graph.hpp"
#include "cbn/kernels.hpp"
#include "cbn/samples.hpp"

namespace cbn {

/// Semi-Markovian causal model: one hidden root per bidirected edge (in the
/// graph's canonical edge order), hidden symbols in [0, hidden_domain).
///
/// The CPT row of node v is indexed in mixed radix over its directed parents
/// (ascending, radix |Σ|) followed by its incident hidden variables (ascending
/// edge index, radix hidden_domain), first most significant.
class GroundTruthCbn {
 public:
  using Row = std::vector<double>;

  GroundTruthCbn(Admg graph, int hidden_domain, std::vector<Row> hidden_priors, std::vector<std::vector<Row>> cpts);

  const Admg& graph() const { return g_; }
  int hidden_domain() const { return hidden_domain_; }
  int hidden_count() const { return static_cast<int>(priors_.size()); }
  const std::vector<Row>& hidden_priors() const { return priors_; }
  const std::vector<std::vector<Row>>& cpts() const { return cpts_; }

  std::size_t row_count(int node) const;
  /// obs is universe-indexed over observables, hidden is indexed by edge.
  std::size_t row_index(int node, const int* obs, const int* hidden) const;
  const Row& row(int node, std::size_t idx) const { return cpts_[node][idx]; }

  bool operator==(const GroundTruthCbn& o) const {
    return g_ == o.g_ && hidden_domain_ == o.hidden_domain_ && priors_ == o.priors_ && cpts_ == o.cpts_;
  }

 private:
  Admg g_;
  int hidden_domain_;
  std::vector<Row> priors_;
  std::vector<std::vector<Row>> cpts_;
};

/// Rows are normalized unit exponentials mixed with uniform: (1-λ)·row + λ/|Σ|.
/// Hidden priors are normalized exponentials.
GroundTruthCbn random_cbn(const Admg& g, int hidden_domain, double lambda, std::uint64_t seed);

/// Ancestral sampling in row blocks with per-block derived seeds; columns are
/// the graph's topological order.
SampleBatch sample_observational(const GroundTruthCbn& cbn, std::size_t m, std::uint64_t seed,
                                 Exec exec = Exec::parallel);

/// Exact joint over all observables (ascending ids), hidden variables summed out.
DenseDistribution exact_observational(const GroundTruthCbn& cbn, Exec exec = Exec::parallel);

/// Truncated factorization: X's factor dropped, X = x_val elsewhere. Result is
/// over V minus X, ascending ids.
DenseDistribution exact_interventional(const GroundTruthCbn& cbn, int x_node, int x_val,
                                       Exec exec = Exec::parallel);

/// The graph's names restricted to vars.
std::vector<std::string> names_of(const Admg& g, const std::vector<int>& vars);

}  // namespace cbn
