#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbn/bayesnet.hpp"
#include "cbn/dense.hpp"
#include "cbn/graph.hpp"
#include "cbn/kernels.hpp"
#include "cbn/learn.hpp"
#include "cbn/samples.hpp"

namespace cbn {

/// D_x plus the intervention it was built for.
class InterventionalModel {
 public:
  InterventionalModel(BayesNetModel dx, int x_node, int x_val);

  const BayesNetModel& dx() const { return dx_; }
  int x_node() const { return x_; }
  int x_val() const { return xv_; }

 private:
  BayesNetModel dx_;
  int x_;
  int xv_;
};

/// Sum over x' of D_x(w∘x'); `full` is universe-indexed, its X entry ignored.
double evaluate_do(const InterventionalModel& im, std::span<const int> full);

/// Ancestral draws from the model; columns in factor order.
SampleBatch sample_model(const BayesNetModel& model, std::size_t count, std::uint64_t seed,
                         Exec exec = Exec::parallel);

/// Draws from D_x with the X column dropped.
SampleBatch sample_do(const InterventionalModel& im, std::size_t count, std::uint64_t seed,
                      Exec exec = Exec::parallel);

/// Joint of the model's nodes by enumeration, marginalized to keep (ascending).
DenseDistribution model_to_dense(const BayesNetModel& model, const NodeSet& keep, Exec exec = Exec::parallel);

/// The learned P_x as a dense table over the modeled nodes minus X.
DenseDistribution interventional_dense(const InterventionalModel& im, Exec exec = Exec::parallel);

/// Empirical distribution of a batch over `vars` (ascending ids).
DenseDistribution empirical(const SampleBatch& b, const NodeSet& vars);

/// Second evaluator: M'_b over S_1 for each b in Σ^|B|, R'_a over V minus S_1
/// for each a in Σ^|A|, with A = S_1 minus X, B = Pa-(S_1), C the rest.
struct MrEvaluator {
  int x_node = 0;
  int x_val = 0;
  int alphabet = 2;
  NodeSet s1, a_vars, b_vars, c_vars;
  std::vector<BayesNetModel> m_tables;  // by mixed-radix key of b
  std::vector<BayesNetModel> r_tables;  // by mixed-radix key of a
};

inline constexpr std::uint64_t kMrGuard = std::uint64_t{1} << 16;

MrEvaluator build_mr_evaluator(const ConditionalSource& src, const Admg& g, int x_node, int x_val, int threshold);
MrEvaluator build_mr_evaluator(const SampleBatch& samples, const Admg& g, int x_node, int x_val,
                               const LearnConfig& cfg);

/// (Σ_x' M'_b(a, x')) · R'_a(b, c).
double evaluate_mr(const MrEvaluator& mr, std::span<const int> full);

struct MarginalOptions {
  bool via_generator = false;
  double generator_constant = 1.0;     // draws = ceil(c |Σ|^|f| / ε²)
  std::uint64_t generator_draws = 0;   // overrides the formula when nonzero
};

struct MarginalResult {
  DenseDistribution dist;  // over f, original ids
  Admg reduced;            // h
  NodeSet w;               // original ids of h's nodes
  ReductionReport report;
  std::uint64_t draws = 0; // generator path only
};

/// P_x restricted to f via ancestor pruning and reduction (or, with
/// via_generator, sampling the full learned model).
MarginalResult learn_marginal_do(const SampleBatch& samples, const Admg& g, int x_node, int x_val, const NodeSet& f,
                                 const LearnConfig& cfg, const MarginalOptions& opts = {});

/// Same construction fed with the exact observational distribution; equals
/// the exact marginal of P_x when the reduction is sound.
MarginalResult exact_marginal_do(const DenseDistribution& p, const Admg& g, int x_node, int x_val, const NodeSet& f);

}  // namespace cbn
