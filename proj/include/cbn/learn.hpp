#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cbn/bayesnet.hpp"
#include "cbn/dense.hpp"
#include "cbn/graph.hpp"
#include "cbn/kernels.hpp"
#include "cbn/samples.hpp"

namespace cbn {

/// (c_i + 1) / (z + |Σ|).
std::vector<double> add_one_estimator(std::span<const std::int64_t> counts);

struct TheoryParameters {
  double m_exact = 0;       // 20 n Σ^{kd+k+2} ln(n Σ^{kd+k}) / (α^k ε²)
  std::uint64_t m = 0;      // ceil of m_exact, saturated
  int t = 0;                // ceil(10 ln(n Σ^{kd+k}))
  int t_practical = 0;      // max(10, t)
  double m_headline = 0;    // Σ^{2kd} n / (α^k ε²), documentation only
};

TheoryParameters default_parameters(int n, int sigma, int k, int d, double alpha, double epsilon);

struct LearnConfig {
  std::uint64_t m = 1;
  int t = 1;
  double epsilon = 0.1;
  double delta = 0.05;
  std::optional<double> alpha;
  std::uint64_t seed = 0;

  void validate() const;
};

/// What a learner is asked to fit for one node.
struct FactorSpec {
  int node = 0;
  NodeSet cond;
  FixedValues fixed;
  int threshold = 0;  // rows seen fewer times stay uniform; 0 disables
};

struct FitStats {
  std::size_t fitted = 0;           // rows estimated from data
  std::size_t below_threshold = 0;  // observed rows left uniform
  std::size_t key_space = 0;        // |Σ|^{|cond|}, saturated
};

struct LearnDiagnostics {
  std::vector<FitStats> per_factor;  // in factor order

  std::size_t fitted() const;
  std::size_t below_threshold() const;
};

/// Supplies conditional rows to the learners.
class ConditionalSource {
 public:
  virtual ~ConditionalSource() = default;
  virtual RowMap fit(const FactorSpec& spec, FitStats& stats) const = 0;
};

/// Add-1 estimates from the first `rows` rows of a batch.
class SampleSource : public ConditionalSource {
 public:
  SampleSource(const SampleBatch& batch, std::size_t rows, Exec exec = Exec::parallel);
  RowMap fit(const FactorSpec& spec, FitStats& stats) const override;

 private:
  const SampleBatch& batch_;
  std::size_t rows_;
  Exec exec_;
};

/// Exact conditionals of a dense distribution over the graph's nodes; rows
/// on zero-mass events are left uniform.
class ExactSource : public ConditionalSource {
 public:
  ExactSource(const DenseDistribution& p, const Admg& g) : p_(p), g_(g) {}
  ExactSource(DenseDistribution&&, const Admg&) = delete;
  RowMap fit(const FactorSpec& spec, FitStats& stats) const override;

 private:
  const DenseDistribution& p_;
  const Admg& g_;
};

/// Effective-parent Bayes net for P.
BayesNetModel learn_observational(const ConditionalSource& src, const Admg& g, int threshold,
                                  LearnDiagnostics* diag = nullptr);
BayesNetModel learn_observational(const SampleBatch& samples, const Admg& g, int threshold = 1);

/// Learns D_x: S_1 factors without threshold, other factors with threshold t,
/// X replaced by x in factors outside S_1.
BayesNetModel learn_do(const ConditionalSource& src, const Admg& g, int x_node, int x_val, int threshold,
                       LearnDiagnostics* diag = nullptr);
/// Uses the first cfg.m rows.
BayesNetModel learn_do(const SampleBatch& samples, const Admg& g, int x_node, int x_val, const LearnConfig& cfg,
                       LearnDiagnostics* diag = nullptr);

/// Model over Y of P_{ȳ}(Y), where ȳ assigns Pa-(Y).
BayesNetModel learn_ccomponent_intervention(const ConditionalSource& src, const Admg& g, const NodeSet& y_set,
                                            const FixedValues& y_bar, int threshold,
                                            LearnDiagnostics* diag = nullptr);

/// Minimum empirical mass over assignments of Pa+(S_1) in the first rows.
double estimate_alpha(const SampleBatch& samples, std::size_t rows, const Admg& g, int x_node);

using Learner = std::function<BayesNetModel(const SampleBatch& slice, std::uint64_t seed)>;

/// Median over 5 holdout blocks of the mean negative log-likelihood, each
/// factor contributing where its fixed values match the row; probabilities
/// are floored at `floor`.
double holdout_score(const BayesNetModel& model, const SampleBatch& holdout, double floor);

struct Selection {
  std::size_t index = 0;
  std::vector<double> scores;
};

/// Argmin of holdout_score, ties to the lowest index.
Selection select_candidate(const std::vector<BayesNetModel>& candidates, const SampleBatch& holdout, double floor);

struct Amplified {
  BayesNetModel model;
  Selection selection;
};

/// Runs the learner on `reps` disjoint slices of train (derived seeds) and
/// keeps the candidate with the best holdout score. reps = 1 uses all of train.
Amplified amplify(const Learner& learner, int reps, const SampleBatch& train, const SampleBatch& holdout,
                  std::uint64_t seed);

}  // namespace cbn
