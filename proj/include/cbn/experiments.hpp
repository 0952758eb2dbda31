#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cbn/learn.hpp"
#include "cbn/model.hpp"

namespace cbn {

/// Lower-bound construction. Node ids: Z = 0, X = 1, W_1..W_d = 2..d+1,
/// Y_1..Y_n after that. With control_degree d > 0 there are 2^d codewords,
/// selected by the W assignment (mixed radix, W_1 most significant).
struct HardInstanceSpec {
  int n = 1;
  double alpha = 0.5;
  double epsilon = 0.1;
  std::vector<std::vector<int>> codewords{{1}};
  int control_degree = 0;
  bool confounded = false;

  void validate() const;
  double delta() const;  // epsilon / sqrt(n)
};

inline constexpr int kHardZ = 0;
inline constexpr int kHardX = 1;
inline int hard_y(const HardInstanceSpec& s, int j) { return 2 + s.control_degree + j; }

GroundTruthCbn build_hard_instance(const HardInstanceSpec& spec);

/// Balanced bit-vectors where every ordered pair (c, d) has at least
/// ceil(min_sep_fraction n) positions with c = 1, d = 0.
std::vector<std::vector<int>> random_code(int n, int count, double min_sep_fraction, std::uint64_t seed,
                                          int max_tries = 100000);

/// Closed-form KL(P_a || P_b) of the observational distributions of two hard
/// instances that differ only in their codewords.
double hard_pair_kl(const HardInstanceSpec& a, const HardInstanceSpec& b);

/// Closed-form TV between the two instances' P_{X=1} over (Z, W, Y).
double hard_pair_tv_do(const HardInstanceSpec& a, const HardInstanceSpec& b);

/// TV between products of Bernoullis: l1 positions at 1/2+δ vs 1/2-δ and l2
/// positions at 1/2-δ vs 1/2+δ.
double product_bernoulli_tv(int l1, int l2, double delta);

struct ExperimentInstance {
  GroundTruthCbn cbn;
  int x = 0;
  int x_val = 0;
};

/// n = 6, |Σ| = 2, k = d = 2, λ = 0.25, X = node 0; seeds are rejected until
/// the realized k and d are 2 and Pa+(S_1) has exact margin >= min_alpha.
ExperimentInstance reference_instance(std::uint64_t seed, double min_alpha = 0.05);

using InstanceFactory = std::function<ExperimentInstance(std::uint64_t)>;

struct TrialRecord {
  std::uint64_t m = 0;
  int trial = 0;
  double tv = 0.0;
  double seconds = 0.0;
};

struct GridSummary {
  std::uint64_t m = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct ConvergenceReport {
  std::vector<TrialRecord> records;  // m-major, then trial
  std::vector<GridSummary> summary;  // in grid order
  double slope = 0.0;                // least squares of ln median on ln m
  int t = 0;
};

/// Each trial draws max(m_grid) samples once and learns D_x on prefixes of
/// length m; exact TV against the oracle. Trials run in parallel.
ConvergenceReport convergence_experiment(const InstanceFactory& factory, const std::vector<std::uint64_t>& m_grid,
                                         int trials, const LearnConfig& cfg, std::uint64_t seed);
ConvergenceReport convergence_experiment(const GroundTruthCbn& cbn, int x_node, int x_val,
                                         const std::vector<std::uint64_t>& m_grid, int trials,
                                         const LearnConfig& cfg, std::uint64_t seed);

/// Type-7 quantile of unsorted values.
double quantile(std::vector<double> v, double q);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cbn
