#include "cbn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cbn/errors.hpp"
#include "cbn/intervene.hpp"
#include "cbn/kernels.hpp"
#include "cbn/rng.hpp"

namespace cbn {

void HardInstanceSpec::validate() const {
  if (n < 1) throw ContractError("hard instance: n must be positive");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ContractError("hard instance: alpha must lie in (0, 1/2]");
  if (!(epsilon > 0.0) || delta() > 0.25) throw ContractError("hard instance: need 0 < epsilon/sqrt(n) <= 1/4");
  if (control_degree < 0 || control_degree > 16) throw ContractError("hard instance: bad control degree");
  const std::size_t want = control_degree == 0 ? 1 : std::size_t{1} << control_degree;
  if (codewords.size() != want) throw ContractError("hard instance: need one codeword per control assignment");
  for (const auto& c : codewords) {
    if (static_cast<int>(c.size()) != n) throw ContractError("hard instance: codeword length must be n");
    for (int b : c) {
      if (b != 0 && b != 1) throw ContractError("hard instance: codeword entries must be bits");
    }
  }
}

double HardInstanceSpec::delta() const { return epsilon / std::sqrt(static_cast<double>(n)); }

GroundTruthCbn build_hard_instance(const HardInstanceSpec& s) {
  s.validate();
  const int d = s.control_degree;
  const int nodes = 2 + d + s.n;
  std::vector<std::string> names{"Z", "X"};
  for (int i = 1; i <= d; ++i) names.push_back("W" + std::to_string(i));
  for (int j = 1; j <= s.n; ++j) names.push_back("Y" + std::to_string(j));

  std::vector<Edge> dir, bi;
  if (s.confounded) {
    bi.emplace_back(kHardZ, kHardX);
  } else {
    dir.emplace_back(kHardZ, kHardX);
  }
  for (int j = 0; j < s.n; ++j) {
    const int y = hard_y(s, j);
    dir.emplace_back(kHardZ, y);
    dir.emplace_back(kHardX, y);
    for (int i = 0; i < d; ++i) dir.emplace_back(2 + i, y);
  }
  Admg g(nodes, 2, dir, bi, names);

  using Row = GroundTruthCbn::Row;
  const Row fair{0.5, 0.5};
  std::vector<std::vector<Row>> cpts(nodes);
  std::vector<Row> priors;
  if (s.confounded) {
    priors.push_back(fair);
    cpts[kHardZ] = {{1.0, 0.0}, {0.0, 1.0}};                        // Z = U
    cpts[kHardX] = {{1.0 - s.alpha, s.alpha}, {s.alpha, 1.0 - s.alpha}};  // X = not U w.p. alpha
  } else {
    cpts[kHardZ] = {fair};
    cpts[kHardX] = {{1.0 - s.alpha, s.alpha}, {s.alpha, 1.0 - s.alpha}};
  }
  for (int i = 0; i < d; ++i) cpts[2 + i] = {fair};
  const std::size_t wcount = std::size_t{1} << d;
  const double delta = s.delta();
  for (int j = 0; j < s.n; ++j) {
    auto& rows = cpts[hard_y(s, j)];
    // parents ascending: Z, X, W_1..W_d
    for (int z = 0; z < 2; ++z) {
      for (int x = 0; x < 2; ++x) {
        for (std::size_t w = 0; w < wcount; ++w) {
          if (x == z) {
            rows.push_back(fair);
          } else {
            const double p1 = 0.5 + (s.codewords[w][j] ? delta : -delta);
            rows.push_back({1.0 - p1, p1});
          }
        }
      }
    }
  }
  return GroundTruthCbn(std::move(g), 2, std::move(priors), std::move(cpts));
}

std::vector<std::vector<int>> random_code(int n, int count, double min_sep_fraction, std::uint64_t seed,
                                          int max_tries) {
  if (n < 1) throw ContractError("random code: n must be positive");
  if (count < 2) throw ContractError("random code: need at least two codewords");
  if (!(min_sep_fraction > 0.0 && min_sep_fraction <= 0.25)) {
    throw ContractError("random code: min_sep_fraction must lie in (0, 1/4]");
  }
  const int need = static_cast<int>(std::ceil(min_sep_fraction * n - 1e-12));
  std::vector<int> base(n, 0);
  std::fill(base.begin(), base.begin() + n / 2, 1);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Rng r(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<std::vector<int>> code(count, base);
    for (auto& c : code) r.shuffle(c);
    bool ok = true;
    for (int a = 0; a < count && ok; ++a) {
      for (int b = 0; b < count && ok; ++b) {
        if (a == b) continue;
        int sep = 0;
        for (int i = 0; i < n; ++i) sep += code[a][i] == 1 && code[b][i] == 0;
        ok = sep >= need;
      }
    }
    if (ok) return code;
  }
  throw ContractError("random code: rejection budget exhausted for n=" + std::to_string(n) +
                      ", count=" + std::to_string(count));
}

namespace {

void check_pair(const HardInstanceSpec& a, const HardInstanceSpec& b) {
  a.validate();
  b.validate();
  if (a.n != b.n || a.alpha != b.alpha || a.epsilon != b.epsilon || a.control_degree != b.control_degree ||
      a.confounded != b.confounded) {
    throw ContractError("hard pair: instances must differ only in their codewords");
  }
}

}  // namespace

double hard_pair_kl(const HardInstanceSpec& a, const HardInstanceSpec& b) {
  check_pair(a, b);
  const double delta = a.delta();
  const double per = 2.0 * delta * std::log((1.0 + 2.0 * delta) / (1.0 - 2.0 * delta));
  double diff = 0.0;
  for (std::size_t w = 0; w < a.codewords.size(); ++w) {
    for (int j = 0; j < a.n; ++j) diff += a.codewords[w][j] != b.codewords[w][j];
  }
  diff /= static_cast<double>(a.codewords.size());
  return a.alpha * diff * per;
}

double product_bernoulli_tv(int l1, int l2, double delta) {
  const double hi = 0.5 + delta, lo = 0.5 - delta;
  auto binom = [](int n, double p) {
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      out[k] = std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
    }
    return out;
  };
  const auto p1 = binom(l1, hi), q1 = binom(l1, lo);
  const auto p2 = binom(l2, lo), q2 = binom(l2, hi);
  double s = 0.0;
  for (int k1 = 0; k1 <= l1; ++k1) {
    for (int k2 = 0; k2 <= l2; ++k2) s += std::abs(p1[k1] * p2[k2] - q1[k1] * q2[k2]);
  }
  return 0.5 * s;
}

double hard_pair_tv_do(const HardInstanceSpec& a, const HardInstanceSpec& b) {
  check_pair(a, b);
  double total = 0.0;
  for (std::size_t w = 0; w < a.codewords.size(); ++w) {
    int l1 = 0, l2 = 0;
    for (int j = 0; j < a.n; ++j) {
      l1 += a.codewords[w][j] == 1 && b.codewords[w][j] == 0;
      l2 += a.codewords[w][j] == 0 && b.codewords[w][j] == 1;
    }
    total += product_bernoulli_tv(l1, l2, a.delta());
  }
  // Z = 1 agrees with X = 1 and leaves every Y fair
  return 0.5 * total / static_cast<double>(a.codewords.size());
}

ExperimentInstance reference_instance(std::uint64_t seed, double min_alpha) {
  constexpr int kN = 6, kSigma = 2, kK = 2, kD = 2, kX = 0;
  for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
    const std::uint64_t s = derive_seed(seed, attempt);
    Admg g = random_identifiable_admg(kN, kD, kK, kSigma, kX, derive_seed(s, 1));
    const auto ep = effective_parents(g);
    if (ep.k != kK || ep.d != kD) continue;
    GroundTruthCbn cbn = random_cbn(g, kSigma, 0.25, derive_seed(s, 2));
    const auto p = exact_observational(cbn, Exec::serial);
    const NodeSet pp = parent_sets(g, c_components(g).of(kX)).pa_plus;
    if (strong_positivity_margin(p, pp) < min_alpha) continue;
    return {std::move(cbn), kX, 0};
  }
  throw ContractError("reference instance: no admissible seed found");
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ContractError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport convergence_experiment(const InstanceFactory& factory, const std::vector<std::uint64_t>& m_grid,
                                         int trials, const LearnConfig& cfg, std::uint64_t seed) {
  if (m_grid.empty()) throw ContractError("experiment: empty m grid");
  if (trials < 1) throw ContractError("experiment: trials must be positive");
  for (auto m : m_grid) {
    if (m == 0) throw ContractError("experiment: m must be positive");
  }
  LearnConfig base = cfg;
  base.validate();
  const std::uint64_t max_m = *std::max_element(m_grid.begin(), m_grid.end());
  const std::size_t g_count = m_grid.size();
  std::vector<TrialRecord> records(g_count * static_cast<std::size_t>(trials));

  // instances and oracles first so a guard failure surfaces outside the parallel region
  std::vector<ExperimentInstance> instances;
  std::vector<DenseDistribution> oracles;
  for (int t = 0; t < trials; ++t) {
    instances.push_back(factory(derive_seed(seed, 2 * static_cast<std::uint64_t>(t))));
    const auto& inst = instances.back();
    oracles.push_back(exact_interventional(inst.cbn, inst.x, inst.x_val));
  }

  kernels::for_each_index(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const auto& inst = instances[t];
    const auto samples =
        sample_observational(inst.cbn, max_m, derive_seed(seed, 2 * t + 1), Exec::serial);
    for (std::size_t i = 0; i < g_count; ++i) {
      LearnConfig c = base;
      c.m = m_grid[i];
      const auto start = std::chrono::steady_clock::now();
      InterventionalModel im(learn_do(samples, inst.cbn.graph(), inst.x, inst.x_val, c), inst.x, inst.x_val);
      const double tv = tv_distance(interventional_dense(im, Exec::serial), oracles[t]);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      records[i * trials + t] = {m_grid[i], static_cast<int>(t), tv, secs};
    }
  });

  ConvergenceReport rep;
  rep.t = base.t;
  std::vector<double> ms, meds;
  for (std::size_t i = 0; i < g_count; ++i) {
    std::vector<double> tvs;
    for (int t = 0; t < trials; ++t) tvs.push_back(records[i * trials + t].tv);
    rep.summary.push_back({m_grid[i], quantile(tvs, 0.5), quantile(tvs, 0.25), quantile(tvs, 0.75)});
    ms.push_back(static_cast<double>(m_grid[i]));
    meds.push_back(rep.summary.back().median);
  }
  rep.slope = g_count >= 2 ? loglog_slope(ms, meds) : std::numeric_limits<double>::quiet_NaN();
  rep.records = std::move(records);
  return rep;
}

ConvergenceReport convergence_experiment(const GroundTruthCbn& cbn, int x_node, int x_val,
                                         const std::vector<std::uint64_t>& m_grid, int trials,
                                         const LearnConfig& cfg, std::uint64_t seed) {
  return convergence_experiment([&](std::uint64_t) { return ExperimentInstance{cbn, x_node, x_val}; }, m_grid,
                                trials, cfg, seed);
}

}  // namespace cbn
