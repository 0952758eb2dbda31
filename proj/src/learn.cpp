#include "cbn/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbn/errors.hpp"
#include "cbn/rng.hpp"

namespace cbn {

std::vector<double> add_one_estimator(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw ContractError("add-1: empty alphabet");
  double z = 0.0;
  for (auto c : counts) {
    if (c < 0) throw ContractError("add-1: negative count");
    z += static_cast<double>(c);
  }
  const double denom = z + static_cast<double>(counts.size());
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = (static_cast<double>(counts[i]) + 1.0) / denom;
  return out;
}

TheoryParameters default_parameters(int n, int sigma, int k, int d, double alpha, double epsilon) {
  if (n < 1 || sigma < 2 || k < 1 || d < 0) throw ContractError("default_parameters: bad graph parameters");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(epsilon > 0.0 && epsilon < 1.0)) {
    throw ContractError("default_parameters: need alpha in (0,1] and epsilon in (0,1)");
  }
  const double s = sigma;
  const double log_term = std::log(n * std::pow(s, k * d + k));
  TheoryParameters p;
  p.m_exact = 20.0 * n * std::pow(s, k * d + k + 2) * log_term / (std::pow(alpha, k) * epsilon * epsilon);
  const double cap = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
  p.m = p.m_exact >= cap ? std::numeric_limits<std::uint64_t>::max()
                         : static_cast<std::uint64_t>(std::ceil(p.m_exact));
  p.t = static_cast<int>(std::ceil(10.0 * log_term));
  p.t_practical = std::max(10, p.t);
  p.m_headline = std::pow(s, 2 * k * d) * n / (std::pow(alpha, k) * epsilon * epsilon);
  return p;
}

void LearnConfig::validate() const {
  if (m < 1) throw ContractError("config: m must be at least 1");
  if (t < 1) throw ContractError("config: t must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("config: epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("config: delta must lie in (0,1)");
  if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw ContractError("config: alpha must lie in (0,1]");
}

std::size_t LearnDiagnostics::fitted() const {
  std::size_t s = 0;
  for (const auto& f : per_factor) s += f.fitted;
  return s;
}

std::size_t LearnDiagnostics::below_threshold() const {
  std::size_t s = 0;
  for (const auto& f : per_factor) s += f.below_threshold;
  return s;
}

namespace {

std::size_t key_space(int sigma, std::size_t width) {
  std::size_t k = 1;
  for (std::size_t i = 0; i < width; ++i) {
    if (k > std::numeric_limits<std::size_t>::max() / sigma) return std::numeric_limits<std::size_t>::max();
    k *= sigma;
  }
  return k;
}

}  // namespace

SampleSource::SampleSource(const SampleBatch& batch, std::size_t rows, Exec exec)
    : batch_(batch), rows_(rows), exec_(exec) {
  if (rows_ > batch_.rows()) {
    throw ContractError("need " + std::to_string(rows_) + " samples, batch has " + std::to_string(batch_.rows()));
  }
}

RowMap SampleSource::fit(const FactorSpec& spec, FitStats& stats) const {
  const auto counts = kernels::dispatch_count(exec_, batch_, rows_, spec.node, spec.cond, spec.fixed);
  stats.key_space = key_space(batch_.alphabet(), spec.cond.size());
  RowMap out;
  for (const auto& [key, c] : counts.rows) {
    std::int64_t n = 0;
    for (auto v : c) n += v;
    if (n < spec.threshold) {
      ++stats.below_threshold;
      continue;
    }
    out.emplace(key, add_one_estimator(c));
    ++stats.fitted;
  }
  return out;
}

RowMap ExactSource::fit(const FactorSpec& spec, FitStats& stats) const {
  RowMap out = exact_conditional_rows(p_, g_, spec.node, spec.cond, spec.fixed, false);
  stats.key_space = key_space(g_.alphabet(), spec.cond.size());
  stats.fitted += out.size();
  return out;
}

namespace {

BayesNetModel assemble(const ConditionalSource& src, const Admg& g, std::vector<FactorSpec> specs,
                       const std::vector<bool>& substituted, std::optional<std::pair<int, int>> x_sub,
                       LearnDiagnostics* diag) {
  std::vector<Factor> factors;
  if (diag) diag->per_factor.clear();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    FitStats stats;
    Factor f;
    f.rows = src.fit(specs[i], stats);
    f.node = specs[i].node;
    f.cond = std::move(specs[i].cond);
    f.fixed = std::move(specs[i].fixed);
    f.substituted = substituted[i];
    factors.push_back(std::move(f));
    if (diag) diag->per_factor.push_back(stats);
  }
  return BayesNetModel(g.size(), g.alphabet(), g.names(), std::move(factors), x_sub);
}

}  // namespace

BayesNetModel learn_observational(const ConditionalSource& src, const Admg& g, int threshold, LearnDiagnostics* diag) {
  const auto ep = effective_parents(g);
  std::vector<FactorSpec> specs;
  for (int v : g.order()) specs.push_back({v, ep.sets[v], {}, threshold});
  const std::vector<bool> substituted(specs.size(), false);
  return assemble(src, g, std::move(specs), substituted, std::nullopt, diag);
}

BayesNetModel learn_observational(const SampleBatch& samples, const Admg& g, int threshold) {
  samples.check_matches(g);
  SampleSource src(samples, samples.rows());
  return learn_observational(src, g, threshold);
}

BayesNetModel learn_do(const ConditionalSource& src, const Admg& g, int x_node, int x_val, int threshold,
                       LearnDiagnostics* diag) {
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  require_identifiable(g, x_node);
  const auto ep = effective_parents(g);
  const NodeSet s1 = c_components(g).of(x_node);
  std::vector<FactorSpec> specs;
  std::vector<bool> substituted;
  for (int v : g.order()) {
    const NodeSet& z = ep.sets[v];
    if (contains(s1, v)) {
      specs.push_back({v, z, {}, 0});
      substituted.push_back(false);
    } else if (contains(z, x_node)) {
      specs.push_back({v, set_difference(z, NodeSet{x_node}), {{x_node, x_val}}, threshold});
      substituted.push_back(true);
    } else {
      specs.push_back({v, z, {}, threshold});
      substituted.push_back(false);
    }
  }
  return assemble(src, g, std::move(specs), substituted, std::make_pair(x_node, x_val), diag);
}

BayesNetModel learn_do(const SampleBatch& samples, const Admg& g, int x_node, int x_val, const LearnConfig& cfg,
                       LearnDiagnostics* diag) {
  cfg.validate();
  samples.check_matches(g);
  SampleSource src(samples, static_cast<std::size_t>(cfg.m));
  return learn_do(src, g, x_node, x_val, cfg.t, diag);
}

BayesNetModel learn_ccomponent_intervention(const ConditionalSource& src, const Admg& g, const NodeSet& y_in,
                                            const FixedValues& y_bar, int threshold, LearnDiagnostics* diag) {
  const NodeSet y = make_set(y_in);
  if (y.empty()) throw ContractError("c-component learning: empty target set");
  const auto cc = c_components(g);
  for (int v : y) {
    if (v < 0 || v >= g.size()) throw ContractError("c-component learning: node out of range");
    if (!is_subset(cc.of(v), y)) {
      throw ContractError("target set is not a union of c-components: " + g.name(v) + "'s component is split");
    }
  }
  const NodeSet pa_minus = parent_sets(g, y).pa_minus;
  std::vector<int> value_of(g.size(), -1);
  NodeSet assigned;
  for (auto [v, val] : y_bar) {
    if (v < 0 || v >= g.size() || val < 0 || val >= g.alphabet()) {
      throw ContractError("c-component learning: assignment out of range");
    }
    if (value_of[v] >= 0) throw ContractError("c-component learning: variable assigned twice");
    value_of[v] = val;
    assigned.push_back(v);
  }
  if (make_set(assigned) != pa_minus) {
    throw ContractError("assignment must cover exactly Pa-(Y) = " + to_string(pa_minus));
  }
  const auto ep = effective_parents(g);
  std::vector<FactorSpec> specs;
  for (int v : g.order()) {
    if (!contains(y, v)) continue;
    FactorSpec s{v, set_intersection(ep.sets[v], y), {}, threshold};
    for (int u : set_difference(ep.sets[v], y)) s.fixed.emplace_back(u, value_of[u]);
    specs.push_back(std::move(s));
  }
  const std::vector<bool> substituted(specs.size(), false);
  return assemble(src, g, std::move(specs), substituted, std::nullopt, diag);
}

double estimate_alpha(const SampleBatch& samples, std::size_t rows, const Admg& g, int x_node) {
  if (rows == 0 || rows > samples.rows()) throw ContractError("alpha estimate: bad row count");
  const NodeSet pp = parent_sets(g, c_components(g).of(x_node)).pa_plus;
  const std::vector<int> sizes(pp.size(), g.alphabet());
  const std::uint64_t cells = guarded_product(sizes, kStateGuard, "alpha estimate");
  std::vector<std::int64_t> counts(cells, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::uint64_t key = 0;
    for (int v : pp) key = key * g.alphabet() + samples.at(r, v);
    ++counts[key];
  }
  return static_cast<double>(*std::min_element(counts.begin(), counts.end())) / static_cast<double>(rows);
}

double holdout_score(const BayesNetModel& model, const SampleBatch& holdout, double floor) {
  constexpr std::size_t kBlocks = 5;
  const std::size_t h = holdout.rows();
  if (h < kBlocks) throw ContractError("holdout needs at least 5 rows");
  std::vector<int> full(model.universe(), 0);
  std::vector<double> block_loss;
  for (std::size_t b = 0; b < kBlocks; ++b) {
    const std::size_t begin = b * h / kBlocks, end = (b + 1) * h / kBlocks;
    double loss = 0.0;
    for (std::size_t r = begin; r < end; ++r) {
      holdout.fill_full(r, full);
      for (std::size_t f = 0; f < model.factors().size(); ++f) {
        if (!model.applies(f, full.data())) continue;
        loss -= std::log(std::max(floor, model.conditional(f, full.data())));
      }
    }
    block_loss.push_back(loss / static_cast<double>(end - begin));
  }
  std::sort(block_loss.begin(), block_loss.end());
  return block_loss[kBlocks / 2];
}

Selection select_candidate(const std::vector<BayesNetModel>& candidates, const SampleBatch& holdout, double floor) {
  if (candidates.empty()) throw ContractError("no candidates to select from");
  Selection s;
  for (const auto& c : candidates) s.scores.push_back(holdout_score(c, holdout, floor));
  for (std::size_t i = 1; i < s.scores.size(); ++i) {
    if (s.scores[i] < s.scores[s.index]) s.index = i;
  }
  return s;
}

Amplified amplify(const Learner& learner, int reps, const SampleBatch& train, const SampleBatch& holdout,
                  std::uint64_t seed) {
  if (reps < 1 || reps % 2 == 0) throw ContractError("amplify: reps must be odd and positive");
  if (reps == 1) {
    Amplified out{learner(train, derive_seed(seed, 0)), {}};
    out.selection.scores.push_back(0.0);
    return out;
  }
  const std::size_t slice = train.rows() / static_cast<std::size_t>(reps);
  if (slice == 0) throw ContractError("amplify: fewer samples than repetitions");
  std::vector<BayesNetModel> candidates;
  for (int r = 0; r < reps; ++r) {
    candidates.push_back(learner(train.slice(static_cast<std::size_t>(r) * slice, slice), derive_seed(seed, r)));
  }
  const double floor = 1.0 / static_cast<double>(slice + train.alphabet());
  Amplified out;
  out.selection = select_candidate(candidates, holdout, floor);
  out.model = std::move(candidates[out.selection.index]);
  return out;
}

}  // namespace cbn
