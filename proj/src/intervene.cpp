#include "cbn/intervene.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "cbn/errors.hpp"
#include "cbn/identify.hpp"
#include "cbn/rng.hpp"

namespace cbn {

InterventionalModel::InterventionalModel(BayesNetModel dx, int x_node, int x_val)
    : dx_(std::move(dx)), x_(x_node), xv_(x_val) {
  if (!dx_.x_substitution() || dx_.x_substitution()->first != x_ || dx_.x_substitution()->second != xv_) {
    throw ContractError("interventional model: x_substitution does not match the intervention");
  }
  if (dx_.factor_index(x_) < 0) throw ContractError("interventional model: X has no factor");
}

double evaluate_do(const InterventionalModel& im, std::span<const int> full_in) {
  const auto& dx = im.dx();
  if (static_cast<int>(full_in.size()) != dx.universe()) throw ContractError("evaluate: assignment size mismatch");
  std::vector<int> full(full_in.begin(), full_in.end());
  double s = 0.0;
  for (int xp = 0; xp < dx.alphabet(); ++xp) {
    full[im.x_node()] = xp;
    s += dx.prob(full.data());
  }
  return s;
}

SampleBatch sample_model(const BayesNetModel& model, std::size_t count, std::uint64_t seed, Exec exec) {
  if (count < 1) throw ContractError("sample count must be at least 1");
  const auto order = model.order();
  std::vector<std::string> names;
  for (int v : order) names.push_back(model.names()[v]);
  SampleBatch out(model.universe(), model.alphabet(), order, std::move(names));
  out.resize_rows(count);
  const std::vector<double> uniform(model.alphabet(), 1.0 / model.alphabet());
  kernels::dispatch_block(exec, count, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, block));
    std::vector<int> full(model.universe(), 0);
    for (std::size_t r = begin; r < end; ++r) {
      int* dst = out.row(r);
      for (std::size_t f = 0; f < order.size(); ++f) {
        const auto* row = model.row(f, model.key(f, full.data()));
        full[order[f]] = rng.categorical(row ? *row : uniform);
        dst[f] = full[order[f]];
      }
    }
  });
  return out;
}

SampleBatch sample_do(const InterventionalModel& im, std::size_t count, std::uint64_t seed, Exec exec) {
  const SampleBatch all = sample_model(im.dx(), count, seed, exec);
  std::vector<int> keep;
  std::vector<std::string> names;
  for (int v : all.columns()) {
    if (v != im.x_node()) {
      keep.push_back(v);
      names.push_back(im.dx().names()[v]);
    }
  }
  return all.project(keep, keep, all.universe(), std::move(names));
}

DenseDistribution model_to_dense(const BayesNetModel& model, const NodeSet& keep_in, Exec exec) {
  const NodeSet nodes = model.nodes();
  const NodeSet keep = make_set(keep_in);
  if (!is_subset(keep, nodes)) throw ContractError("model_to_dense: kept variable is not modeled");
  Table t(nodes, std::vector<int>(nodes.size(), model.alphabet()));
  kernels::dispatch_index(exec, t.cells(), [&](std::size_t idx) {
    std::vector<int> a(nodes.size()), full(model.universe(), 0);
    t.decode(idx, a);
    for (std::size_t i = 0; i < nodes.size(); ++i) full[nodes[i]] = a[i];
    t.values[idx] = model.prob(full.data());
  });
  Table m = keep == nodes ? std::move(t) : marginalize(t, keep);
  std::vector<std::string> names;
  for (int v : keep) names.push_back(model.names()[v]);
  return DenseDistribution(std::move(m), std::move(names));
}

DenseDistribution interventional_dense(const InterventionalModel& im, Exec exec) {
  return model_to_dense(im.dx(), set_difference(im.dx().nodes(), NodeSet{im.x_node()}), exec);
}

DenseDistribution empirical(const SampleBatch& b, const NodeSet& vars) {
  if (b.rows() == 0) throw ContractError("empirical: empty batch");
  Table t(vars, std::vector<int>(vars.size(), b.alphabet()));
  std::vector<int> cols;
  for (int v : vars) {
    if (!b.has(v)) throw ContractError("empirical: variable has no column");
    cols.push_back(b.column_of(v));
  }
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const int* row = b.row(r);
    std::size_t idx = 0;
    for (int c : cols) idx = idx * b.alphabet() + row[c];
    t.values[idx] += 1.0;
  }
  for (auto& v : t.values) v /= static_cast<double>(b.rows());
  std::vector<std::string> names;
  if (!b.names().empty()) {
    for (int c : cols) names.push_back(b.names()[c]);
  }
  return DenseDistribution(std::move(t), std::move(names));
}

namespace {

std::vector<int> decode_key(std::uint64_t key, std::size_t width, int sigma) {
  std::vector<int> out(width);
  for (std::size_t i = width; i-- > 0;) {
    out[i] = static_cast<int>(key % sigma);
    key /= sigma;
  }
  return out;
}

std::uint64_t encode(const NodeSet& vars, std::span<const int> full, int sigma) {
  std::uint64_t key = 0;
  for (int v : vars) key = key * sigma + full[v];
  return key;
}

}  // namespace

MrEvaluator build_mr_evaluator(const ConditionalSource& src, const Admg& g, int x_node, int x_val, int threshold) {
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  require_identifiable(g, x_node);
  MrEvaluator mr;
  mr.x_node = x_node;
  mr.x_val = x_val;
  mr.alphabet = g.alphabet();
  mr.s1 = c_components(g).of(x_node);
  mr.a_vars = set_difference(mr.s1, NodeSet{x_node});
  mr.b_vars = parent_sets(g, mr.s1).pa_minus;
  NodeSet all(g.size());
  for (int v = 0; v < g.size(); ++v) all[v] = v;
  mr.c_vars = set_difference(set_difference(all, mr.s1), mr.b_vars);
  const NodeSet rest = set_difference(all, mr.s1);

  const std::uint64_t a_count =
      guarded_product(std::vector<int>(mr.a_vars.size(), g.alphabet()), kMrGuard, "M/R evaluator (A)");
  const std::uint64_t b_count =
      guarded_product(std::vector<int>(mr.b_vars.size(), g.alphabet()), kMrGuard, "M/R evaluator (B)");

  for (std::uint64_t bk = 0; bk < b_count; ++bk) {
    const auto b = decode_key(bk, mr.b_vars.size(), g.alphabet());
    FixedValues ybar;
    for (std::size_t i = 0; i < b.size(); ++i) ybar.emplace_back(mr.b_vars[i], b[i]);
    mr.m_tables.push_back(learn_ccomponent_intervention(src, g, mr.s1, ybar, threshold));
  }
  if (!rest.empty()) {
    const NodeSet pa_minus_rest = parent_sets(g, rest).pa_minus;  // inside S_1
    for (std::uint64_t ak = 0; ak < a_count; ++ak) {
      const auto a = decode_key(ak, mr.a_vars.size(), g.alphabet());
      std::vector<int> full(g.size(), 0);
      for (std::size_t i = 0; i < a.size(); ++i) full[mr.a_vars[i]] = a[i];
      full[x_node] = x_val;
      FixedValues ybar;
      for (int v : pa_minus_rest) ybar.emplace_back(v, full[v]);
      mr.r_tables.push_back(learn_ccomponent_intervention(src, g, rest, ybar, threshold));
    }
  }
  return mr;
}

MrEvaluator build_mr_evaluator(const SampleBatch& samples, const Admg& g, int x_node, int x_val,
                               const LearnConfig& cfg) {
  cfg.validate();
  samples.check_matches(g);
  SampleSource src(samples, static_cast<std::size_t>(cfg.m));
  return build_mr_evaluator(src, g, x_node, x_val, cfg.t);
}

double evaluate_mr(const MrEvaluator& mr, std::span<const int> full_in) {
  std::vector<int> full(full_in.begin(), full_in.end());
  const auto& m = mr.m_tables.at(encode(mr.b_vars, full, mr.alphabet));
  double first = 0.0;
  for (int xp = 0; xp < mr.alphabet; ++xp) {
    full[mr.x_node] = xp;
    first += m.prob(full.data());
  }
  full[mr.x_node] = mr.x_val;
  const double second = mr.r_tables.empty() ? 1.0 : mr.r_tables.at(encode(mr.a_vars, full, mr.alphabet)).prob(full.data());
  return first * second;
}

namespace {

DenseDistribution relabel(const DenseDistribution& d, const NodeSet& to_original, const Admg& g) {
  Table t = d.table();
  std::vector<std::string> names;
  for (auto& v : t.vars) {
    v = to_original[v];
    names.push_back(g.name(v));
  }
  return DenseDistribution(std::move(t), std::move(names));
}

struct Prepared {
  Pruned pruned;
  Reduction red;
  NodeSet original_w;  // original ids of h's nodes
  int x_pruned = 0;
  NodeSet f_pruned, f_h;
};

Prepared prepare(const Admg& g, int x_node, const NodeSet& f_in) {
  const NodeSet f = make_set(f_in);
  if (f.empty()) throw ContractError("marginal: target set is empty");
  for (int v : f) {
    if (v < 0 || v >= g.size()) throw ContractError("marginal: target out of range");
    if (v == x_node) throw ContractError("marginal: targets must not include X");
  }
  require_identifiable(g, x_node);
  Pruned pruned = prune_to_ancestors(g, set_union(f, NodeSet{x_node}));
  std::vector<int> to_p(g.size(), -1);
  for (std::size_t i = 0; i < pruned.kept.size(); ++i) to_p[pruned.kept[i]] = static_cast<int>(i);
  NodeSet fp;
  for (int v : f) fp.push_back(to_p[v]);
  Reduction red = reduce_for_marginal(pruned.graph, to_p[x_node], fp);
  if (!red.report.all_hold()) throw std::logic_error("reduction guarantees failed");
  NodeSet original_w;
  for (int v : red.w) original_w.push_back(pruned.kept[v]);
  NodeSet fh;
  for (int v : fp) fh.push_back(red.to_h[v]);
  const int xp = to_p[x_node];
  return {std::move(pruned), std::move(red), std::move(original_w), xp, std::move(fp), std::move(fh)};
}

}  // namespace

MarginalResult learn_marginal_do(const SampleBatch& samples, const Admg& g, int x_node, int x_val, const NodeSet& f,
                                 const LearnConfig& cfg, const MarginalOptions& opts) {
  cfg.validate();
  samples.check_matches(g);
  if (x_val < 0 || x_val >= g.alphabet()) throw ContractError("intervention value out of range");
  Prepared p = prepare(g, x_node, f);
  const Admg& h = p.red.h;

  if (opts.via_generator) {
    const auto& pg = p.pruned.graph;
    std::vector<int> ids(p.pruned.kept.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    const SampleBatch ps = samples.project(p.pruned.kept, ids, pg.size(), pg.names());
    InterventionalModel im(learn_do(ps, pg, p.x_pruned, x_val, cfg), p.x_pruned, x_val);
    std::uint64_t draws = opts.generator_draws;
    if (draws == 0) {
      draws = static_cast<std::uint64_t>(std::ceil(opts.generator_constant *
                                                   std::pow(static_cast<double>(g.alphabet()), p.f_pruned.size()) /
                                                   (cfg.epsilon * cfg.epsilon)));
    }
    const SampleBatch gen = sample_do(im, draws, derive_seed(cfg.seed, 0x67656e));
    const DenseDistribution emp = empirical(gen, p.f_pruned);
    return {relabel(emp, p.pruned.kept, g), h, p.original_w, p.red.report, draws};
  }

  std::vector<int> ids(p.original_w.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  const SampleBatch hs = samples.project(p.original_w, ids, h.size(), h.names());
  InterventionalModel im(learn_do(hs, h, p.red.to_h[p.x_pruned], x_val, cfg), p.red.to_h[p.x_pruned], x_val);
  const DenseDistribution d = model_to_dense(im.dx(), p.f_h);
  return {relabel(d, p.original_w, g), h, p.original_w, p.red.report, 0};
}

MarginalResult exact_marginal_do(const DenseDistribution& dist, const Admg& g, int x_node, int x_val,
                                 const NodeSet& f) {
  Prepared p = prepare(g, x_node, f);
  const Admg& h = p.red.h;
  Table t = marginalize(dist.table(), p.original_w);
  for (std::size_t i = 0; i < t.vars.size(); ++i) t.vars[i] = static_cast<int>(i);
  const DenseDistribution ph(std::move(t), h.names());
  ExactSource src(ph, h);
  InterventionalModel im(learn_do(src, h, p.red.to_h[p.x_pruned], x_val, 0), p.red.to_h[p.x_pruned], x_val);
  const DenseDistribution d = model_to_dense(im.dx(), p.f_h);
  return {relabel(d, p.original_w, g), h, p.original_w, p.red.report, 0};
}

}  // namespace cbn
