#include "cbn/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cbn/experiments.hpp"
#include "cbn/identify.hpp"
#include "cbn/intervene.hpp"
#include "cbn/io.hpp"
#include "cbn/learn.hpp"
#include "cbn/model.hpp"

namespace cbn {

std::vector<int> parse_assignment(const std::string& text, const std::vector<std::string>& names, int alphabet) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < names.size(); ++i) pos[names[i]] = i;
  std::vector<int> out(names.size(), -1);
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("assignment: expected name=value, got '" + item + "'");
    const std::string name = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    auto it = pos.find(name);
    if (it == pos.end()) throw UsageError("assignment: unknown variable '" + name + "'");
    if (out[it->second] >= 0) throw UsageError("assignment: duplicate variable '" + name + "'");
    int v = -1;
    std::size_t used = 0;
    try {
      v = std::stoi(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw UsageError("assignment: bad value '" + value + "' for " + name);
    if (v < 0 || v >= alphabet) {
      throw UsageError("assignment: value " + value + " of " + name + " outside [0, " + std::to_string(alphabet) + ")");
    }
    out[it->second] = v;
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (out[i] < 0) throw UsageError("assignment: missing variable '" + names[i] + "'");
  }
  return out;
}

std::string format_probability(double p) {
  if (p == 0.0) return "0.000000000000";
  const int decimals = std::max(0, 11 - static_cast<int>(std::floor(std::log10(std::abs(p)))));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, p);
  return buf;
}

namespace {

int resolve_var(const Admg& g, const std::string& s) {
  if (auto v = g.index_of(s)) return *v;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size() && v >= 0 && v < g.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("unknown variable '" + s + "'");
}

NodeSet resolve_list(const Admg& g, const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(resolve_var(g, item));
  }
  return make_set(out);
}

std::string report_path(const std::string& out, const std::string& given, const std::string& suffix) {
  if (!given.empty()) return given;
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? out.substr(0, dot) : out) + suffix;
}

struct Options {
  // gen-graph
  int nodes = 0, in_degree = 2, ccomp = 2, alphabet = 2, gen_x = 0;
  // gen-model
  double lambda = 0.25;
  int hidden_domain = 0;
  // shared
  std::string graph, model, samples, learned, out, report, x_var, assignment, targets, dense_a, dense_b, spec;
  std::string dense_out, truth_dense;
  std::uint64_t seed = 0, m = 0;
  int x_val = 0, t = 0, reps = 1;
  std::optional<double> epsilon, alpha;
  double delta = 0.05;
  bool via_generator = false;
  double generator_constant = 1.0;
};

void require_positive(std::uint64_t v, const char* what) {
  if (v == 0) throw UsageError(std::string(what) + " must be positive");
}

int cmd_gen_graph(const Options& o, std::ostream&) {
  if (o.nodes < 1) throw UsageError("--nodes must be positive");
  if (o.gen_x < 0 || o.gen_x >= o.nodes) throw UsageError("--x-var out of range");
  Admg g = random_identifiable_admg(o.nodes, o.in_degree, o.ccomp, o.alphabet, o.gen_x, o.seed);
  write_file(o.out, dump(graph_to_json(g)));
  return kExitOk;
}

int cmd_gen_model(const Options& o, std::ostream&) {
  Admg g = read_graph(o.graph);
  const int h = o.hidden_domain > 0 ? o.hidden_domain : g.alphabet();
  write_file(o.out, dump(model_to_json(random_cbn(g, h, o.lambda, o.seed))));
  return kExitOk;
}

int cmd_sample(const Options& o, std::ostream&) {
  require_positive(o.m, "--m");
  auto model = read_model(o.model);
  write_file(o.out, samples_to_csv(sample_observational(model, o.m, o.seed)));
  return kExitOk;
}

struct Resolved {
  LearnConfig cfg;
  TheoryParameters params;
  double alpha_est = 0.0;
  EffectiveParents ep;
};

Resolved resolve_config(const Options& o, const Admg& g, const SampleBatch& s, int x) {
  Resolved r;
  r.ep = effective_parents(g);
  r.alpha_est = estimate_alpha(s, s.rows(), g, x);
  const double eps = o.epsilon.value_or(0.1);
  const double alpha = o.alpha.value_or(std::max(r.alpha_est, 1e-6));
  r.params = default_parameters(g.size(), g.alphabet(), r.ep.k, r.ep.d, std::min(alpha, 1.0), eps);
  r.cfg.epsilon = eps;
  r.cfg.delta = o.delta;
  r.cfg.alpha = o.alpha;
  r.cfg.seed = o.seed;
  if (o.m > 0) {
    r.cfg.m = o.m;
  } else if (o.epsilon) {
    r.cfg.m = r.params.m;
  } else {
    r.cfg.m = s.rows();
  }
  r.cfg.t = o.t > 0 ? o.t : (o.epsilon ? r.params.t : r.params.t_practical);
  if (r.cfg.m > s.rows()) {
    throw ContractError("learn-do needs m = " + std::to_string(r.cfg.m) + " samples, file has " +
                        std::to_string(s.rows()));
  }
  r.cfg.validate();
  return r;
}

int cmd_learn_do(const Options& o, std::ostream&) {
  const auto start = std::chrono::steady_clock::now();
  Admg g = read_graph(o.graph);
  const int x = resolve_var(g, o.x_var);
  if (o.x_val < 0 || o.x_val >= g.alphabet()) throw UsageError("--x-val outside the alphabet");
  require_identifiable(g, x);
  if (o.reps < 1 || o.reps % 2 == 0) throw UsageError("--reps must be odd and positive");
  SampleBatch s = read_samples(o.samples, g);
  if (s.rows() == 0) throw ContractError("sample file has no rows");
  Resolved r = resolve_config(o, g, s, x);

  BayesNetModel model;
  std::optional<Selection> selection;
  LearnDiagnostics diag;
  if (o.reps == 1) {
    model = learn_do(s, g, x, o.x_val, r.cfg, &diag);
  } else {
    const std::size_t used = static_cast<std::size_t>(r.cfg.m);
    const std::size_t hold = std::max<std::size_t>(5, used / 5);
    if (used <= hold) throw ContractError("too few samples for a holdout split");
    const SampleBatch train = s.slice(0, used - hold);
    const SampleBatch holdout = s.slice(used - hold, hold);
    Learner learner = [&](const SampleBatch& slice, std::uint64_t) {
      LearnConfig c = r.cfg;
      c.m = slice.rows();
      return learn_do(slice, g, x, o.x_val, c);
    };
    auto amp = amplify(learner, o.reps, train, holdout, o.seed);
    model = std::move(amp.model);
    selection = std::move(amp.selection);
  }
  write_file(o.out, dump(learned_to_json(model)));

  const InterventionalModel im(model, x, o.x_val);
  std::optional<DenseDistribution> learned_dense;
  if (!o.dense_out.empty() || !o.model.empty()) learned_dense = interventional_dense(im);
  if (!o.dense_out.empty()) write_file(o.dense_out, dump(dense_to_json(*learned_dense)));

  Json rep;
  rep["m"] = r.cfg.m;
  rep["epsilon"] = r.cfg.epsilon;
  rep["alpha_est"] = r.alpha_est;
  if (!o.model.empty()) {
    auto truth = read_model(o.model);
    if (!(truth.graph() == g)) throw ContractError("--model graph differs from --graph");
    const auto exact = exact_interventional(truth, x, o.x_val);
    rep["tv_exact"] = tv_distance(*learned_dense, exact);
    if (!o.truth_dense.empty()) write_file(o.truth_dense, dump(dense_to_json(exact)));
  } else {
    rep["tv_exact"] = nullptr;
  }
  rep["seed"] = o.seed;
  Json params;
  params["n"] = g.size();
  params["alphabet"] = g.alphabet();
  params["k"] = r.ep.k;
  params["d"] = r.ep.d;
  params["t"] = r.cfg.t;
  params["x_var"] = g.name(x);
  params["x_val"] = o.x_val;
  params["alpha"] = o.alpha ? Json(*o.alpha) : Json(nullptr);
  params["m_theory"] = r.params.m;
  params["t_theory"] = r.params.t;
  params["reps"] = o.reps;
  if (selection) {
    params["selected"] = selection->index;
    params["holdout_scores"] = selection->scores;
  } else {
    params["fitted_rows"] = diag.fitted();
    params["below_threshold_rows"] = diag.below_threshold();
  }
  rep["params"] = params;
  rep["wallclock_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  write_file(report_path(o.out, o.report, ".report.json"), dump(rep));
  return kExitOk;
}

InterventionalModel load_interventional(const std::string& path) {
  BayesNetModel m = read_learned(path);
  if (!m.x_substitution()) throw ContractError(path + ": not an interventional model (no x_substitution)");
  return InterventionalModel(m, m.x_substitution()->first, m.x_substitution()->second);
}

int cmd_eval(const Options& o, std::ostream& out) {
  BayesNetModel m = read_learned(o.learned);
  std::vector<int> vars;
  for (int v : m.nodes()) {
    if (!m.x_substitution() || v != m.x_substitution()->first) vars.push_back(v);
  }
  std::vector<std::string> names;
  for (int v : vars) names.push_back(m.names()[v]);
  const auto values = parse_assignment(o.assignment, names, m.alphabet());
  std::vector<int> full(m.universe(), 0);
  for (std::size_t i = 0; i < vars.size(); ++i) full[vars[i]] = values[i];
  double p;
  if (m.x_substitution()) {
    p = evaluate_do(InterventionalModel(m, m.x_substitution()->first, m.x_substitution()->second), full);
  } else {
    p = m.prob(full.data());
  }
  out << format_probability(p) << "\n";
  return kExitOk;
}

int cmd_sample_do(const Options& o, std::ostream&) {
  require_positive(o.m, "--m");
  auto im = load_interventional(o.learned);
  write_file(o.out, samples_to_csv(sample_do(im, o.m, o.seed)));
  return kExitOk;
}

int cmd_marginal(const Options& o, std::ostream&) {
  Admg g = read_graph(o.graph);
  const int x = resolve_var(g, o.x_var);
  if (o.x_val < 0 || o.x_val >= g.alphabet()) throw UsageError("--x-val outside the alphabet");
  require_identifiable(g, x);
  const NodeSet f = resolve_list(g, o.targets);
  if (f.empty()) throw UsageError("--targets is empty");
  SampleBatch s = read_samples(o.samples, g);
  if (s.rows() == 0) throw ContractError("sample file has no rows");
  Resolved r = resolve_config(o, g, s, x);
  MarginalOptions opts;
  opts.via_generator = o.via_generator;
  opts.generator_constant = o.generator_constant;
  auto res = learn_marginal_do(s, g, x, o.x_val, f, r.cfg, opts);
  write_file(o.out, dump(dense_to_json(res.dist)));
  return kExitOk;
}

int cmd_tv(const Options& o, std::ostream& out) {
  auto a = read_dense(o.dense_a);
  auto b = read_dense(o.dense_b);
  if (a.vars() != b.vars() || a.sizes() != b.sizes()) throw ContractError("tv: the two tables range over different variables");
  out << format_probability(tv_distance(a, b)) << "\n";
  return kExitOk;
}

HardInstanceSpec hard_spec_from(const JsonDoc& doc, const std::string& at) {
  HardInstanceSpec h;
  h.n = static_cast<int>(doc.integer(at + "/n", 1, 1 << 12));
  h.alpha = doc.number(at + "/alpha");
  h.epsilon = doc.number(at + "/epsilon");
  h.control_degree = doc.has(at + "/control_degree") ? static_cast<int>(doc.integer(at + "/control_degree", 0, 16)) : 0;
  h.confounded = doc.has(at + "/confounded") && doc.boolean(at + "/confounded");
  h.codewords.clear();
  const std::string cw = at + "/codewords";
  for (std::size_t i = 0; i < doc.array_size(cw); ++i) {
    const std::string w = cw + "/" + std::to_string(i);
    std::vector<int> word;
    for (std::size_t j = 0; j < doc.array_size(w); ++j) {
      word.push_back(static_cast<int>(doc.integer(w + "/" + std::to_string(j), 0, 1)));
    }
    h.codewords.push_back(word);
  }
  try {
    h.validate();
  } catch (const ContractError& e) {
    doc.fail(at, e.what());
  }
  return h;
}

int cmd_experiment(const Options& o, std::ostream&) {
  const JsonDoc doc = JsonDoc::load(o.spec);
  const std::string kind = doc.string("/instance");
  std::vector<std::uint64_t> grid;
  for (std::size_t i = 0; i < doc.array_size("/m_grid"); ++i) {
    grid.push_back(static_cast<std::uint64_t>(doc.integer("/m_grid/" + std::to_string(i), 1, 1LL << 40)));
  }
  if (grid.empty()) doc.fail("/m_grid", "empty m grid");
  const int trials = static_cast<int>(doc.integer("/trials", 1, 100000));
  const std::uint64_t seed = doc.has("/seed") ? static_cast<std::uint64_t>(doc.integer("/seed", 0, 1LL << 62)) : 0;
  LearnConfig cfg;
  cfg.m = 1;

  ConvergenceReport rep;
  Json summary;
  if (kind == "reference") {
    cfg.t = doc.has("/t") ? static_cast<int>(doc.integer("/t", 1, 1 << 30))
                          : default_parameters(6, 2, 2, 2, 0.05, 0.1).t_practical;
    const double min_alpha = doc.has("/min_alpha") ? doc.number("/min_alpha") : 0.05;
    rep = convergence_experiment([&](std::uint64_t s) { return reference_instance(s, min_alpha); }, grid, trials,
                                 cfg, seed);
  } else if (kind == "hard") {
    const HardInstanceSpec h = hard_spec_from(doc, "/hard");
    const int xv = doc.has("/x_val") ? static_cast<int>(doc.integer("/x_val", 0, 1)) : 1;
    cfg.t = doc.has("/t") ? static_cast<int>(doc.integer("/t", 1, 1 << 30)) : 10;
    rep = convergence_experiment(build_hard_instance(h), kHardX, xv, grid, trials, cfg, seed);
    summary["hard"] = {{"n", h.n}, {"alpha", h.alpha}, {"epsilon", h.epsilon}, {"control_degree", h.control_degree},
                       {"confounded", h.confounded}};
  } else if (kind == "model") {
    auto m = read_model(doc.string("/model"));
    const int x = resolve_var(m.graph(), doc.string("/x_var"));
    const int xv = static_cast<int>(doc.integer("/x_val", 0, m.graph().alphabet() - 1));
    const auto ep = effective_parents(m.graph());
    cfg.t = doc.has("/t") ? static_cast<int>(doc.integer("/t", 1, 1 << 30))
                          : default_parameters(m.graph().size(), m.graph().alphabet(), ep.k, ep.d, 0.5, 0.1).t_practical;
    rep = convergence_experiment(m, x, xv, grid, trials, cfg, seed);
  } else {
    doc.fail("/instance", "instance must be one of reference, hard, model");
  }

  std::ostringstream csv;
  csv << "m,trial,tv,seconds\n";
  char buf[128];
  for (const auto& r : rep.records) {
    std::snprintf(buf, sizeof buf, "%llu,%d,%.12g,%.6f\n", static_cast<unsigned long long>(r.m), r.trial, r.tv,
                  r.seconds);
    csv << buf;
  }
  write_file(o.out, csv.str());

  summary["instance"] = kind;
  summary["trials"] = trials;
  summary["seed"] = seed;
  summary["t"] = rep.t;
  summary["slope"] = std::isnan(rep.slope) ? Json(nullptr) : Json(rep.slope);
  summary["grid"] = Json::array();
  for (const auto& s : rep.summary) {
    summary["grid"].push_back({{"m", s.m}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}});
  }
  write_file(report_path(o.out, o.report, ".summary.json"), dump(summary));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning interventional distributions of causal Bayesian networks", "cbn"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  Options o;

  auto* gg = app.add_subcommand("gen-graph", "Random identifiable ADMG");
  gg->add_option("--nodes", o.nodes, "Node count")->required();
  gg->add_option("--in-degree", o.in_degree, "Maximum directed in-degree")->required();
  gg->add_option("--ccomp-size", o.ccomp, "Maximum c-component size")->required();
  gg->add_option("--alphabet", o.alphabet, "Alphabet size")->capture_default_str();
  gg->add_option("--x-var", o.gen_x, "Node index that must satisfy identifiability")->capture_default_str();
  gg->add_option("--seed", o.seed, "Seed")->required();
  gg->add_option("--out", o.out, "Graph file")->required();

  auto* gm = app.add_subcommand("gen-model", "Random ground-truth model on a graph");
  gm->add_option("--graph", o.graph, "Graph file")->required();
  gm->add_option("--lambda", o.lambda, "Mixing weight with the uniform row")->capture_default_str();
  gm->add_option("--hidden-domain", o.hidden_domain, "Hidden alphabet size (default: graph alphabet)");
  gm->add_option("--seed", o.seed, "Seed")->required();
  gm->add_option("--out", o.out, "Model file")->required();

  auto* sa = app.add_subcommand("sample", "Observational samples from a model");
  sa->add_option("--model", o.model, "Model file")->required();
  sa->add_option("--m", o.m, "Sample count")->required();
  sa->add_option("--seed", o.seed, "Seed")->required();
  sa->add_option("--out", o.out, "CSV file")->required();

  auto add_learning = [&](CLI::App* c) {
    c->add_option("--graph", o.graph, "Graph file")->required();
    c->add_option("--samples", o.samples, "CSV file")->required();
    c->add_option("--x-var", o.x_var, "Intervened variable (name or index)")->required();
    c->add_option("--x-val", o.x_val, "Intervention value")->required();
    c->add_option("--epsilon", o.epsilon, "Target accuracy; sets m and t from the theory when --m is absent");
    c->add_option("--alpha", o.alpha, "Positivity margin (default: estimated)");
    c->add_option("--delta", o.delta, "Failure probability")->capture_default_str();
    c->add_option("--m", o.m, "Samples to use (default: all)");
    c->add_option("--t", o.t, "Row threshold");
    c->add_option("--seed", o.seed, "Seed")->capture_default_str();
    c->add_option("--out", o.out, "Output file")->required();
  };
  auto* ld = app.add_subcommand("learn-do", "Learn the interventional model");
  add_learning(ld);
  ld->add_option("--report", o.report, "Report file (default: <out>.report.json)");
  ld->add_option("--model", o.model, "Ground-truth model, for the exact TV in the report");
  ld->add_option("--reps", o.reps, "Odd number of repetitions for amplification")->capture_default_str();
  ld->add_option("--dense", o.dense_out, "Also write the learned P_x as a dense table");
  ld->add_option("--truth-dense", o.truth_dense, "Write the exact P_x of --model as a dense table")->needs("--model");

  auto* ev = app.add_subcommand("eval", "Evaluate a learned model at one assignment");
  ev->add_option("--learned", o.learned, "Learned model file")->required();
  ev->add_option("--assignment", o.assignment, "name=value,...")->required();

  auto* sd = app.add_subcommand("sample-do", "Draw from a learned interventional model");
  sd->add_option("--learned", o.learned, "Learned model file")->required();
  sd->add_option("--m", o.m, "Sample count")->required();
  sd->add_option("--seed", o.seed, "Seed")->required();
  sd->add_option("--out", o.out, "CSV file")->required();

  auto* mg = app.add_subcommand("marginal", "Learn an interventional marginal");
  add_learning(mg);
  mg->add_option("--targets", o.targets, "Comma-separated target variables")->required();
  mg->add_flag("--via-generator", o.via_generator, "Sample the full learned model instead of reducing");
  mg->add_option("--generator-constant", o.generator_constant, "Draws = c |S|^|f| / eps^2")->capture_default_str();

  auto* tv = app.add_subcommand("tv", "Total variation distance between two dense tables");
  tv->add_option("--dense-a", o.dense_a, "Dense file")->required();
  tv->add_option("--dense-b", o.dense_b, "Dense file")->required();

  auto* ex = app.add_subcommand("experiment", "Convergence experiment from a spec file");
  ex->add_option("--spec", o.spec, "Experiment spec (JSON)")->required();
  ex->add_option("--out", o.out, "CSV file")->required();
  ex->add_option("--summary", o.report, "Summary file (default: <out>.summary.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gg) return cmd_gen_graph(o, out);
    if (*gm) return cmd_gen_model(o, out);
    if (*sa) return cmd_sample(o, out);
    if (*ld) return cmd_learn_do(o, out);
    if (*ev) return cmd_eval(o, out);
    if (*sd) return cmd_sample_do(o, out);
    if (*mg) return cmd_marginal(o, out);
    if (*tv) return cmd_tv(o, out);
    if (*ex) return cmd_experiment(o, out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "cbn: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputFormatError& e) {
    err << "cbn: input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const StructuralError& e) {
    err << "cbn: structural error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IdentifiabilityError& e) {
    err << "cbn: not identifiable: " << e.what() << "\n";
    return kExitContract;
  } catch (const ContractError& e) {
    err << "cbn: error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    err << "cbn: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace cbn
