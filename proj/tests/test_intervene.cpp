#include <algorithm>
#include <cmath>

#include "cbn/errors.hpp"
#include "cbn/identify.hpp"
#include "cbn/intervene.hpp"
#include "cbn/learn.hpp"
#include "cbn/model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cbn;
using testing_support::decode;
using testing_support::ipow;
using testing_support::random_instance;

namespace {

NodeSet all_nodes(const Admg& g) {
  NodeSet s(g.size());
  for (int v = 0; v < g.size(); ++v) s[v] = v;
  return s;
}

double max_abs_diff(const DenseDistribution& a, const DenseDistribution& b) {
  REQUIRE(a.vars() == b.vars());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.cells(); ++i) worst = std::max(worst, std::abs(a.mass()[i] - b.mass()[i]));
  return worst;
}

InterventionalModel exact_model(const testing_support::Instance& inst, const DenseDistribution& p) {
  ExactSource src(p, inst.cbn.graph());
  return InterventionalModel(learn_do(src, inst.cbn.graph(), inst.x, inst.x_val, 0), inst.x, inst.x_val);
}

}  // namespace

TEST_CASE("evaluate_do sums to one and matches identification") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto inst = random_instance(seed + 900);
    const Admg& g = inst.cbn.graph();
    auto p = exact_observational(inst.cbn);
    auto im = exact_model(inst, p);
    const int n = g.size(), sigma = g.alphabet();
    double total = 0.0;
    for (std::size_t i = 0; i < ipow(sigma, n); ++i) {
      auto full = decode(i, n, sigma);
      if (full[inst.x] != 0) continue;
      total += evaluate_do(im, full);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    auto dense = interventional_dense(im);
    CHECK(max_abs_diff(dense, tian_pearl_do(p, g, inst.x, inst.x_val)) <= 1e-12);
    if (inst.lambda < 1.0) CHECK(max_abs_diff(dense, exact_interventional(inst.cbn, inst.x, inst.x_val)) <= 1e-9);
  }
}

TEST_CASE("sampling from the learned interventional model") {
  Admg g = random_identifiable_admg(5, 2, 2, 2, 1, 44);
  auto cbn = random_cbn(g, 2, 0.25, 45);
  auto p = exact_observational(cbn);
  testing_support::Instance inst{cbn, 1, 0, 0.25};
  auto im = exact_model(inst, p);
  auto s = sample_do(im, 1000000, 7);
  CHECK(make_set(s.columns()) == NodeSet{0, 2, 3, 4});
  CHECK(tv_distance(empirical(s, {0, 2, 3, 4}), interventional_dense(im)) <= 0.01);

  auto again = sample_do(im, 5000, 8);
  CHECK(again.data() == sample_do(im, 5000, 8).data());
  CHECK(again.data() == sample_do(im, 5000, 8, Exec::serial).data());
  CHECK(again.data() != sample_do(im, 5000, 9).data());
}

TEST_CASE("point-mass model samples deterministically") {
  std::vector<Factor> fs(2);
  fs[0].node = 0;
  fs[0].rows[0] = {0.0, 1.0};
  fs[1].node = 1;
  fs[1].cond = {0};
  fs[1].rows[0] = {1.0, 0.0};
  fs[1].rows[1] = {0.0, 1.0};
  BayesNetModel model(2, 2, {"A", "B"}, fs);
  auto s = sample_model(model, 10000, 3);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    CHECK(s.at(r, 0) == 1);
    CHECK(s.at(r, 1) == 1);
  }
}

TEST_CASE("model_to_dense") {
  std::vector<Factor> fs(2);
  fs[0].node = 0;
  fs[0].rows[0] = {0.3, 0.7};
  fs[1].node = 1;
  fs[1].cond = {0};
  fs[1].rows[0] = {0.9, 0.1};
  fs[1].rows[1] = {0.2, 0.8};
  BayesNetModel model(2, 2, {"A", "B"}, fs);
  auto d = model_to_dense(model, {0, 1});
  CHECK(d.at(std::vector<int>{0, 0}) == doctest::Approx(0.27));
  CHECK(d.at(std::vector<int>{0, 1}) == doctest::Approx(0.03));
  CHECK(d.at(std::vector<int>{1, 0}) == doctest::Approx(0.14));
  CHECK(d.at(std::vector<int>{1, 1}) == doctest::Approx(0.56));
  auto b = model_to_dense(model, {1});
  CHECK(b.at(std::vector<int>{1}) == doctest::Approx(0.59));
  CHECK(max_abs_diff(model_to_dense(model, {0, 1}, Exec::serial), d) == 0.0);

  // missing rows are uniform
  fs[1].rows.erase(1);
  auto u = model_to_dense(BayesNetModel(2, 2, {"A", "B"}, fs), {0, 1});
  CHECK(u.at(std::vector<int>{1, 0}) == doctest::Approx(0.35));
}

TEST_CASE("M/R evaluator with exact inputs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = random_instance(seed + 1100, true);
    const Admg& g = inst.cbn.graph();
    auto p = exact_observational(inst.cbn);
    ExactSource src(p, g);
    auto mr = build_mr_evaluator(src, g, inst.x, inst.x_val, 0);
    auto truth = exact_interventional(inst.cbn, inst.x, inst.x_val);
    const int n = g.size(), sigma = g.alphabet();
    for (std::size_t i = 0; i < ipow(sigma, n); ++i) {
      auto full = decode(i, n, sigma);
      if (full[inst.x] != 0) continue;
      const double v = evaluate_mr(mr, full);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(std::abs(v - truth.mass()[truth.table().index_from_full(full)]) <= 1e-9);
    }
  }
}

TEST_CASE("M/R evaluator when S_1 is X alone") {
  Admg g(3, 2, {{0, 1}, {1, 2}}, {});
  auto cbn = random_cbn(g, 2, 0.3, 2);
  auto p = exact_observational(cbn);
  ExactSource src(p, g);
  auto mr = build_mr_evaluator(src, g, 1, 1, 0);
  CHECK(mr.a_vars.empty());
  CHECK(mr.b_vars == NodeSet{0});
  CHECK(mr.r_tables.size() == 1);
  auto truth = exact_interventional(cbn, 1, 1);
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 2; ++c) {
      std::vector<int> full{a, 0, c};
      CHECK(evaluate_mr(mr, full) == doctest::Approx(truth.at(std::vector<int>{a, c})).epsilon(1e-12));
    }
  }
}

TEST_CASE("M/R error combines the two marginal errors") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = random_instance(seed + 1300, true);
    const Admg& g = inst.cbn.graph();
    auto p = exact_observational(inst.cbn);
    ExactSource src(p, g);
    auto exact = build_mr_evaluator(src, g, inst.x, inst.x_val, 0);
    auto s = sample_observational(inst.cbn, 3000, seed);
    LearnConfig cfg;
    cfg.m = 3000;
    cfg.t = 10;
    auto learned = build_mr_evaluator(s, g, inst.x, inst.x_val, cfg);

    double eps1 = 0.0, eps2 = 0.0;
    for (std::size_t b = 0; b < exact.m_tables.size(); ++b) {
      eps1 = std::max(eps1, tv_distance(model_to_dense(exact.m_tables[b], exact.a_vars),
                                        model_to_dense(learned.m_tables[b], exact.a_vars)));
    }
    const NodeSet rest = set_union(exact.b_vars, exact.c_vars);
    for (std::size_t a = 0; a < exact.r_tables.size(); ++a) {
      eps2 = std::max(eps2, tv_distance(model_to_dense(exact.r_tables[a], rest),
                                        model_to_dense(learned.r_tables[a], rest)));
    }
    const int n = g.size(), sigma = g.alphabet();
    double l1 = 0.0;
    for (std::size_t i = 0; i < ipow(sigma, n); ++i) {
      auto full = decode(i, n, sigma);
      if (full[inst.x] != 0) continue;
      l1 += std::abs(evaluate_mr(exact, full) - evaluate_mr(learned, full));
    }
    const double k = static_cast<double>(exact.s1.size());
    CHECK(l1 <= std::pow(sigma, k) * (eps1 + eps2) + 1e-12);
  }
}

TEST_CASE("M/R guard") {
  // X with 17 parents in its component
  std::vector<Edge> dir;
  for (int v = 1; v <= 17; ++v) dir.emplace_back(v, 0);
  Admg g(19, 2, dir, {{0, 18}});
  SampleBatch s(19, 2, all_nodes(g));
  s.resize_rows(10);
  LearnConfig cfg;
  cfg.m = 10;
  CHECK_THROWS_AS(build_mr_evaluator(s, g, 0, 0, cfg), GuardError);
}

TEST_CASE("marginal over everything but X is the full estimate") {
  Admg g = random_identifiable_admg(5, 2, 2, 2, 2, 61);
  auto cbn = random_cbn(g, 2, 0.25, 62);
  auto s = sample_observational(cbn, 20000, 63);
  LearnConfig cfg;
  cfg.m = 20000;
  cfg.t = 10;
  auto res = learn_marginal_do(s, g, 2, 1, {0, 1, 3, 4}, cfg);
  CHECK(res.w == all_nodes(g));
  auto full = interventional_dense(InterventionalModel(learn_do(s, g, 2, 1, cfg), 2, 1));
  CHECK(max_abs_diff(res.dist, full) <= 1e-12);
  CHECK(res.report.all_hold());
}

TEST_CASE("marginal learning on a chain") {
  // A -> X -> M -> W with A <-> M
  Admg g(4, 2, {{0, 1}, {1, 2}, {2, 3}}, {{0, 2}}, {"A", "X", "M", "W"});
  auto cbn = random_cbn(g, 2, 0.25, 5);
  auto s = sample_observational(cbn, 100000, 6);
  LearnConfig cfg;
  cfg.m = 100000;
  cfg.t = 10;
  auto res = learn_marginal_do(s, g, 1, 0, {3}, cfg);
  auto truth = exact_interventional(cbn, 1, 0).marginal({3});
  CHECK(res.dist.vars() == NodeSet{3});
  CHECK(tv_distance(res.dist, truth) <= 0.02);

  MarginalOptions gen;
  gen.via_generator = true;
  gen.generator_draws = 200000;
  auto viagen = learn_marginal_do(s, g, 1, 0, {3}, cfg, gen);
  CHECK(viagen.draws == 200000);
  CHECK(tv_distance(viagen.dist, truth) <= 0.03);
  CHECK_THROWS_AS(learn_marginal_do(s, g, 1, 0, {1}, cfg), ContractError);
  CHECK_THROWS_AS(learn_marginal_do(s, g, 1, 0, {}, cfg), ContractError);
}

TEST_CASE("exact marginal construction") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto inst = random_instance(seed + 1500, true);
    const Admg& g = inst.cbn.graph();
    if (g.size() < 2) continue;
    auto p = exact_observational(inst.cbn);
    Rng r(seed);
    NodeSet f;
    for (int v = 0; v < g.size(); ++v) {
      if (v != inst.x && r.below(2)) f.push_back(v);
    }
    if (f.empty()) f.push_back(inst.x == 0 ? 1 : 0);
    auto res = exact_marginal_do(p, g, inst.x, inst.x_val, f);
    auto truth = exact_interventional(inst.cbn, inst.x, inst.x_val).marginal(f);
    CHECK(max_abs_diff(res.dist, truth) <= 1e-9);
    CHECK(res.report.all_hold());
  }
}
