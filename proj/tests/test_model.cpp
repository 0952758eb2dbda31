#include <cmath>

#include "cbn/errors.hpp"
#include "cbn/intervene.hpp"
#include "cbn/model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cbn;
using testing_support::random_instance;

TEST_CASE("random_cbn smoothing") {
  Admg g = random_admg(5, 2, 2, 3, 4);
  auto uni = random_cbn(g, 3, 1.0, 1);
  for (const auto& rows : uni.cpts()) {
    for (const auto& row : rows) {
      for (double p : row) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-14));
    }
  }
  auto obs = exact_observational(uni);
  for (double p : obs.mass()) CHECK(p == doctest::Approx(1.0 / 243).epsilon(1e-12));

  auto a = random_cbn(g, 3, 0.25, 77);
  auto b = random_cbn(g, 3, 0.25, 77);
  CHECK(a == b);
  CHECK_FALSE(a == random_cbn(g, 3, 0.25, 78));
  for (const auto& rows : a.cpts()) {
    for (const auto& row : rows) {
      for (double p : row) CHECK(p >= 0.25 / 3 - 1e-15);
    }
  }
  CHECK_THROWS_AS(random_cbn(g, 3, 1.5, 0), ContractError);
}

TEST_CASE("model validation") {
  Admg g(2, 2, {{0, 1}}, {});
  CHECK_THROWS_AS(GroundTruthCbn(g, 2, {}, {{{0.5, 0.5}}, {{0.5, 0.5}}}), ContractError);  // wrong row count
  CHECK_THROWS_AS(GroundTruthCbn(g, 2, {}, {{{0.5, 0.6}}, {{0.5, 0.5}, {0.5, 0.5}}}), ContractError);
  CHECK_THROWS_AS(GroundTruthCbn(g, 2, {{0.5, 0.5}}, {{{0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}}), ContractError);
  CHECK_NOTHROW(GroundTruthCbn(g, 2, {}, {{{0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}}));
}

TEST_CASE("sampling") {
  Admg g = random_admg(4, 2, 2, 3, 8);
  auto uni = random_cbn(g, 3, 1.0, 2);
  auto s = sample_observational(uni, 100000, 11);
  CHECK(s.columns() == g.order());
  for (int v = 0; v < 4; ++v) {
    std::vector<double> freq(3, 0.0);
    for (std::size_t r = 0; r < s.rows(); ++r) freq[s.at(r, v)] += 1.0;
    for (double f : freq) CHECK(std::abs(f / s.rows() - 1.0 / 3) <= 0.02);
  }
  auto again = sample_observational(uni, 100000, 11);
  CHECK(again.data() == s.data());
  auto serial = sample_observational(uni, 100000, 11, Exec::serial);
  CHECK(serial.data() == s.data());
  CHECK_FALSE(sample_observational(uni, 1000, 12).data() == s.slice(0, 1000).data());

  // point masses
  Admg pair(2, 2, {{0, 1}}, {});
  GroundTruthCbn det(pair, 2, {}, {{{0.0, 1.0}}, {{1.0, 0.0}, {1.0, 0.0}}});
  auto d = sample_observational(det, 500, 3);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    CHECK(d.at(r, 0) == 1);
    CHECK(d.at(r, 1) == 0);
  }
  CHECK_THROWS_AS(sample_observational(det, 0, 1), ContractError);
}

TEST_CASE("empirical distribution converges to the exact one") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = random_instance(seed + 40);
    auto exact = exact_observational(inst.cbn);
    if (exact.cells() > 400) continue;
    auto s = sample_observational(inst.cbn, 1000000, seed);
    NodeSet all(inst.cbn.graph().size());
    for (int v = 0; v < inst.cbn.graph().size(); ++v) all[v] = v;
    CHECK(tv_distance(empirical(s, all), exact) <= 0.01);
  }
}

TEST_CASE("exact observational by hand") {
  Admg one(1, 2, {}, {});
  GroundTruthCbn m(one, 2, {}, {{{0.3, 0.7}}});
  auto p = exact_observational(m);
  CHECK(p.mass()[0] == doctest::Approx(0.3));
  CHECK(p.mass()[1] == doctest::Approx(0.7));

  // A <-> B through hidden U
  Admg conf(2, 2, {}, {{0, 1}});
  const std::vector<double> prior{0.4, 0.6};
  const std::vector<std::vector<double>> pa{{0.9, 0.1}, {0.2, 0.8}};
  const std::vector<std::vector<double>> pb{{0.3, 0.7}, {0.6, 0.4}};
  GroundTruthCbn c(conf, 2, {prior}, {pa, pb});
  auto q = exact_observational(c);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int u = 0; u < 2; ++u) s += prior[u] * pa[u][a] * pb[u][b];
      CHECK(q.mass()[a * 2 + b] == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("exact distributions are normalized and thread independent") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto inst = random_instance(seed);
    auto p = exact_observational(inst.cbn);
    double s = 0.0;
    for (double v : p.mass()) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-12);
    auto serial = exact_observational(inst.cbn, Exec::serial);
    CHECK(serial.mass() == p.mass());
    auto px = exact_interventional(inst.cbn, inst.x, inst.x_val);
    double sx = 0.0;
    for (double v : px.mass()) sx += v;
    CHECK(std::abs(sx - 1.0) <= 1e-12);
  }
}

TEST_CASE("truncation consistency for an unconfounded source") {
  // X=0 source, X->1, X->2, 1->2, 1<->2
  Admg g(3, 2, {{0, 1}, {0, 2}, {1, 2}}, {{1, 2}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = random_cbn(g, 2, 0.25, seed);
    auto p = exact_observational(m);
    for (int x = 0; x < 2; ++x) {
      auto px = exact_interventional(m, 0, x);
      const double px_mass = p.marginal({0}).mass()[x];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double cond = p.mass()[(x * 2 + a) * 2 + b] / px_mass;
          CHECK(std::abs(px.mass()[a * 2 + b] - cond) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("intervening on a sink keeps the rest observational") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Admg g = random_admg(5, 2, 2, 2, seed);
    int sink = -1;
    for (int v = 0; v < 5 && sink < 0; ++v) {
      if (g.children(v).empty()) sink = v;
    }
    auto m = random_cbn(g, 2, 0.25, seed + 100);
    auto px = exact_interventional(m, sink, 1);
    NodeSet rest;
    for (int v = 0; v < 5; ++v) {
      if (v != sink) rest.push_back(v);
    }
    CHECK(tv_distance(px, exact_observational(m).marginal(rest)) <= 1e-12);
  }
}

TEST_CASE("exact ops refuse large spaces") {
  Admg g = random_admg(25, 1, 1, 2, 1);
  auto m = random_cbn(g, 2, 0.5, 1);
  CHECK_THROWS_AS(exact_observational(m), GuardError);
  CHECK_THROWS_AS(exact_interventional(m, 0, 0), GuardError);
}
