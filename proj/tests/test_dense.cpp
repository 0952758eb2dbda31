#include <cmath>

#include "cbn/dense.hpp"
#include "cbn/errors.hpp"
#include "cbn/rng.hpp"
#include "doctest.h"

using namespace cbn;

namespace {

DenseDistribution dist(std::vector<int> vars, std::vector<int> sizes, std::vector<double> mass) {
  Table t(std::move(vars), std::move(sizes));
  t.values = std::move(mass);
  return DenseDistribution(std::move(t));
}

DenseDistribution random_dist(Rng& r, std::vector<int> vars, std::vector<int> sizes, double zero_prob = 0.0) {
  Table t(std::move(vars), std::move(sizes));
  double s = 0.0;
  for (auto& v : t.values) {
    v = r.uniform() < zero_prob ? 0.0 : r.exponential();
    s += v;
  }
  if (s == 0.0) {
    t.values[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : t.values) v /= s;
  return DenseDistribution(std::move(t));
}

}  // namespace

TEST_CASE("distances on small examples") {
  auto p = dist({0}, {2}, {0.5, 0.5});
  auto q = dist({0}, {2}, {1.0, 0.0});
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(kl_distance(p, p) == 0.0);
  CHECK(tv_distance(p, q) == doctest::Approx(0.5));
  auto a = dist({0}, {2}, {1.0, 0.0});
  auto b = dist({0}, {2}, {0.0, 1.0});
  CHECK(tv_distance(a, b) == 1.0);
  CHECK_THROWS_AS(kl_distance(p, q), ContractError);
  CHECK(kl_distance(q, p) == doctest::Approx(std::log(2.0)));
  auto other = dist({1}, {2}, {0.5, 0.5});
  CHECK_THROWS_AS(tv_distance(p, other), ContractError);
}

TEST_CASE("distribution validation") {
  Table t({0}, {2});
  t.values = {0.5, 0.6};
  CHECK_THROWS_AS(DenseDistribution{t}, ContractError);
  t.values = {-0.1, 1.1};
  CHECK_THROWS_AS(DenseDistribution{t}, ContractError);
  CHECK_THROWS_AS(Table({0, 0}, {2, 2}), ContractError);
  CHECK_THROWS_AS(Table(std::vector<int>(25, 0), std::vector<int>(25, 2)), ContractError);
  std::vector<int> vars(25);
  for (int i = 0; i < 25; ++i) vars[i] = i;
  CHECK_THROWS_AS(Table(vars, std::vector<int>(25, 2)), GuardError);
}

TEST_CASE("pinsker holds on random pairs") {
  Rng r(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int s = 2 + static_cast<int>(r.below(6));
    auto p = random_dist(r, {0, 1}, {s, 2}, 0.2);
    auto q = random_dist(r, {0, 1}, {s, 2});
    CHECK(tv_distance(p, q) <= std::sqrt(2.0 * kl_distance(p, q)) + 1e-15);
  }
}

TEST_CASE("marginalization matches brute force") {
  Rng r(9);
  auto p = random_dist(r, {0, 1, 2}, {2, 3, 2});
  auto m = p.marginal({2, 0});
  CHECK(m.vars() == std::vector<int>{2, 0});
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      double s = 0.0;
      for (int b = 0; b < 3; ++b) s += p.mass()[(a * 3 + b) * 2 + c];
      CHECK(m.mass()[c * 2 + a] == doctest::Approx(s).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(p.marginal({7}), ContractError);
}

TEST_CASE("strong positivity margin") {
  Table t({0, 1, 2}, {2, 2, 2});
  for (auto& v : t.values) v = 1.0 / 8;
  DenseDistribution u(t);
  CHECK(strong_positivity_margin(u, {}) == 1.0);
  CHECK(strong_positivity_margin(u, {1}) == doctest::Approx(0.5));
  CHECK(strong_positivity_margin(u, {0, 2}) == doctest::Approx(0.25));
  auto z = dist({0, 1}, {2, 2}, {0.5, 0.5, 0.0, 0.0});
  CHECK(strong_positivity_margin(z, {0}) == 0.0);

  Rng r(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_dist(r, {0, 1, 2, 3}, {2, 3, 2, 2}, 0.1);
    NodeSet s;
    double prev = 1.0;
    for (int v : {2, 0, 3, 1}) {
      s = set_union(s, NodeSet{v});
      const double a = strong_positivity_margin(p, s);
      CHECK(a <= prev + 1e-15);
      prev = a;
    }
  }
}
