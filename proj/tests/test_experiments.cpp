#include <algorithm>
#include <cmath>

#include "cbn/errors.hpp"
#include "cbn/experiments.hpp"
#include "cbn/intervene.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cbn;

namespace {

HardInstanceSpec spec(int n, double alpha, double eps, std::vector<std::vector<int>> code, int d = 0,
                      bool confounded = false) {
  HardInstanceSpec s;
  s.n = n;
  s.alpha = alpha;
  s.epsilon = eps;
  s.codewords = std::move(code);
  s.control_degree = d;
  s.confounded = confounded;
  return s;
}

NodeSet all_but_x(const GroundTruthCbn& m) {
  NodeSet s;
  for (int v = 0; v < m.graph().size(); ++v) {
    if (v != kHardX) s.push_back(v);
  }
  return s;
}

// (1,0) positions of a against b
int separation(const std::vector<int>& a, const std::vector<int>& b) {
  int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] == 1 && b[i] == 0;
  return s;
}

}  // namespace

TEST_CASE("single effect variable") {
  for (double eps : {0.05, 0.1, 0.25}) {
    auto m = build_hard_instance(spec(1, 0.3, eps, {{1}}));
    auto px = exact_interventional(m, kHardX, 1).marginal({2});
    CHECK(px.at(std::vector<int>{1}) == doctest::Approx((1 + eps) / 2).epsilon(1e-14));
  }
}

TEST_CASE("the X = Z branch leaves every effect fair") {
  auto m = build_hard_instance(spec(4, 0.2, 0.3, {{1, 0, 0, 1}}));
  auto p = exact_observational(m);
  for (int j = 0; j < 4; ++j) {
    const int y = 2 + j;
    auto joint = p.marginal({kHardZ, kHardX, y});
    for (int z = 0; z < 2; ++z) {
      const double p1 = joint.at(std::vector<int>{z, z, 1});
      const double p0 = joint.at(std::vector<int>{z, z, 0});
      CHECK(p1 / (p0 + p1) == doctest::Approx(0.5).epsilon(1e-14));
    }
  }
  auto zx = p.marginal({kHardZ, kHardX});
  CHECK(zx.at(std::vector<int>{0, 1}) == doctest::Approx(0.1));
  CHECK(zx.at(std::vector<int>{1, 1}) == doctest::Approx(0.4));
}

TEST_CASE("confounded variant has the same interventional distribution") {
  auto code = std::vector<std::vector<int>>{{1, 0, 1}, {0, 1, 1}};
  for (double alpha : {0.05, 0.5}) {
    auto plain = build_hard_instance(spec(3, alpha, 0.2, code, 1));
    auto conf = build_hard_instance(spec(3, alpha, 0.2, code, 1, true));
    CHECK(conf.graph().bidirected().size() == 1);
    CHECK(conf.hidden_count() == 1);
    for (int xv = 0; xv < 2; ++xv) {
      CHECK(tv_distance(exact_interventional(plain, kHardX, xv), exact_interventional(conf, kHardX, xv)) <= 1e-12);
    }
    CHECK(tv_distance(exact_observational(plain), exact_observational(conf)) <= 1e-12);
  }
}

TEST_CASE("control variables select the codeword") {
  auto s = spec(2, 0.5, 0.2, {{1, 1}, {0, 0}}, 1);
  auto m = build_hard_instance(s);
  auto px = exact_interventional(m, kHardX, 1);
  const double d = s.delta();
  // Z = 0, W = 0 -> codeword 11
  const double pz0w0 = px.at(std::vector<int>{0, 0, 1, 1});
  CHECK(pz0w0 == doctest::Approx(0.25 * (0.5 + d) * (0.5 + d)));
  const double pz0w1 = px.at(std::vector<int>{0, 1, 1, 1});
  CHECK(pz0w1 == doctest::Approx(0.25 * (0.5 - d) * (0.5 - d)));
}

TEST_CASE("hard instance validation") {
  CHECK_THROWS_AS(build_hard_instance(spec(2, 0.6, 0.1, {{1, 0}})), ContractError);
  CHECK_THROWS_AS(build_hard_instance(spec(2, 0.0, 0.1, {{1, 0}})), ContractError);
  CHECK_THROWS_AS(build_hard_instance(spec(4, 0.2, 0.6, {{1, 0, 0, 1}})), ContractError);
  CHECK_NOTHROW(build_hard_instance(spec(4, 0.2, 0.5, {{1, 0, 0, 1}})));
  CHECK_THROWS_AS(build_hard_instance(spec(2, 0.2, 0.1, {{1, 0, 1}})), ContractError);
  CHECK_THROWS_AS(build_hard_instance(spec(2, 0.2, 0.1, {{1, 0}}, 1)), ContractError);
  CHECK_THROWS_AS(build_hard_instance(spec(2, 0.2, 0.1, {{1, 2}})), ContractError);
}

TEST_CASE("random codes") {
  auto c = random_code(32, 2, 0.125, 11);
  REQUIRE(c.size() == 2);
  for (const auto& w : c) CHECK(std::count(w.begin(), w.end(), 1) == 16);
  CHECK(separation(c[0], c[1]) >= 4);
  CHECK(separation(c[1], c[0]) >= 4);
  CHECK(random_code(32, 2, 0.125, 11) == c);
  CHECK(random_code(32, 2, 0.125, 12) != c);
  auto many = random_code(16, 8, 0.125, 3);
  for (std::size_t a = 0; a < many.size(); ++a) {
    for (std::size_t b = 0; b < many.size(); ++b) {
      if (a != b) CHECK(separation(many[a], many[b]) >= 2);
    }
  }
  std::vector<int> ones(10, 1), zeros(10, 0);
  CHECK(separation(ones, zeros) == 10);
  // only six balanced words of length 4 exist
  CHECK_THROWS_AS(random_code(4, 7, 0.25, 1, 200), ContractError);
  CHECK_THROWS_AS(random_code(8, 1, 0.125, 1), ContractError);
  CHECK_THROWS_AS(random_code(8, 2, 0.3, 1), ContractError);
}

TEST_CASE("product Bernoulli TV by enumeration") {
  for (int l1 = 0; l1 <= 3; ++l1) {
    for (int l2 = 0; l2 <= 3; ++l2) {
      const double d = 0.15;
      const int l = l1 + l2;
      double s = 0.0;
      for (int bits = 0; bits < (1 << l); ++bits) {
        double p = 1.0, q = 1.0;
        for (int i = 0; i < l; ++i) {
          const int b = (bits >> i) & 1;
          const double pp = i < l1 ? 0.5 + d : 0.5 - d;
          const double qq = 1.0 - pp;
          p *= b ? pp : 1.0 - pp;
          q *= b ? qq : 1.0 - qq;
        }
        s += std::abs(p - q);
      }
      CHECK(product_bernoulli_tv(l1, l2, d) == doctest::Approx(0.5 * s).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed forms agree with the dense oracle") {
  for (int n : {8, 16}) {
    auto code = random_code(n, 2, 0.125, static_cast<std::uint64_t>(n));
    for (bool confounded : {false, true}) {
      auto a = spec(n, 0.2, 0.4, {code[0]}, 0, confounded);
      auto b = spec(n, 0.2, 0.4, {code[1]}, 0, confounded);
      auto ma = build_hard_instance(a), mb = build_hard_instance(b);
      CHECK(hard_pair_kl(a, b) == doctest::Approx(kl_distance(exact_observational(ma), exact_observational(mb))).epsilon(1e-10));
      CHECK(hard_pair_tv_do(a, b) ==
            doctest::Approx(tv_distance(exact_interventional(ma, kHardX, 1), exact_interventional(mb, kHardX, 1))).epsilon(1e-10));
    }
  }
  auto code = random_code(6, 4, 0.125, 5);
  auto a = spec(6, 0.3, 0.3, {code[0], code[1]}, 1);
  auto b = spec(6, 0.3, 0.3, {code[2], code[3]}, 1);
  auto ma = build_hard_instance(a), mb = build_hard_instance(b);
  CHECK(hard_pair_kl(a, b) == doctest::Approx(kl_distance(exact_observational(ma), exact_observational(mb))).epsilon(1e-10));
  CHECK(hard_pair_tv_do(a, b) ==
        doctest::Approx(tv_distance(exact_interventional(ma, kHardX, 1), exact_interventional(mb, kHardX, 1))).epsilon(1e-10));
  CHECK_THROWS_AS(hard_pair_kl(a, spec(6, 0.2, 0.3, {code[2], code[3]}, 1)), ContractError);
}

TEST_CASE("KL and TV brackets on separated codes") {
  for (int n : {8, 16, 32}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto code = random_code(n, 2, 0.125, seed);
      if (separation(code[0], code[1]) == n / 2 && separation(code[1], code[0]) == n / 2) continue;
      for (double alpha : {0.05, 0.2, 0.5}) {
        for (double eps : {0.1, 0.5}) {
          auto a = spec(n, alpha, eps, {code[0]});
          auto b = spec(n, alpha, eps, {code[1]});
          const double kl = hard_pair_kl(a, b);
          CHECK(kl <= 8 * alpha * eps * eps);
          CHECK(kl >= alpha * eps * eps / 8);
          CHECK(hard_pair_tv_do(a, b) >= eps / 8);
        }
      }
    }
  }
}

TEST_CASE("complementary codewords sit just above the upper KL bracket") {
  for (int n : {8, 16, 32}) {
    auto a = spec(n, 0.2, 0.1, {std::vector<int>(n, 1)});
    auto b = spec(n, 0.2, 0.1, {std::vector<int>(n, 0)});
    const double kl = hard_pair_kl(a, b);
    CHECK(kl > 8 * 0.2 * 0.01);
    CHECK(kl < 1.01 * 8 * 0.2 * 0.01);
  }
}

TEST_CASE("statistics helpers") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({4, 1, 2, 3}, 0.5) == 2.5);
  CHECK(quantile({4, 1, 2, 3}, 0.25) == doctest::Approx(1.75));
  CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
  CHECK(loglog_slope({1, 4, 16}, {2, 1, 0.5}) == doctest::Approx(-0.5));
  CHECK(std::isnan(loglog_slope({1, 2}, {0, 1})));
}

TEST_CASE("reference family") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto inst = reference_instance(s);
    const Admg& g = inst.cbn.graph();
    CHECK(g.size() == 6);
    CHECK(g.alphabet() == 2);
    auto ep = effective_parents(g);
    CHECK(ep.k == 2);
    CHECK(ep.d == 2);
    CHECK(check_identifiability(g, inst.x).identifiable);
    auto p = exact_observational(inst.cbn);
    CHECK(strong_positivity_margin(p, parent_sets(g, c_components(g).of(inst.x)).pa_plus) >= 0.05);
  }
  CHECK(reference_instance(3).cbn == reference_instance(3).cbn);
}

TEST_CASE("convergence experiment") {
  LearnConfig cfg;
  cfg.t = 10;
  const std::vector<std::uint64_t> grid{1000, 4000, 16000};
  auto rep = convergence_experiment([](std::uint64_t s) { return reference_instance(s); }, grid, 20, cfg, 5);
  REQUIRE(rep.records.size() == 60);
  REQUIRE(rep.summary.size() == 3);
  CHECK(rep.t == 10);
  for (std::size_t i = 0; i + 1 < rep.summary.size(); ++i) CHECK(rep.summary[i + 1].median <= rep.summary[i].median);
  for (const auto& s : rep.summary) {
    CHECK(s.q1 <= s.median);
    CHECK(s.median <= s.q3);
  }
  CHECK(rep.slope < 0.0);

  auto again = convergence_experiment([](std::uint64_t s) { return reference_instance(s); }, grid, 20, cfg, 5);
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    CHECK(again.records[i].m == rep.records[i].m);
    CHECK(again.records[i].trial == rep.records[i].trial);
    CHECK(again.records[i].tv == rep.records[i].tv);
  }

  // uniform truth stays at the noise floor
  Admg g = random_identifiable_admg(5, 2, 2, 2, 0, 8);
  auto uniform = random_cbn(g, 2, 1.0, 9);
  auto flat = convergence_experiment(uniform, 0, 1, {500, 5000}, 10, cfg, 1);
  for (const auto& s : flat.summary) CHECK(s.median <= 0.1);

  CHECK_THROWS_AS(convergence_experiment(uniform, 0, 1, {}, 10, cfg, 1), ContractError);
  CHECK_THROWS_AS(convergence_experiment(uniform, 0, 1, {100}, 0, cfg, 1), ContractError);
}

TEST_CASE("smaller alpha is harder to learn") {
  std::vector<double> med;
  for (double a : {0.05, 0.1, 0.2, 0.4}) {
    auto m = build_hard_instance(spec(4, a, 0.2, {{1, 0, 1, 0}}));
    LearnConfig cfg;
    cfg.t = 10;
    med.push_back(convergence_experiment(m, kHardX, 1, {20000}, 20, cfg, 3).summary[0].median);
  }
  for (std::size_t i = 0; i + 1 < med.size(); ++i) CHECK(med[i + 1] <= med[i]);
}
