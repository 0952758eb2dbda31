#include "cbn/identify.hpp"
#include "cbn/kernels.hpp"
#include "cbn/model.hpp"
#include "cbn/rng.hpp"
#include "doctest.h"

using namespace cbn;

namespace {

SampleBatch random_batch(int width, int sigma, std::size_t rows, std::uint64_t seed) {
  std::vector<int> cols(width);
  for (int i = 0; i < width; ++i) cols[i] = width - 1 - i;
  SampleBatch b(width, sigma, cols);
  b.resize_rows(rows);
  Rng r(seed);
  for (auto& v : b.data()) v = static_cast<int>(r.below(sigma));
  return b;
}

}  // namespace

TEST_CASE("parallel counting equals the serial reference") {
  auto b = random_batch(20, 2, 30000, 1);
  NodeSet wide;
  for (int v = 2; v < 20; ++v) wide.push_back(v);
  for (int target : {0, 5, 19}) {
    for (const NodeSet& cond : {NodeSet{}, NodeSet{1, 4, 7}, wide}) {
      NodeSet c;
      for (int v : cond) {
        if (v != target) c.push_back(v);
      }
      for (const FixedValues& fixed : {FixedValues{}, FixedValues{{3, 1}}}) {
        auto par = kernels::count_conditional(b, 25000, target, c, fixed);
        auto ser = kernels::serial::count_conditional(b, 25000, target, c, fixed);
        CHECK(par.rows == ser.rows);
        std::int64_t total = 0;
        for (const auto& [k, row] : ser.rows) {
          for (auto x : row) total += x;
        }
        std::size_t matching = 0;
        for (std::size_t r = 0; r < 25000; ++r) matching += fixed.empty() || b.at(r, 3) == 1;
        CHECK(total == static_cast<std::int64_t>(matching));
      }
    }
  }
}

TEST_CASE("count keys are mixed radix over ascending conditioning ids") {
  SampleBatch b(3, 3, {2, 0, 1});
  b.append_row({1, 2, 0});  // V2=1, V0=2, V1=0
  b.append_row({1, 2, 1});
  auto c = kernels::count_conditional(b, 2, 1, {0, 2}, {});
  REQUIRE(c.rows.size() == 1);
  CHECK(c.rows.begin()->first == 2 * 3 + 1);
  CHECK(c.rows.begin()->second == std::vector<std::int64_t>{1, 1, 0});
  CHECK(c.total(7) == 2);
  CHECK(c.total(0) == 0);
}

TEST_CASE("block iteration covers every row once") {
  const std::size_t rows = 3 * kernels::kBlockRows + 17;
  std::vector<int> hits(rows, 0);
  kernels::for_each_block(rows, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) ++hits[r];
  });
  for (int h : hits) CHECK(h == 1);
  CHECK(kernels::thread_count() >= 1);
}
