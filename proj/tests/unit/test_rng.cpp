#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/parallel.hpp"
#include "skewfbm/mc/rng.hpp"

using namespace skewfbm::mc;

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("substreams are distinct and reproducible") {
  std::set<std::uint32_t> first;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (std::uint64_t p = 0; p < 64; ++p) first.insert(Philox({seed, p})());
  CHECK(first.size() == 256);
  Philox a({7, 3}), b({7, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("normal draws have unit variance") {
  Philox g({1, 0});
  std::vector<double> x(200000);
  for (auto& v : x) v = g.normal();
  const auto m = estimate(x);
  CHECK(std::abs(m.mean) < 4 * m.std_error);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  const auto v = estimate(sq);
  CHECK(std::abs(v.mean - 1.0) < 4 * v.std_error);
}

TEST_CASE("estimators") {
  CHECK_THROWS_WITH(estimate(std::vector<double>{}), "empty study");
  const std::vector<double> x{1, 2, 3, 4};
  const auto r = estimate(x);
  CHECK(r.mean == doctest::Approx(2.5));
  CHECK(r.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> w{1, 1, 1, 1};
  const auto wr = weighted_estimate(x, w);
  CHECK(wr.mean == doctest::Approx(2.5));
  CHECK(*wr.ess == doctest::Approx(4.0));
  CHECK(kish_ess(std::vector<double>{1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("parallel_map is worker-count invariant") {
  auto f = [](std::size_t i) { return Philox({5, i}).normal(); };
  const auto a = parallel_map(1000, 1, f);
  const auto b = parallel_map(1000, 7, f);
  CHECK(a == b);
  CHECK_THROWS(parallel_map(10, 3, [](std::size_t i) -> int {
    if (i == 5) throw std::runtime_error("x");
    return 0;
  }));
}
