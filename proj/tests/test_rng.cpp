#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "pcup/rng.hpp"

using namespace pcup;

TEST_CASE("splitmix64 reference outputs") {
  // Published SplitMix64 outputs for seed 1234567.
  Rng rng(1234567);
  CHECK(rng.next_u64() == 6457827717110365317ULL);
  CHECK(rng.next_u64() == 3203168211198807973ULL);
  CHECK(rng.next_u64() == 9817491932198370423ULL);
}

TEST_CASE("uniform stays in [0, 1) and is roughly flat") {
  Rng rng(9);
  std::vector<double> bins(10, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    bins[static_cast<std::size_t>(u * 10)] += 1;
  }
  CHECK(oracle::chi_square_p(bins, std::vector<double>(10, 0.1)) > 0.001);
}

TEST_CASE("below is unbiased for a non power of two bound") {
  Rng rng(17);
  std::vector<double> bins(7, 0.0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    bins[v] += 1;
  }
  CHECK(oracle::chi_square_p(bins, std::vector<double>(7, 1.0 / 7)) > 0.001);
}

TEST_CASE("derive and split are deterministic and distinct") {
  CHECK(Rng::derive(5, 1).state() == Rng::derive(5, 1).state());
  CHECK(Rng::derive(5, 1).state() != Rng::derive(5, 2).state());
  CHECK(Rng::derive(5, 1).state() != Rng::derive(6, 1).state());

  Rng a(3), b(3);
  auto ca = a.split();
  auto cb = b.split();
  CHECK(ca.next_u64() == cb.next_u64());
  CHECK(a.next_u64() == b.next_u64());
  Rng fresh(3);
  fresh.next_u64();
  CHECK(ca.next_u64() != fresh.next_u64());
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng rng(2);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  CHECK_FALSE(std::is_sorted(v.begin(), v.end()));
}
