#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "gpc/rng.hpp"

using namespace gpc;

TEST_CASE("derive_seed is deterministic and sensitive to all arguments") {
  const auto s = derive_seed(42, "tag", 7);
  CHECK(s == derive_seed(42, "tag", 7));
  CHECK(s != derive_seed(43, "tag", 7));
  CHECK(s != derive_seed(42, "tag2", 7));
  CHECK(s != derive_seed(42, "tag", 8));
}

TEST_CASE("derived replication seeds do not collide over a large index range") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t j = 0; j < 10000; ++j)
    seen.insert(derive_seed(1, "rep", j));
  CHECK(seen.size() == 10000);
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.gaussian() == b.gaussian());
  }
}

TEST_CASE("uniform stays strictly inside (0,1)") {
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform(lo,hi) respects the interval and its mean") {
  Rng rng(9);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(2.0, 6.0);
    REQUIRE(u >= 2.0);
    REQUIRE(u <= 6.0);
    s += u;
  }
  CHECK(std::abs(s / n - 4.0) < 0.02);
}

TEST_CASE("gaussian sample moments match the standard normal") {
  Rng rng(77);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
    s3 += g * g * g;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s3 / n) < 0.05);
}

TEST_CASE("permutation is a valid shuffle of 0..n-1") {
  Rng rng(3);
  auto p = rng.permutation(50);
  REQUIRE(p.size() == 50);
  std::sort(p.begin(), p.end());
  for (int i = 0; i < 50; ++i) CHECK(p[i] == i);
}

TEST_CASE("permutations vary across draws") {
  Rng rng(4);
  auto a = rng.permutation(20);
  auto b = rng.permutation(20);
  CHECK(a != b);
}
