#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "gpc/design.hpp"

using namespace gpc;

TEST_CASE("latin hypercube puts exactly one point in each stratum per dimension") {
  Rng rng(12);
  const int n = 40;
  Design d = lhs(n, {{0.0, 1.0}, {-2.0, 4.0}}, rng);
  REQUIRE(d.size() == n);
  REQUIRE(d.dim() == 2);
  for (int k = 0; k < 2; ++k) {
    std::vector<int> counts(n, 0);
    for (const auto& p : d.points) {
      const double u = (p[k] - d.bounds[k].lo) / (d.bounds[k].hi - d.bounds[k].lo);
      REQUIRE(u >= 0.0);
      REQUIRE(u <= 1.0);
      ++counts[std::min(n - 1, static_cast<int>(u * n))];
    }
    for (int c : counts) CHECK(c == 1);
  }
}

TEST_CASE("lhs validates its arguments") {
  Rng rng(1);
  CHECK_THROWS_AS(lhs(0, {{0.0, 1.0}}, rng), ConfigError);
  CHECK_THROWS_AS(lhs(5, {{1.0, 1.0}}, rng), ConfigError);
  CHECK_THROWS_AS(lhs(5, {{2.0, 1.0}}, rng), ConfigError);
}

TEST_CASE("lhs is deterministic given the generator state") {
  Rng a(9), b(9);
  Design da = lhs1d(15, 0.0, 1.0, a);
  Design db = lhs1d(15, 0.0, 1.0, b);
  for (int i = 0; i < 15; ++i) CHECK(da.points[i][0] == db.points[i][0]);
}

TEST_CASE("fill distance of a uniform 1-d grid matches the half-spacing") {
  // n points at (i + 0.5)/n: the farthest domain point sits at either end
  // or mid-gap, both at distance 0.5/n.
  const int n = 10;
  Design d;
  d.bounds = {{0.0, 1.0}};
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(1);
    p[0] = (i + 0.5) / n;
    d.points.push_back(p);
  }
  const double h = fill_distance(d, 2001);
  CHECK(h == Catch::Approx(0.05).margin(1e-3));
}

TEST_CASE("fill distance shrinks as designs refine") {
  Rng rng(4);
  double prev = 1e9;
  for (int n : {10, 40, 160}) {
    Design d = lhs1d(n, 0.0, 1.0, rng);
    const double h = fill_distance(d, 2001);
    CHECK(h < prev);
    prev = h;
  }
}

TEST_CASE("fill distance rejects empty designs and tiny probe grids") {
  Design d;
  d.bounds = {{0.0, 1.0}};
  CHECK_THROWS_AS(fill_distance(d), DomainError);
  Eigen::VectorXd p(1);
  p[0] = 0.5;
  d.points.push_back(p);
  CHECK_THROWS_AS(fill_distance(d, 5), ConfigError);
}

TEST_CASE("local fill distance never exceeds the global one") {
  Rng rng(8);
  Design d = lhs1d(20, 0.0, 1.0, rng);
  const double h = fill_distance(d, 1001);
  Eigen::VectorXd x(1);
  for (double c : {0.1, 0.5, 0.9}) {
    x[0] = c;
    CHECK(local_fill_distance(d, x, 0.2, 1001) <= h + 1e-12);
  }
  CHECK_THROWS_AS(local_fill_distance(d, x, -0.1, 1001), ConfigError);
}

TEST_CASE("local fill distance grows with the ball radius") {
  Rng rng(3);
  Design d = lhs1d(12, 0.0, 1.0, rng);
  Eigen::VectorXd x(1);
  x[0] = 0.5;
  const double a = local_fill_distance(d, x, 0.05, 1001);
  const double b = local_fill_distance(d, x, 0.45, 1001);
  CHECK(a <= b + 1e-12);
}

TEST_CASE("design CSV export includes bounds and all points") {
  Rng rng(2);
  Design d = lhs(3, {{0.0, 2.0}, {1.0, 3.0}}, rng);
  std::ostringstream os;
  write_design_csv(d, os);
  const std::string s = os.str();
  CHECK(s.find("# bounds [0,2] [1,3]") != std::string::npos);
  CHECK(s.find("x0,x1") != std::string::npos);
  // header + column row + 3 data rows
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}
