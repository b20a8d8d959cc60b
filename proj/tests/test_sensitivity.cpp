#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gpc/sensitivity.hpp"

using namespace gpc;

TEST_CASE("inverse normal CDF hits standard quantiles") {
  CHECK(detail::inv_normal_cdf(0.5) == Catch::Approx(0.0).margin(1e-9));
  CHECK(detail::inv_normal_cdf(0.975) ==
        Catch::Approx(1.9599639845400542).margin(1e-7));
  CHECK(detail::inv_normal_cdf(0.025) ==
        Catch::Approx(-1.9599639845400542).margin(1e-7));
  CHECK_THROWS_AS(detail::inv_normal_cdf(0.0), DomainError);
  CHECK_THROWS_AS(detail::inv_normal_cdf(1.0), DomainError);
}

TEST_CASE("marginals transform uniforms through their inverse CDFs") {
  CHECK(Marginal::uniform(2.0, 6.0).transform(0.25) == Catch::Approx(3.0));
  CHECK(Marginal::normal(1.0, 2.0).transform(0.5) == Catch::Approx(1.0).margin(1e-8));
  CHECK(Marginal::fixed(7.0).transform(0.99) == 7.0);
  CHECK_THROWS_AS(Marginal::normal(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), ConfigError);
}

TEST_CASE("input spec counts dimensions and active factors") {
  InputSpec spec;
  spec.factors.push_back({"v", {Marginal::normal(0, 1), Marginal::normal(0, 1)}});
  spec.factors.push_back({"c", {Marginal::fixed(3.0)}});
  spec.factors.push_back({"u", {Marginal::uniform(0, 1)}});
  CHECK(spec.total_dim() == 4);
  CHECK(spec.num_factors() == 2);  // fixed inputs are not factors
}

TEST_CASE("saltelli plan has the pick-freeze structure") {
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"v", {Marginal::uniform(0, 1), Marginal::uniform(0, 1)}});
  spec.factors.push_back({"c", {Marginal::fixed(5.0)}});
  Rng rng(3);
  SaltelliPlan plan = saltelli_matrices(spec, 64, rng);
  REQUIRE(plan.AB.size() == 2);
  CHECK(plan.total_evaluations() == 64 * (2 + 2));
  // fixed column is constant everywhere
  CHECK((plan.A.col(3).array() == 5.0).all());
  CHECK((plan.B.col(3).array() == 5.0).all());
  // AB_0 swaps only factor x1's column
  CHECK((plan.AB[0].col(0) - plan.B.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((plan.AB[0].rightCols(3) - plan.A.rightCols(3)).cwiseAbs().maxCoeff() == 0.0);
  // AB_1 swaps the vector factor's two columns jointly
  CHECK((plan.AB[1].col(1) - plan.B.col(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((plan.AB[1].col(2) - plan.B.col(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((plan.AB[1].col(0) - plan.A.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(saltelli_matrices(spec, 1, rng), ConfigError);
}

TEST_CASE("base matrices are stratified per column") {
  InputSpec spec;
  spec.factors.push_back({"x", {Marginal::uniform(0.0, 1.0)}});
  Rng rng(8);
  const int n = 50;
  SaltelliPlan plan = saltelli_matrices(spec, n, rng);
  std::vector<int> counts(n, 0);
  for (int i = 0; i < n; ++i)
    ++counts[std::min(n - 1, static_cast<int>(plan.A(i, 0) * n))];
  for (int c : counts) CHECK(c == 1);
}

TEST_CASE("additive model recovers the analytic variance shares") {
  // Y = X1 + 2 X2 with X ~ U(0,1): V1 = 1/12, V2 = 4/12 -> S1 = 0.2, S2 = 0.8
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"x2", {Marginal::uniform(0, 1)}});
  Rng rng(5);
  SaltelliPlan plan = saltelli_matrices(spec, 10000, rng);
  SobolResult r = sobol_indices(
      spec, plan,
      [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, x[0] + 2.0 * x[1]);
      },
      1);
  CHECK(r.first_order[0][0] == Catch::Approx(0.2).margin(0.05));
  CHECK(r.first_order[1][0] == Catch::Approx(0.8).margin(0.05));
  CHECK(r.total[0][0] == Catch::Approx(0.2).margin(0.05));
  CHECK(r.total[1][0] == Catch::Approx(0.8).margin(0.05));
  // additive: first-order indices sum to one
  CHECK(r.first_order[0][0] + r.first_order[1][0] == Catch::Approx(1.0).margin(0.05));
  CHECK(r.output_variance[0] == Catch::Approx(5.0 / 12.0).margin(0.02));
}

TEST_CASE("an inert input gets a near-zero index") {
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"dead", {Marginal::uniform(0, 1)}});
  Rng rng(6);
  SaltelliPlan plan = saltelli_matrices(spec, 8000, rng);
  SobolResult r = sobol_indices(
      spec, plan,
      [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x[0]); },
      1);
  CHECK(r.first_order[0][0] == Catch::Approx(1.0).margin(0.05));
  CHECK(r.first_order[1][0] == Catch::Approx(0.0).margin(0.05));
  CHECK(r.total[1][0] == Catch::Approx(0.0).margin(0.05));
}

TEST_CASE("ishigami indices match the closed-form values") {
  const double pi = std::numbers::pi;
  InputSpec spec;
  for (int i = 0; i < 3; ++i)
    spec.factors.push_back(
        {"x" + std::to_string(i + 1), {Marginal::uniform(-pi, pi)}});
  Rng rng(11);
  SaltelliPlan plan = saltelli_matrices(spec, 20000, rng);
  SobolResult r = sobol_indices(
      spec, plan,
      [](const Eigen::VectorXd& x) {
        const double y = std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) +
                         0.1 * std::pow(x[2], 4) * std::sin(x[0]);
        return Eigen::VectorXd::Constant(1, y);
      },
      1);
  CHECK(r.first_order[0][0] == Catch::Approx(0.31390519114781145).margin(0.05));
  CHECK(r.first_order[1][0] == Catch::Approx(0.44241114479004081).margin(0.05));
  CHECK(r.first_order[2][0] == Catch::Approx(0.0).margin(0.05));
  CHECK(r.total[0][0] == Catch::Approx(0.55758885520995919).margin(0.05));
  CHECK(r.total[2][0] == Catch::Approx(0.24368366406214773).margin(0.05));
  // total >= first order for every factor (within noise)
  for (int i = 0; i < 3; ++i)
    CHECK(r.total_raw[i][0] >= r.first_order_raw[i][0] - 0.05);
}

TEST_CASE("sobol estimation is deterministic in the generator seed") {
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"x2", {Marginal::uniform(0, 1)}});
  auto f = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x[0] * x[1]);
  };
  Rng r1(9), r2(9);
  SobolResult a = sobol_indices(spec, saltelli_matrices(spec, 500, r1), f, 1);
  SobolResult b = sobol_indices(spec, saltelli_matrices(spec, 500, r2), f, 1);
  CHECK(a.first_order_raw[0][0] == b.first_order_raw[0][0]);
  CHECK(a.total_raw[1][0] == b.total_raw[1][0]);
}

TEST_CASE("constant outputs are flagged degenerate with NaN indices") {
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  Rng rng(4);
  SaltelliPlan plan = saltelli_matrices(spec, 100, rng);
  SobolResult r = sobol_indices(
      spec, plan,
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 3.0); },
      1);
  CHECK(r.degenerate[0]);
  CHECK(std::isnan(r.first_order_raw[0][0]));
}

TEST_CASE("non-finite model outputs are rejected") {
  InputSpec spec;
  spec.factors.push_back({"x1", {Marginal::uniform(0, 1)}});
  Rng rng(4);
  SaltelliPlan plan = saltelli_matrices(spec, 50, rng);
  CHECK_THROWS_AS(
      sobol_indices(
          spec, plan,
          [](const Eigen::VectorXd&) {
            return Eigen::VectorXd::Constant(1, std::nan(""));
          },
          1),
      DomainError);
}

TEST_CASE("group aggregation checks the partition and normalizes shares") {
  InputSpec spec;
  spec.factors.push_back({"a", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"b", {Marginal::uniform(0, 1)}});
  spec.factors.push_back({"c", {Marginal::uniform(0, 1)}});
  Rng rng(13);
  SaltelliPlan plan = saltelli_matrices(spec, 4000, rng);
  SobolResult r = sobol_indices(
      spec, plan,
      [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, x[0] + x[1] + 2.0 * x[2]);
      },
      1);
  GroupShares g = aggregated_indices(r, 0, {{"ab", {"a", "b"}}, {"c", {"c"}}});
  REQUIRE(g.labels.size() == 2);
  CHECK(g.normalized[0] + g.normalized[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(g.normalized[0] == Catch::Approx(1.0 / 3.0).margin(0.06));
  CHECK_THROWS_AS(aggregated_indices(r, 0, {{"ab", {"a", "b"}}}), ConfigError);
  CHECK_THROWS_AS(
      aggregated_indices(r, 0, {{"ab", {"a", "b"}}, {"cc", {"c", "c"}}}),
      ConfigError);
  CHECK_THROWS_AS(
      aggregated_indices(r, 0, {{"ab", {"a", "b"}}, {"cz", {"c", "z"}}}),
      ConfigError);
}
