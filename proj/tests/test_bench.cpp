#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gpc/bench.hpp"
#include "gpc/uq.hpp"

using namespace gpc;

TEST_CASE("analytic code responses match frozen spot values") {
  CHECK(bench_g1(0.0) == Catch::Approx(0.12000000000000853).margin(1e-12));
  CHECK(bench_g1(0.25) == Catch::Approx(0.23062526441862907).margin(1e-12));
  CHECK(bench_g1(0.5) == Catch::Approx(0.22203589766447063).margin(1e-12));
  CHECK(bench_g1(0.75) == Catch::Approx(0.24366039882125289).margin(1e-12));
  CHECK(bench_g1(1.0) == Catch::Approx(0.30022582904713063).margin(1e-12));
  CHECK(bench_g2(0.0) == Catch::Approx(0.55009952806481047).margin(1e-12));
  CHECK(bench_g2(0.25) == Catch::Approx(0.49999036178963534).margin(1e-12));
  CHECK(bench_g2(0.5) == Catch::Approx(0.48992110310803547).margin(1e-12));
  CHECK(bench_g2(0.75) == Catch::Approx(0.44477894560603384).margin(1e-12));
  CHECK(bench_g2(1.0) == Catch::Approx(0.38999593655102281).margin(1e-12));
  CHECK(eval_g(1, 0.5) == bench_g1(0.5));
  CHECK(eval_g(2, 0.5) == bench_g2(0.5));
  CHECK_THROWS_AS(eval_g(3, 0.5), ConfigError);
}

TEST_CASE("benchmark surrogates interpolate their training designs") {
  for (int n : {20, 200}) {
    auto sys = build_benchmark_problem(n, 48, SurrogateMode::GpMean);
    double worst = 0.0;
    for (const auto& p : sys.doe.points) {
      worst = std::max(worst, std::abs(sys.gp1->mean1(p[0]) - bench_g1(p[0])));
      worst = std::max(worst, std::abs(sys.gp2->mean1(p[0]) - bench_g2(p[0])));
    }
    CHECK(worst < 1e-6);
  }
  CHECK_THROWS_AS(build_benchmark_problem(2, 1, SurrogateMode::Exact), ConfigError);
}

TEST_CASE("gp-mean coupled solution approaches the exact fixed point with n") {
  auto exact = build_benchmark_problem(20, 48, SurrogateMode::Exact);
  const double y_star = fixed_point(exact.problem).u_star[0];
  auto small = build_benchmark_problem(20, 48, SurrogateMode::GpMean);
  auto large = build_benchmark_problem(200, 48, SurrogateMode::GpMean);
  const double e_small = std::abs(fixed_point(small.problem).u_star[0] - y_star);
  const double e_large = std::abs(fixed_point(large.problem).u_star[0] - y_star);
  CHECK(e_large <= e_small + 1e-12);
  CHECK(e_large < 1e-6);
}

TEST_CASE("modal basis is orthonormal and sign-aligned") {
  ModalBasis b = ModalBasis::standard(10, 3);
  b.validate();
  Eigen::MatrixXd G = b.modes.transpose() * b.modes;
  CHECK((G - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  // first column follows the single half-wave (all positive)
  CHECK(b.modes.col(0).minCoeff() > 0.0);
  CHECK_THROWS_AS(ModalBasis::standard(2, 3), ConfigError);
}

TEST_CASE("modal projection is the left inverse on basis range") {
  ModalBasis b = ModalBasis::standard(10, 3);
  Eigen::VectorXd c(3);
  c << 0.5, -0.2, 0.1;
  Eigen::VectorXd back = project_modal(b, b.modes * c);
  CHECK((back - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(project_modal(b, Eigen::VectorXd::Zero(7)), ConfigError);
}

TEST_CASE("white measurement noise passes through with unchanged variance") {
  ModalBasis b = ModalBasis::standard(10, 3, 0.3);
  Rng rng(41);
  const int N = 100000;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(3), s2 = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd noise(10);
    for (int k = 0; k < 10; ++k) noise[k] = 0.3 * rng.gaussian();
    Eigen::VectorXd c = project_modal(b, noise);
    s1 += c;
    s2 += c.cwiseProduct(c);
  }
  for (int j = 0; j < 3; ++j) {
    const double m = s1[j] / N;
    const double var = (s2[j] - N * m * m) / (N - 1.0);
    CHECK(var == Catch::Approx(0.09).epsilon(0.03));
  }
}

TEST_CASE("deformation variance field transports coefficient covariance") {
  ModalBasis b = ModalBasis::standard(10, 3);
  // isotropic coefficient noise: field variance is sigma^2 * row norms = sigma^2
  Eigen::VectorXd f =
      deformation_variance_field(0.04 * Eigen::MatrixXd::Identity(3, 3), b);
  // rows of an orthonormal-column matrix have squared norms summing to 3,
  // each entry equals 0.04 * ||row||^2
  for (int i = 0; i < 10; ++i)
    CHECK(f[i] == Catch::Approx(0.04 * b.modes.row(i).squaredNorm()).margin(1e-14));
  CHECK(deformation_variance_field(Eigen::MatrixXd::Zero(3, 3), b)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  Eigen::MatrixXd bad(3, 3);
  bad.setZero();
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(deformation_variance_field(bad, b), DomainError);
}

TEST_CASE("parabolic profile satisfies its three defining constraints") {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const double L = 0.5 + rng.uniform();
    const double vm = rng.uniform(1.0, 10.0);
    const double dev = rng.uniform(-0.5, 0.5);
    const double off = rng.uniform(-0.3, 0.3);
    Parabola p = parabola_from_inputs(vm, dev, off, L);
    const double xv = 0.5 * L + off;
    // average over [0, L]
    const double avg = p.a * L * L / 3.0 + p.b * L / 2.0 + p.c;
    CHECK(avg == Catch::Approx(vm).margin(1e-9));
    if (dev != 0.0) {
      // extremum location and value
      CHECK(2.0 * p.a * xv + p.b == Catch::Approx(0.0).margin(1e-9));
      CHECK(p(xv) - vm == Catch::Approx(dev).margin(1e-9));
    }
  }
  Parabola flat = parabola_from_inputs(3.0, 0.0, 0.2, 1.0);
  CHECK(flat.a == 0.0);
  CHECK(flat(0.3) == 3.0);
  CHECK_THROWS_AS(parabola_from_inputs(3.0, 0.1, 0.0, 0.0), ConfigError);
}

TEST_CASE("velocity propagation with deterministic inputs has zero spread") {
  VelocityField f = propagate_velocity_uncertainty(
      Marginal::fixed(5.0), Marginal::fixed(0.0), Marginal::fixed(0.0), 1.0,
      {0.0, 0.5, 1.0}, 100, 1);
  for (double v : f.variance) CHECK(v == Catch::Approx(0.0).margin(1e-20));
  for (double m : f.mean) CHECK(m == Catch::Approx(5.0));
}

TEST_CASE("velocity propagation converges with the sample count") {
  Marginal vm = Marginal::normal(5.0, 0.05);
  Marginal dev = Marginal::normal(0.05, 0.005);
  Marginal off = Marginal::normal(0.0, 0.2);
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  VelocityField a = propagate_velocity_uncertainty(vm, dev, off, 1.0, grid, 2000, 3);
  VelocityField b = propagate_velocity_uncertainty(vm, dev, off, 1.0, grid, 40000, 4);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double se = std::sqrt(b.variance[g] / 2000.0);
    CHECK(std::abs(a.mean[g] - b.mean[g]) < 5.0 * se + 1e-6);
    CHECK(b.hi95[g] > b.lo95[g]);
  }
  CHECK_THROWS_AS(
      propagate_velocity_uncertainty(vm, dev, off, 1.0, grid, 1, 1),
      InsufficientDataError);
}

TEST_CASE("synthetic analog converges and its surrogates track the exact cycle") {
  AnalogConfig cfg;
  cfg.steps = 2;
  cfg.doe_hydraulic = 150;
  cfg.doe_mechanical = 150;
  AnalogSystem sys = build_synthetic_analog(cfg);
  CycleResult exact = multi_step_cycle(sys.exact_steps, sys.initial_state);
  CycleResult surr = multi_step_cycle(sys.surrogate_steps, sys.initial_state);
  REQUIRE(exact.step_fixed_points.size() == 2);
  for (int t = 0; t < 2; ++t) {
    const double err =
        (exact.step_fixed_points[t] - surr.step_fixed_points[t]).norm();
    // the mechanical surrogate spans a 10-dimensional force box with only
    // 150 training points, so the gap is dominated by its fill distance
    CHECK(err < 0.2);
  }
  // interface iteration is a contraction near the operating state
  std::vector<Eigen::VectorXd> grid;
  for (double s : {-0.3, 0.0, 0.3})
    grid.push_back(Eigen::VectorXd::Constant(cfg.num_modes, s));
  CHECK(estimate_contraction(sys.exact_steps[0], grid) < 1.0);
}

TEST_CASE("analog parameter layout matches its input specification") {
  AnalogConfig cfg;
  InputSpec spec = analog_input_spec(cfg);
  CHECK(spec.total_dim() == 3 * cfg.num_modes + 5 + 5);
  CHECK(spec.num_factors() == 9);
  Eigen::VectorXd th = analog_nominal_theta(cfg);
  CHECK(th.size() == spec.total_dim());
  // uniform factors sit at their midpoint in the nominal vector
  CHECK(th[3 * cfg.num_modes + 5] == Catch::Approx(0.02));     // h_l
  CHECK(th[3 * cfg.num_modes + 6] == Catch::Approx(0.0175));   // msi
  CHECK(th[3 * cfg.num_modes + 0] == Catch::Approx(5.0));      // mean velocity
}

TEST_CASE("analog coupled response depends smoothly on the parameters") {
  AnalogConfig cfg;
  cfg.doe_hydraulic = 10;
  cfg.doe_mechanical = 10;
  AnalogSystem sys = build_synthetic_analog(cfg);
  Eigen::VectorXd th = sys.nominal_theta;
  Eigen::VectorXd y0 = analog_coupled_response(sys, th);
  REQUIRE(y0.size() == cfg.num_modes);
  th[0] += 0.05;  // bump one modal input
  Eigen::VectorXd y1 = analog_coupled_response(sys, th);
  CHECK((y1 - y0).norm() > 0.0);
  CHECK((y1 - y0).norm() < 0.5);
}

TEST_CASE("velocity CSV has a row per grid node") {
  VelocityField f = propagate_velocity_uncertainty(
      Marginal::normal(5.0, 0.05), Marginal::normal(0.05, 0.005),
      Marginal::normal(0.0, 0.2), 1.0, {0.0, 0.5, 1.0}, 100, 2);
  std::ostringstream os;
  write_velocity_csv(f, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
