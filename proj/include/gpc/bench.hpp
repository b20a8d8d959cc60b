#ifndef GPC_BENCH_HPP
#define GPC_BENCH_HPP

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "gpc/coupling.hpp"
#include "gpc/design.hpp"
#include "gpc/errors.hpp"
#include "gpc/gp.hpp"
#include "gpc/kernels.hpp"
#include "gpc/rng.hpp"
#include "gpc/sensitivity.hpp"
#include "gpc/uq.hpp"

namespace gpc {

// ---------------------------------------------------------------------------
// Analytical two-code benchmark on [0,1].
// ---------------------------------------------------------------------------

inline double bench_g1(double x) {
  const double pi = std::numbers::pi;
  return 0.12 + 0.18 * x + 0.06 * std::sin(2.0 * pi * x) +
         0.05 * std::exp(-60.0 * (x - 0.70) * (x - 0.70)) +
         0.03 * x * (1.0 - x);
}

inline double bench_g2(double x) {
  const double pi = std::numbers::pi;
  return 0.58 - 0.22 * x + 0.03 * std::tanh(8.0 * (x - 0.40)) +
         0.015 * std::sin(4.0 * pi * x);
}

inline double eval_g(int which, double x) {
  if (which == 1) return bench_g1(x);
  if (which == 2) return bench_g2(x);
  throw ConfigError("eval_g: which must be 1 or 2");
}

enum class SurrogateMode { Exact, GpMean };

// Two-solver coupled benchmark: solver 0 evaluates both codes at the current
// interface value, solver 1 averages them. In GP mode solver 0 is replaced
// by the posterior means of two scalar surrogates trained on a shared LHS
// design (noise-free observations).
struct BenchmarkSystem {
  CouplingProblem problem;
  std::shared_ptr<GpModel> gp1, gp2;
  std::vector<SurrogateUnit> units;
  Design doe;
};

inline BenchmarkSystem build_benchmark_problem(int doe_size, std::uint64_t seed,
                                               SurrogateMode mode,
                                               double lengthscale = 0.25,
                                               double variance = 1.0,
                                               double nugget = 1e-12) {
  if (doe_size < 3) throw ConfigError("benchmark DOE needs at least 3 points");
  BenchmarkSystem sys;
  Rng rng(derive_seed(seed, "bench-doe", 0));
  sys.doe = lhs1d(doe_size, 0.0, 1.0, rng);
  std::vector<double> xs, z1, z2;
  for (const auto& p : sys.doe.points) {
    xs.push_back(p[0]);
    z1.push_back(bench_g1(p[0]));
    z2.push_back(bench_g2(p[0]));
  }
  const ScalarKernel kern = ScalarKernel::matern52(lengthscale, variance);
  sys.gp1 = std::make_shared<GpModel>(fit_scalar(kern, xs, z1, nugget));
  sys.gp2 = std::make_shared<GpModel>(fit_scalar(kern, xs, z2, nugget));

  SolverBox codes;
  codes.input_dim = 1;
  codes.output_dim = 2;
  if (mode == SurrogateMode::Exact) {
    codes.kind = SolverKind::ExactCode;
    codes.eval = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
      Eigen::VectorXd y(2);
      y << bench_g1(x[0]), bench_g2(x[0]);
      return y;
    };
  } else {
    codes.kind = SolverKind::GpMean;
    auto m1 = sys.gp1, m2 = sys.gp2;
    codes.eval = [m1, m2](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
      Eigen::VectorXd y(2);
      y << m1->mean1(x[0]), m2->mean1(x[0]);
      return y;
    };
  }
  SolverBox average;
  average.input_dim = 2;
  average.output_dim = 1;
  average.kind = SolverKind::ExactCode;
  average.eval = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    Eigen::VectorXd y(1);
    y << 0.5 * (z[0] + z[1]);
    return y;
  };

  sys.problem.solvers = {codes, average};
  sys.problem.transfers = {identity_transfer(), identity_transfer(),
                           identity_transfer()};
  sys.problem.interface_dim = 1;
  sys.problem.u0 = Eigen::VectorXd::Constant(1, 0.5);
  sys.problem.tolerance = 1e-8;
  // The deterministic solve needs ~8 iterations. The cap matters only for
  // trajectory-sampled replications: slowly-contracting realizations still
  // converge within it, while genuinely non-contracting draws (pinned
  // oscillations) are flagged without unbounded conditioning cost.
  sys.problem.max_iter = 400;

  sys.units.push_back({0, 0, sys.gp1.get(), "code1"});
  sys.units.push_back({0, 1, sys.gp2.get(), "code2"});
  return sys;
}

// ---------------------------------------------------------------------------
// Modal measurement utilities.
// ---------------------------------------------------------------------------

// Orthonormal deformation mode shapes on a column of axial nodes (first
// bending, S-shape, W-shape), built from discretized sine half-waves and
// orthonormalized.
struct ModalBasis {
  Eigen::MatrixXd modes;      // nodes x n_modes, orthonormal columns
  double noise_sigma = 0.3;   // measurement noise std dev, mm

  static ModalBasis standard(int nodes = 10, int n_modes = 3,
                             double noise_sigma = 0.3) {
    if (nodes < n_modes) throw ConfigError("modal basis needs nodes >= modes");
    Eigen::MatrixXd raw(nodes, n_modes);
    const double pi = std::numbers::pi;
    for (int i = 0; i < nodes; ++i) {
      const double z = (i + 1.0) / (nodes + 1.0);
      for (int j = 0; j < n_modes; ++j) raw(i, j) = std::sin((j + 1) * pi * z);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(nodes, n_modes);
    // sign-fix so each column points along its generating shape
    for (int j = 0; j < n_modes; ++j)
      if (Q.col(j).dot(raw.col(j)) < 0.0) Q.col(j) = -Q.col(j);
    ModalBasis b;
    b.modes = Q;
    b.noise_sigma = noise_sigma;
    return b;
  }

  void validate() const {
    const int k = static_cast<int>(modes.cols());
    Eigen::MatrixXd g = modes.transpose() * modes;
    if ((g - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
      throw ConfigError("modal basis columns are not orthonormal");
  }

  int nodes() const { return static_cast<int>(modes.rows()); }
  int n_modes() const { return static_cast<int>(modes.cols()); }
};

// Least-squares modal coefficients of a measured deflection profile. With
// orthonormal modes this is the plain projection, and i.i.d. measurement
// noise of variance s^2 induces coefficient noise of the same variance.
inline Eigen::VectorXd project_modal(const ModalBasis& basis,
                                     const Eigen::VectorXd& measured) {
  basis.validate();
  if (measured.size() != basis.nodes())
    throw ConfigError("measured profile length does not match basis nodes");
  return basis.modes.transpose() * measured;
}

// Pointwise deformation variance induced by coefficient covariance:
// Var(Y(z_i)) = sum_{jk} M_ij M_ik Cov(C_j, C_k).
inline Eigen::VectorXd deformation_variance_field(const Eigen::MatrixXd& cov_c,
                                                  const ModalBasis& basis) {
  const int k = basis.n_modes();
  if (cov_c.rows() != k || cov_c.cols() != k)
    throw ConfigError("coefficient covariance size mismatch");
  if ((cov_c - cov_c.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("coefficient covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_c);
  if (es.eigenvalues().minCoeff() <
      -1e-10 * std::max(1.0, std::abs(cov_c.trace())))
    throw DomainError("coefficient covariance not positive semidefinite");
  return (basis.modes * cov_c * basis.modes.transpose()).diagonal();
}

// ---------------------------------------------------------------------------
// Parabolic axial-velocity profile from three scalar inputs.
// ---------------------------------------------------------------------------

struct Parabola {
  double a = 0.0, b = 0.0, c = 0.0;
  double operator()(double x) const { return (a * x + b) * x + c; }
};

// Unique parabola v(x) = ax^2 + bx + c on [0, L] with:
//   (i)  spatial average over [0, L] equal to v_mean,
//   (ii) extremum at x_v = L/2 + lateral_offset,
//   (iii) v(x_v) - v_mean = max_deviation.
// max_deviation = 0 degenerates to the constant profile v = v_mean.
inline Parabola parabola_from_inputs(double v_mean, double max_deviation,
                                     double lateral_offset, double length) {
  if (!(length > 0.0)) throw ConfigError("parabola domain length must be positive");
  Parabola p;
  if (max_deviation == 0.0) {
    p.c = v_mean;
    return p;
  }
  const double xv = 0.5 * length + lateral_offset;
  const double denom = xv * length - xv * xv - length * length / 3.0;
  // denom = -( (xv - L/2)^2 + L^2/12 ) <= -L^2/12 < 0, never singular
  p.a = max_deviation / denom;
  p.b = -2.0 * p.a * xv;
  p.c = v_mean - p.a * length * length / 3.0 - p.b * length / 2.0;
  return p;
}

struct VelocityField {
  std::vector<double> z;
  std::vector<double> mean, variance, lo95, hi95;
};

// Monte Carlo propagation of the three uncertain profile inputs onto a grid:
// per node, sample mean, unbiased variance and Gaussian 95% band.
inline VelocityField propagate_velocity_uncertainty(
    const Marginal& v_mean, const Marginal& max_deviation,
    const Marginal& lateral_offset, double length,
    const std::vector<double>& grid, int n_samples, std::uint64_t seed) {
  if (n_samples < 2)
    throw InsufficientDataError("velocity propagation needs N >= 2");
  if (grid.empty()) throw ConfigError("velocity propagation needs a grid");
  Rng rng(derive_seed(seed, "velocity", 0));
  const int G = static_cast<int>(grid.size());
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(G), s2 = Eigen::VectorXd::Zero(G);
  for (int j = 0; j < n_samples; ++j) {
    const Parabola p = parabola_from_inputs(
        v_mean.transform(rng.uniform()), max_deviation.transform(rng.uniform()),
        lateral_offset.transform(rng.uniform()), length);
    for (int g = 0; g < G; ++g) {
      const double v = p(grid[g]);
      s1[g] += v;
      s2[g] += v * v;
    }
  }
  VelocityField out;
  out.z = grid;
  for (int g = 0; g < G; ++g) {
    const double m = s1[g] / n_samples;
    const double var =
        std::max(0.0, (s2[g] - n_samples * m * m) / (n_samples - 1.0));
    out.mean.push_back(m);
    out.variance.push_back(var);
    out.lo95.push_back(m - 1.96 * std::sqrt(var));
    out.hi95.push_back(m + 1.96 * std::sqrt(var));
  }
  return out;
}

inline void write_velocity_csv(const VelocityField& f, std::ostream& os) {
  os << "z,mean,variance,lo95,hi95\n";
  os.precision(17);
  for (std::size_t i = 0; i < f.z.size(); ++i)
    os << f.z[i] << "," << f.mean[i] << "," << f.variance[i] << ","
       << f.lo95[i] << "," << f.hi95[i] << "\n";
}

// ---------------------------------------------------------------------------
// Synthetic multi-output coupled analog.
//
// A stand-in for a proprietary hydraulic/mechanical code pair: solver 0 maps
// the modal deformation state and the uncertain parameter vector to per-grid
// lateral forces; solver 1 maps forces back to modal coefficients through a
// globally contracting smooth response. All constants are synthetic and
// flagged as placeholders in reports.
// ---------------------------------------------------------------------------

struct AnalogConfig {
  int num_grids = 10;   // force outputs of the hydraulic solver
  int num_modes = 3;    // modal coefficients exchanged at the interface
  int steps = 5;        // sequential operating-cycle steps
  int doe_hydraulic = 200;
  int doe_mechanical = 200;
  double lengthscale_hydraulic = 1.0;
  double lengthscale_mechanical = 3.0;
  double nugget = 1e-10;
  std::uint64_t seed = 1;
  // placeholder spreads for the cycle-dependent modal-coefficient inputs
  double sigma_modes = 0.1;
  double sigma_clamping = 0.1;

  void validate() const {
    if (num_grids < num_modes) throw ConfigError("analog needs grids >= modes");
    if (num_modes < 1) throw ConfigError("analog needs at least one mode");
    if (steps < 1) throw ConfigError("analog needs at least one step");
    if (doe_hydraulic < 3 || doe_mechanical < 3)
      throw ConfigError("analog DOE sizes must be at least 3");
  }
};

// Parameter vector layout (dimension 3*num_modes + 5 + 5; 9 Saltelli factors):
// [C (modes), S (modes), W (modes), BC (5: mean velocity, inlet/outlet
//  deviation and offset), h_l, MSI, grid clamping, creep factor, growth
//  factor].
struct AnalogSystem {
  AnalogConfig config;
  ModalBasis basis;
  Eigen::VectorXd nominal_theta;
  InputSpec inputs;
  std::vector<CouplingProblem> exact_steps;      // exact-code cycle
  std::vector<CouplingProblem> surrogate_steps;  // gp-mean cycle
  std::vector<std::shared_ptr<GpModel>> models;  // grids + modes scalar GPs
  std::vector<SurrogateUnit> units;
  Eigen::VectorXd initial_state;
  std::vector<Bounds> hydraulic_box, mechanical_box;  // GP training domains
};

namespace detail {

inline constexpr double analog_pi = 3.14159265358979323846;

inline Eigen::VectorXd analog_forces(const AnalogSystem& sys,
                                     const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& th) {
  const int G = sys.config.num_grids;
  const int K = sys.config.num_modes;
  const double pi = std::numbers::pi;
  Eigen::VectorXd gain(K);
  for (int j = 0; j < K; ++j)
    gain[j] = 1.0 + th[j] + 0.5 * th[K + j] + 0.25 * th[2 * K + j];
  Eigen::VectorXd ut = u.array().tanh().matrix().cwiseProduct(gain);
  Eigen::VectorXd f = sys.basis.modes * ut;
  const int bc = 3 * K;
  const double h_l = th[bc + 5], msi = th[bc + 6];
  for (int g = 0; g < G; ++g) {
    const double z = (g + 1.0) / (G + 1.0);
    f[g] += 0.1 * th[bc + 0] * z * (1.0 - z)          // mean axial velocity
            + th[bc + 1] * std::sin(pi * z)           // inlet deviation
            + 0.1 * th[bc + 2] * std::cos(pi * z)     // inlet offset
            + th[bc + 3] * std::sin(2.0 * pi * z)     // outlet deviation
            + 0.1 * th[bc + 4] * std::cos(2.0 * pi * z)  // outlet offset
            + 20.0 * h_l * z * (1.0 - z) + 4.0 * msi * std::cos(pi * z);
  }
  return f;
}

inline Eigen::VectorXd analog_modal_response(const AnalogSystem& sys,
                                             const Eigen::VectorXd& f,
                                             const Eigen::VectorXd& th,
                                             int step) {
  const int K = sys.config.num_modes;
  const int bc = 3 * K;
  const double clamp = th[bc + 7], creep = th[bc + 8], growth = th[bc + 9];
  Eigen::VectorXd raw = sys.basis.modes.transpose() * f;
  Eigen::VectorXd u(K);
  for (int j = 0; j < K; ++j) {
    const double shape = 1.0 / (1.0 + j);  // higher modes respond less
    u[j] = creep * 0.4 * std::tanh(0.5 * raw[j]) +
           0.05 * growth * shape * (1.0 + 0.2 * step) +
           0.02 * clamp * std::cos(analog_pi * (j + 0.25));
  }
  return u;
}

}  // namespace detail

inline InputSpec analog_input_spec(const AnalogConfig& cfg) {
  InputSpec spec;
  auto vec_factor = [&](const std::string& name, double sigma) {
    Factor f;
    f.name = name;
    for (int j = 0; j < cfg.num_modes; ++j)
      f.components.push_back(Marginal::normal(0.0, sigma));
    return f;
  };
  spec.factors.push_back(vec_factor("C_modes", cfg.sigma_modes));
  spec.factors.push_back(vec_factor("S_modes", cfg.sigma_modes));
  spec.factors.push_back(vec_factor("W_modes", cfg.sigma_modes));
  Factor bc;
  bc.name = "boundary_conditions";
  bc.components = {Marginal::normal(5.0, 0.05), Marginal::normal(0.05, 0.005),
                   Marginal::normal(0.0, 0.2), Marginal::normal(0.04, 0.004),
                   Marginal::normal(0.0, 0.1)};
  spec.factors.push_back(bc);
  spec.factors.push_back({"h_l", {Marginal::uniform(0.01, 0.03)}});
  spec.factors.push_back({"msi", {Marginal::uniform(0.01, 0.025)}});
  spec.factors.push_back(
      {"grid_clamping", {Marginal::normal(1.0, cfg.sigma_clamping)}});
  spec.factors.push_back({"creep_factor", {Marginal::normal(1.0, 0.3)}});
  spec.factors.push_back({"growth_factor", {Marginal::normal(1.0, 0.3)}});
  return spec;
}

inline Eigen::VectorXd analog_nominal_theta(const AnalogConfig& cfg) {
  const InputSpec spec = analog_input_spec(cfg);
  Eigen::VectorXd th(spec.total_dim());
  int col = 0;
  for (const auto& f : spec.factors)
    for (const auto& m : f.components)
      th[col++] = m.kind == Marginal::Kind::Uniform ? 0.5 * (m.p1 + m.p2) : m.p1;
  return th;
}

inline AnalogSystem build_synthetic_analog(
    const AnalogConfig& cfg, const std::vector<Eigen::VectorXd>* hyd_design = nullptr,
    const std::vector<Eigen::VectorXd>* mech_design = nullptr) {
  cfg.validate();
  auto sys = std::make_shared<AnalogSystem>();
  sys->config = cfg;
  sys->basis = ModalBasis::standard(cfg.num_grids, cfg.num_modes);
  sys->inputs = analog_input_spec(cfg);
  sys->nominal_theta = analog_nominal_theta(cfg);
  sys->initial_state = Eigen::VectorXd::Zero(cfg.num_modes);
  sys->hydraulic_box.assign(cfg.num_modes, {-0.8, 0.8});
  sys->mechanical_box.assign(cfg.num_grids, {-2.0, 2.0});

  const int G = cfg.num_grids, K = cfg.num_modes;

  // exact solver boxes (theta passed through the problem)
  SolverBox hydraulic;
  hydraulic.input_dim = K;
  hydraulic.output_dim = G;
  hydraulic.kind = SolverKind::ExactCode;
  hydraulic.eval = [sys](const Eigen::VectorXd& u, const Eigen::VectorXd& th) {
    return detail::analog_forces(*sys, u, th);
  };

  auto make_mechanical = [sys, K, G](int step) {
    SolverBox mech;
    mech.input_dim = G;
    mech.output_dim = K;
    mech.kind = SolverKind::ExactCode;
    mech.eval = [sys, step](const Eigen::VectorXd& f, const Eigen::VectorXd& th) {
      return detail::analog_modal_response(*sys, f, th, step);
    };
    return mech;
  };

  auto make_problem = [&](const SolverBox& s1, const SolverBox& s2) {
    CouplingProblem p;
    p.solvers = {s1, s2};
    p.transfers = {identity_transfer(), identity_transfer(), identity_transfer()};
    p.interface_dim = K;
    p.u0 = sys->initial_state;
    p.tolerance = 1e-8;
    p.max_iter = 500;
    p.theta = sys->nominal_theta;
    return p;
  };

  for (int t = 0; t < cfg.steps; ++t)
    sys->exact_steps.push_back(make_problem(hydraulic, make_mechanical(t)));

  // GP surrogates: one scalar model per output coordinate, trained on LHS
  // designs (or caller-provided point sets) at the nominal parameter vector.
  Rng rng(derive_seed(cfg.seed, "analog-doe", 0));
  std::vector<Eigen::VectorXd> Xh, Xm;
  if (hyd_design) {
    Xh = *hyd_design;
  } else {
    Xh = lhs(cfg.doe_hydraulic, sys->hydraulic_box, rng).points;
  }
  if (mech_design) {
    Xm = *mech_design;
  } else {
    Xm = lhs(cfg.doe_mechanical, sys->mechanical_box, rng).points;
  }
  const ScalarKernel kh = ScalarKernel::matern52(cfg.lengthscale_hydraulic, 1.0);
  const ScalarKernel km = ScalarKernel::matern52(cfg.lengthscale_mechanical, 1.0);

  std::vector<std::shared_ptr<GpModel>> hyd_models(G), mech_models(K);
  {
    Eigen::MatrixXd Yh(Xh.size(), G);
    for (std::size_t i = 0; i < Xh.size(); ++i)
      Yh.row(i) =
          detail::analog_forces(*sys, Xh[i], sys->nominal_theta).transpose();
    for (int g = 0; g < G; ++g)
      hyd_models[g] = std::make_shared<GpModel>(fit(
          LmcKernel::single_output(kh), Xh, Yh.col(g), cfg.nugget));
    Eigen::MatrixXd Ym(Xm.size(), K);
    for (std::size_t i = 0; i < Xm.size(); ++i)
      Ym.row(i) = detail::analog_modal_response(*sys, Xm[i],
                                                sys->nominal_theta, 0)
                      .transpose();
    for (int j = 0; j < K; ++j)
      mech_models[j] = std::make_shared<GpModel>(fit(
          LmcKernel::single_output(km), Xm, Ym.col(j), cfg.nugget));
  }
  for (int g = 0; g < G; ++g) sys->models.push_back(hyd_models[g]);
  for (int j = 0; j < K; ++j) sys->models.push_back(mech_models[j]);

  SolverBox gp_hydraulic = hydraulic;
  gp_hydraulic.kind = SolverKind::GpMean;
  gp_hydraulic.eval = [hyd_models, G](const Eigen::VectorXd& u,
                                      const Eigen::VectorXd&) {
    Eigen::VectorXd f(G);
    for (int g = 0; g < G; ++g) f[g] = hyd_models[g]->mean(u)[0];
    return f;
  };
  for (int t = 0; t < cfg.steps; ++t) {
    SolverBox mech;
    mech.input_dim = G;
    mech.output_dim = K;
    mech.kind = SolverKind::GpMean;
    // surrogates were trained at step 0; later steps add the same
    // deterministic growth drift the exact response carries
    mech.eval = [sys, mech_models, K, t](const Eigen::VectorXd& f,
                                         const Eigen::VectorXd& th) {
      const int bc = 3 * sys->config.num_modes;
      const double growth = th[bc + 9];
      Eigen::VectorXd u(K);
      for (int j = 0; j < K; ++j) {
        const double shape = 1.0 / (1.0 + j);
        u[j] = mech_models[j]->mean(f)[0] + 0.05 * growth * shape * 0.2 * t;
      }
      return u;
    };
    sys->surrogate_steps.push_back(make_problem(gp_hydraulic, mech));
  }

  for (int g = 0; g < G; ++g)
    sys->units.push_back({0, g, hyd_models[g].get(),
                          "force_grid_" + std::to_string(g)});
  for (int j = 0; j < K; ++j)
    sys->units.push_back({1, j, mech_models[j].get(),
                          "mode_" + std::to_string(j)});

  AnalogSystem out = *sys;
  // keep the shared state alive inside the solver closures
  return out;
}

// Coupled exact-code response as a function of the uncertain parameter
// vector (single step 0 solve); the Sobol model for the analog.
inline Eigen::VectorXd analog_coupled_response(const AnalogSystem& sys,
                                               const Eigen::VectorXd& theta) {
  CouplingProblem p = sys.exact_steps.front();
  p.theta = theta;
  FixedPointResult r = fixed_point(p);
  if (!r.converged)
    throw std::runtime_error("analog coupled solve did not converge");
  return r.u_star;
}

}  // namespace gpc

#endif
