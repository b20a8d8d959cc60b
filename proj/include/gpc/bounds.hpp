#ifndef GPC_BOUNDS_HPP
#define GPC_BOUNDS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gpc/design.hpp"
#include "gpc/errors.hpp"
#include "gpc/gp.hpp"
#include "gpc/kernels.hpp"
#include "gpc/uq.hpp"

namespace gpc {

// Per latent kernel: Sobolev smoothness s, bound constant C, validity
// threshold h0 (the fill-distance bound holds only for h <= h0).
struct LatentBoundParams {
  double smoothness = 3.0;
  double constant = 1.0;
  double h0 = 1.0;
};

struct SolverBoundInputs {
  int output_dim = 1;
  int input_dim = 1;
  std::vector<LatentBoundParams> latent;
  double coreg_lambda_max = 1.0;  // largest eigenvalue of sum_q B_q
  double fill_distance = 0.0;
  double lipschitz = 1.0;  // L_c
};

struct BoundInputs {
  std::vector<SolverBoundInputs> solvers;
  double contraction = 0.0;  // rho
  double post_map_lipschitz = 1.0;  // L_H
  double beta = 0.05;
  bool calibrated_constants = false;  // true if C was fit empirically

  void validate() const {
    if (solvers.empty()) throw ConfigError("bound inputs need solvers");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
    for (const auto& s : solvers) {
      if (s.latent.empty()) throw ConfigError("solver bound needs latent params");
      for (const auto& l : s.latent)
        if (!(l.smoothness > 0.5 * s.input_dim))
          throw ConfigError("smoothness must exceed input_dim / 2");
    }
  }
};

struct BoundReport {
  std::vector<double> sigma_sq;  // per solver
  std::vector<double> t_c;      // per solver
  double radius = 0.0;          // R
  double beta = 0.05;
  bool calibrated_constants = false;
};

// Scalar factor sum_q C_q h^{2 s_q - d} of the posterior-variance bound.
// Throws if h exceeds any latent kernel's validity threshold.
inline double lmc_variance_bound_factor(const SolverBoundInputs& s, double h) {
  if (!(h >= 0.0)) throw ConfigError("fill distance must be non-negative");
  double factor = 0.0;
  for (const auto& l : s.latent) {
    if (h > l.h0)
      throw DomainError("fill distance exceeds bound validity threshold h0");
    factor += l.constant * std::pow(h, 2.0 * l.smoothness - s.input_dim);
  }
  return factor;
}

// Matrix form: factor times the coregionalization sum.
inline Eigen::MatrixXd lmc_variance_bound_matrix(const SolverBoundInputs& s,
                                                 double h,
                                                 const Eigen::MatrixXd& coreg_sum) {
  return lmc_variance_bound_factor(s, h) * coreg_sum;
}

// High-probability per-solver offset radius:
// t_c = sqrt(2 D_c) * sigma_c * sqrt(log(2 C D_c / beta)),
// sigma_c^2 = lambda_max(sum B) * sum_q C_q h^{2 s_q - d}.
inline double compute_tc(const SolverBoundInputs& s, double h, double beta,
                         int num_solvers) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
  if (num_solvers < 1) throw ConfigError("need at least one solver");
  const double sigma_sq = s.coreg_lambda_max * lmc_variance_bound_factor(s, h);
  const double D = static_cast<double>(s.output_dim);
  return std::sqrt(2.0 * D) * std::sqrt(sigma_sq) *
         std::sqrt(std::log(2.0 * num_solvers * D / beta));
}

// Total deviation radius R = (L_H / (1 - rho)) * sum_c L_c t_c.
inline double deviation_radius(double post_map_lipschitz, double contraction,
                               const std::vector<double>& lipschitz,
                               const std::vector<double>& tc) {
  if (!(contraction < 1.0))
    throw DomainError("deviation radius needs contraction rho < 1");
  if (lipschitz.size() != tc.size())
    throw ConfigError("lipschitz / t_c size mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < tc.size(); ++c) s += lipschitz[c] * tc[c];
  return post_map_lipschitz / (1.0 - contraction) * s;
}

inline BoundReport evaluate_bounds(const BoundInputs& in) {
  in.validate();
  BoundReport r;
  r.beta = in.beta;
  r.calibrated_constants = in.calibrated_constants;
  std::vector<double> lips;
  for (const auto& s : in.solvers) {
    r.sigma_sq.push_back(s.coreg_lambda_max *
                         lmc_variance_bound_factor(s, s.fill_distance));
    r.t_c.push_back(compute_tc(s, s.fill_distance, in.beta,
                               static_cast<int>(in.solvers.size())));
    lips.push_back(s.lipschitz);
  }
  r.radius = deviation_radius(in.post_map_lipschitz, in.contraction, lips, r.t_c);
  return r;
}

// Empirical check of the deterministic offset-level stability inequality:
// per replication, ||y_j - y_meanpath|| <= (L_H/(1-rho)) sum_c L_c max_m
// ||delta_m^{(c,j)}||. Returns the fraction of converged replications
// satisfying it with the given slack.
struct CoverageResult {
  double coverage = 0.0;
  int checked = 0;
  int violations = 0;
  int excluded = 0;
};

inline CoverageResult empirical_coverage(
    const CouplingProblem& problem, const std::vector<SurrogateUnit>& units,
    double post_map_lipschitz, double contraction,
    const std::vector<double>& lipschitz, int n_replications,
    std::uint64_t master_seed, double slack = 1e-8,
    double radius_scale = 1.0, const McOptions& opt = {}) {
  if (!(contraction < 1.0))
    throw DomainError("coverage check needs contraction rho < 1");
  if (lipschitz.size() != units.size())
    throw ConfigError("one Lipschitz constant per surrogate unit required");
  McEnsemble e = run_method3(problem, units, n_replications, master_seed, opt);
  CoverageResult out;
  out.excluded = e.excluded;
  for (std::size_t j = 0; j < e.samples.size(); ++j) {
    double bound = 0.0;
    for (std::size_t k = 0; k < units.size(); ++k)
      bound += lipschitz[k] * e.unit_max_offset_norms[k][j];
    bound *= radius_scale * post_map_lipschitz / (1.0 - contraction);
    const double dev = (e.samples[j] - e.mean_path_output).norm();
    ++out.checked;
    if (dev > bound + slack) ++out.violations;
  }
  out.coverage = out.checked == 0
                     ? 0.0
                     : 1.0 - static_cast<double>(out.violations) / out.checked;
  return out;
}

// Empirical L_c for a concrete coupled problem: finite-difference sensitivity
// of one coupling-operator application to a unit offset added to unit k's
// output slice, maximized over probe interface states.
inline double estimate_unit_lipschitz(const CouplingProblem& p,
                                      const std::vector<SurrogateUnit>& units,
                                      int unit_index,
                                      const std::vector<Eigen::VectorXd>& probes,
                                      double step = 1e-6) {
  p.validate();
  if (probes.empty()) throw ConfigError("lipschitz estimate needs probe states");
  const auto& un = units[unit_index];
  const int D = un.width();
  double best = 0.0;
  for (const auto& u : probes) {
    for (int k = 0; k < D; ++k) {
      PathRecord r0, r1;
      r0.solver_inputs.resize(p.num_solvers());
      r1.solver_inputs.resize(p.num_solvers());
      Eigen::VectorXd base = detail::perturbed_sweep(
          p, units, u, 0, r0, [&](int, int, const Eigen::VectorXd&, auto) {});
      Eigen::VectorXd bumped = detail::perturbed_sweep(
          p, units, u, 0, r1,
          [&](int ki, int, const Eigen::VectorXd&, auto slice) {
            if (ki == unit_index) slice[k] += step;
          });
      best = std::max(best, (bumped - base).norm() / step);
    }
  }
  return best;
}

// Ladder experiment: sup-probe posterior variance vs fill distance.
struct SlopePoint {
  int n = 0;
  double h = 0.0;
  double sup_variance = 0.0;
};

struct SlopeResult {
  std::vector<SlopePoint> points;
  double slope = 0.0;  // least squares on log-log
};

// Least-squares slope of log(sup variance) against log(h) over a ladder of
// designs; 1D scalar models, probe grid of `probe_res` points.
inline SlopeResult variance_decay_slope(const ScalarKernel& kernel,
                                        const std::vector<Design>& ladder,
                                        double nugget = 1e-12,
                                        int probe_res = 513) {
  if (ladder.size() < 3)
    throw InsufficientDataError("variance decay slope needs >= 3 designs");
  SlopeResult out;
  for (const auto& dsg : ladder) {
    std::vector<double> xs, zs;
    for (const auto& p : dsg.points) {
      xs.push_back(p[0]);
      zs.push_back(0.0);  // posterior variance does not depend on observations
    }
    GpModel m = fit_scalar(kernel, xs, zs, nugget);
    double sup_var = 0.0;
    Eigen::VectorXd x(1);
    const auto& b = dsg.bounds[0];
    for (int i = 0; i < probe_res; ++i) {
      x[0] = b.lo + (b.hi - b.lo) * i / (probe_res - 1.0);
      sup_var = std::max(sup_var, m.var(x)(0, 0));
    }
    out.points.push_back({dsg.size(), fill_distance(dsg, probe_res), sup_var});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(out.points.size());
  for (const auto& p : out.points) {
    const double lx = std::log(p.h), ly = std::log(std::max(p.sup_variance, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

// Calibrate the bound constant C on the coarsest ladder point so that
// sup-variance = C * h^{2s-d} there, then report the max ratio
// sup-variance / bound over the finer points (<= 1 means consistent).
inline double calibrate_and_check_bound(const SlopeResult& r, double smoothness,
                                        int input_dim, double* constant_out = nullptr) {
  if (r.points.size() < 2)
    throw InsufficientDataError("bound calibration needs >= 2 ladder points");
  std::size_t coarse = 0;
  for (std::size_t i = 1; i < r.points.size(); ++i)
    if (r.points[i].h > r.points[coarse].h) coarse = i;
  const double expo = 2.0 * smoothness - input_dim;
  const double C = r.points[coarse].sup_variance / std::pow(r.points[coarse].h, expo);
  if (constant_out) *constant_out = C;
  double worst = 0.0;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    if (i == coarse) continue;
    worst = std::max(worst,
                     r.points[i].sup_variance / (C * std::pow(r.points[i].h, expo)));
  }
  return worst;
}

inline void write_slope_csv(const SlopeResult& r, std::ostream& os) {
  os << "n,h,sup_variance\n";
  os.precision(17);
  for (const auto& p : r.points)
    os << p.n << "," << p.h << "," << p.sup_variance << "\n";
}

}  // namespace gpc

#endif
