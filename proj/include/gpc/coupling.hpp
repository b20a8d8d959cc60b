#ifndef GPC_COUPLING_HPP
#define GPC_COUPLING_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gpc/errors.hpp"

namespace gpc {

enum class SolverKind { ExactCode, GpMean, GpPerturbed };

// Deterministic solver for one subsystem. `theta` is an optional frozen
// parameter vector shared by all solvers of a problem (empty when unused).
struct SolverBox {
  int input_dim = 0;
  int output_dim = 0;
  SolverKind kind = SolverKind::ExactCode;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      eval;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& theta) const {
    return eval(x, theta);
  }
};

using TransferMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline TransferMap identity_transfer() {
  return [](const Eigen::VectorXd& v) { return v; };
}

// Partitioned coupling problem: C solvers chained through transfer maps,
// interface updated by one sweep of all solvers.
struct CouplingProblem {
  std::vector<SolverBox> solvers;
  // transfers[0] maps the interface into solver 0's input; transfers[c]
  // (0 < c < C) maps solver c-1's output into solver c's input;
  // transfers[C] maps the last solver's output back to the interface.
  std::vector<TransferMap> transfers;
  int interface_dim = 1;
  TransferMap post_map = identity_transfer();  // H
  Eigen::VectorXd u0;
  double tolerance = 1e-8;
  int max_iter = 1000;
  Eigen::VectorXd theta;  // frozen per solve

  int num_solvers() const { return static_cast<int>(solvers.size()); }

  void validate() const {
    if (solvers.size() < 1) throw ConfigError("coupling problem needs solvers");
    if (transfers.size() != solvers.size() + 1)
      throw ConfigError("coupling problem needs C+1 transfer maps");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (u0.size() != interface_dim)
      throw ConfigError("initial interface state has wrong dimension");
  }
};

// Inputs queried per solver during a run, plus the interface iterates.
struct PathRecord {
  std::vector<std::vector<Eigen::VectorXd>> solver_inputs;  // [solver][iter]
  std::vector<Eigen::VectorXd> iterates;                    // u^(0..M)
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline void check_iterate(const Eigen::VectorXd& u) {
  if (!u.allFinite() || u.norm() > 1e9)
    throw DivergenceError("fixed-point iterate diverged");
}

// Picard iteration over a per-iteration sweep. `sweep(u, m, record)` applies
// one pass of all solvers; the same routine backs both the plain solve and
// the iteration-indexed perturbed solves so that zero perturbations
// reproduce the plain run bitwise.
template <typename Sweep>
std::pair<Eigen::VectorXd, PathRecord> picard(const Eigen::VectorXd& u0,
                                              double tol, int max_iter,
                                              int num_solvers, Sweep&& sweep) {
  PathRecord rec;
  rec.solver_inputs.resize(num_solvers);
  Eigen::VectorXd u = u0;
  rec.iterates.push_back(u);
  for (int m = 0; m < max_iter; ++m) {
    Eigen::VectorXd un = sweep(u, m, rec);
    check_iterate(un);
    rec.iterates.push_back(un);
    ++rec.iterations;
    if ((un - u).norm() <= tol) {
      rec.converged = true;
      return {un, std::move(rec)};
    }
    u = un;
  }
  return {u, std::move(rec)};
}

}  // namespace detail

// One application of the coupling operator. Returns the next interface state
// and the input each solver received.
inline std::pair<Eigen::VectorXd, std::vector<Eigen::VectorXd>> apply_T(
    const CouplingProblem& p, const Eigen::VectorXd& u) {
  p.validate();
  if (u.size() != p.interface_dim)
    throw ConfigError("interface state has wrong dimension");
  std::vector<Eigen::VectorXd> inputs;
  Eigen::VectorXd v = p.transfers[0](u);
  for (int c = 0; c < p.num_solvers(); ++c) {
    inputs.push_back(v);
    Eigen::VectorXd y;
    try {
      y = p.solvers[c](v, p.theta);
    } catch (const std::exception& e) {
      throw std::runtime_error("solver " + std::to_string(c) +
                               " failed: " + e.what());
    }
    v = p.transfers[c + 1](y);
  }
  return {v, std::move(inputs)};
}

struct FixedPointResult {
  Eigen::VectorXd u_star;
  PathRecord path;
  bool converged = false;
};

inline FixedPointResult fixed_point(const CouplingProblem& p) {
  p.validate();
  auto [u, rec] = detail::picard(
      p.u0, p.tolerance, p.max_iter, p.num_solvers(),
      [&](const Eigen::VectorXd& u, int, PathRecord& r) {
        auto [un, inputs] = apply_T(p, u);
        for (int c = 0; c < p.num_solvers(); ++c)
          r.solver_inputs[c].push_back(inputs[c]);
        return un;
      });
  bool conv = rec.converged;
  return {std::move(u), std::move(rec), conv};
}

// Max over a grid of the local operator norm of dT, via central finite
// differences with step 1e-6 times the grid extent per dimension.
inline double estimate_contraction(const CouplingProblem& p,
                                   const std::vector<Eigen::VectorXd>& grid) {
  p.validate();
  if (grid.empty()) throw ConfigError("contraction estimate needs a grid");
  const int d = p.interface_dim;
  Eigen::VectorXd lo = grid.front(), hi = grid.front();
  for (const auto& g : grid) {
    if (g.size() != d) throw ConfigError("contraction grid point has wrong dimension");
    lo = lo.cwiseMin(g);
    hi = hi.cwiseMax(g);
  }
  Eigen::VectorXd width = (hi - lo).cwiseMax(1.0e-12);
  double rho = 0.0;
  for (const auto& g : grid) {
    Eigen::MatrixXd J(d, d);
    for (int k = 0; k < d; ++k) {
      double h = 1e-6 * width[k];
      Eigen::VectorXd up = g, dn = g;
      up[k] += h;
      dn[k] -= h;
      Eigen::VectorXd Tp = apply_T(p, up).first;
      Eigen::VectorXd Tm = apply_T(p, dn).first;
      J.col(k) = (Tp - Tm) / (2.0 * h);
    }
    double norm = d == 1 ? std::abs(J(0, 0))
                         : J.jacobiSvd().singularValues().maxCoeff();
    rho = std::max(rho, norm);
  }
  return rho;
}

inline double estimate_contraction_1d(const CouplingProblem& p, double lo,
                                      double hi, int n_grid = 1001) {
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < n_grid; ++i) {
    Eigen::VectorXd u(1);
    u[0] = lo + (hi - lo) * i / (n_grid - 1.0);
    grid.push_back(u);
  }
  return estimate_contraction(p, grid);
}

// Multi-step cycle: step t starts from the previous step's fixed point mapped
// through `transition`. Aborts (throws) if any step fails to converge.
struct CycleResult {
  std::vector<Eigen::VectorXd> step_fixed_points;
  std::vector<PathRecord> step_paths;
  std::vector<Eigen::VectorXd> step_outputs;  // post-map per step
};

inline CycleResult multi_step_cycle(
    const std::vector<CouplingProblem>& steps, const Eigen::VectorXd& initial,
    const TransferMap& transition = identity_transfer()) {
  if (steps.empty()) throw ConfigError("cycle needs at least one step");
  CycleResult out;
  Eigen::VectorXd state = initial;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    CouplingProblem p = steps[t];
    p.u0 = state;
    FixedPointResult r = fixed_point(p);
    if (!r.path.converged)
      throw std::runtime_error("cycle step " + std::to_string(t) +
                               " did not converge");
    out.step_fixed_points.push_back(r.u_star);
    out.step_outputs.push_back(p.post_map(r.u_star));
    out.step_paths.push_back(std::move(r.path));
    state = transition(r.u_star);
  }
  return out;
}

// CSV export of a path record: iteration, solver, input and the interface
// iterate reached at that iteration.
inline void write_path_csv(const PathRecord& rec, std::ostream& os) {
  os << "iteration,solver,input...\n";
  os.precision(17);
  for (std::size_t c = 0; c < rec.solver_inputs.size(); ++c)
    for (std::size_t m = 0; m < rec.solver_inputs[c].size(); ++m) {
      os << m << "," << c;
      const auto& x = rec.solver_inputs[c][m];
      for (int k = 0; k < x.size(); ++k) os << "," << x[k];
      os << "\n";
    }
}

}  // namespace gpc

#endif
