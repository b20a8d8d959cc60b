#ifndef GPC_UQ_HPP
#define GPC_UQ_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gpc/coupling.hpp"
#include "gpc/errors.hpp"
#include "gpc/gp.hpp"
#include "gpc/rng.hpp"

namespace gpc {

// One GP surrogate feeding a contiguous slice of one solver's output.
// The coupled system may have several units per solver (e.g. two scalar
// codes bundled into one solver box).
struct SurrogateUnit {
  int solver_index = 0;
  int output_offset = 0;
  const GpModel* model = nullptr;
  std::string name;

  int width() const { return model->output_dim(); }
};

struct McOptions {
  bool zero_offsets = false;   // diagnostic: force all perturbations to zero
  double max_excluded_fraction = 0.01;
  int jobs = 1;
};

struct McEnsemble {
  std::string method;  // "M2" or "M3"
  std::vector<Eigen::VectorXd> samples;  // converged replications only
  std::vector<int> iteration_counts;
  std::vector<std::uint64_t> seeds;
  int requested = 0;
  int excluded = 0;
  Eigen::VectorXd mean_path_output;  // deterministic gp-mean run output
  // per unit, per converged replication: max_m ||delta_m||_2 (M3 only)
  std::vector<std::vector<double>> unit_max_offset_norms;
};

struct McStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd variance;
  Eigen::VectorXd q025, q975;
  int sample_size = 0;
  int excluded = 0;
};

// Type-7 quantile: linear interpolation at position 1 + (N-1)p.
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw InsufficientDataError("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

inline McStats ensemble_stats(const McEnsemble& e) {
  const int N = static_cast<int>(e.samples.size());
  if (N < 2) throw InsufficientDataError("ensemble statistics need >= 2 samples");
  const int D = static_cast<int>(e.samples.front().size());
  McStats s;
  s.sample_size = N;
  s.excluded = e.excluded;
  s.mean = Eigen::VectorXd::Zero(D);
  for (const auto& y : e.samples) s.mean += y;
  s.mean /= N;
  s.covariance = Eigen::MatrixXd::Zero(D, D);
  for (const auto& y : e.samples) {
    Eigen::VectorXd d = y - s.mean;
    s.covariance += d * d.transpose();
  }
  s.covariance /= (N - 1);
  s.variance = s.covariance.diagonal();
  s.q025.resize(D);
  s.q975.resize(D);
  for (int k = 0; k < D; ++k) {
    std::vector<double> col(N);
    for (int j = 0; j < N; ++j) col[j] = e.samples[j][k];
    s.q025[k] = quantile_type7(col, 0.025);
    s.q975[k] = quantile_type7(col, 0.975);
  }
  return s;
}

namespace detail {

inline void check_units(const CouplingProblem& p,
                        const std::vector<SurrogateUnit>& units) {
  for (const auto& u : units) {
    if (u.model == nullptr) throw ConfigError("surrogate unit without model");
    if (u.solver_index < 0 || u.solver_index >= p.num_solvers())
      throw ConfigError("surrogate unit references missing solver");
    if (u.output_offset + u.width() > p.solvers[u.solver_index].output_dim)
      throw ConfigError("surrogate unit slice exceeds solver output");
  }
}

// Deterministic parallel map over replication indices.
template <typename Fn>
void parallel_replications(int n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int j = 0; j < n; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int j = w; j < n; j += jobs) fn(j);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// One sweep of all solvers with unit output slices perturbed (M3) or
// replaced by trajectory draws (M2). `adjust(unit_index, m, slice)` mutates
// the slice belonging to that unit.
template <typename Adjust>
Eigen::VectorXd perturbed_sweep(const CouplingProblem& p,
                                const std::vector<SurrogateUnit>& units,
                                const Eigen::VectorXd& u, int m,
                                PathRecord& rec, Adjust&& adjust) {
  Eigen::VectorXd v = p.transfers[0](u);
  for (int c = 0; c < p.num_solvers(); ++c) {
    rec.solver_inputs[c].push_back(v);
    Eigen::VectorXd y = p.solvers[c](v, p.theta);
    for (std::size_t k = 0; k < units.size(); ++k) {
      const auto& un = units[k];
      if (un.solver_index != c) continue;
      auto slice = y.segment(un.output_offset, un.width());
      adjust(static_cast<int>(k), m, v, slice);
    }
    v = p.transfers[c + 1](y);
  }
  return v;
}

}  // namespace detail

// Method 3: constant offsets along the frozen mean path. One deterministic
// gp-mean run fixes the queried inputs; each replication draws a joint
// posterior realization on those inputs per unit and reruns the coupling
// with iteration-indexed mean offsets (the last offset is reused if a
// perturbed run needs more iterations than the mean run).
inline McEnsemble run_method3(const CouplingProblem& problem,
                              const std::vector<SurrogateUnit>& units,
                              int n_replications, std::uint64_t master_seed,
                              const McOptions& opt = {}) {
  problem.validate();
  detail::check_units(problem, units);
  FixedPointResult mean_run = fixed_point(problem);
  if (!mean_run.converged)
    throw std::runtime_error("method 3: deterministic mean run did not converge");
  const int M = mean_run.path.iterations;

  std::vector<std::unique_ptr<JointPosterior>> joints;
  for (const auto& u : units)
    joints.push_back(std::make_unique<JointPosterior>(
        *u.model, mean_run.path.solver_inputs[u.solver_index]));

  McEnsemble e;
  e.method = "M3";
  e.requested = n_replications;
  e.mean_path_output = problem.post_map(mean_run.u_star);
  const int K = static_cast<int>(units.size());

  struct Slot {
    bool ok = false;
    Eigen::VectorXd y;
    int iters = 0;
    std::uint64_t seed = 0;
    std::vector<double> max_offset;
  };
  std::vector<Slot> slots(n_replications);

  detail::parallel_replications(n_replications, opt.jobs, [&](int j) {
    Slot& slot = slots[j];
    slot.seed = derive_seed(master_seed, "M3", static_cast<std::uint64_t>(j));
    Rng rng(slot.seed);
    // offsets[k] is an M x D_k matrix of sampled-minus-mean values
    std::vector<Eigen::MatrixXd> offsets(K);
    slot.max_offset.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
      const int D = units[k].width();
      Eigen::VectorXd draw = joints[k]->draw(rng);
      Eigen::VectorXd delta = draw - joints[k]->mean();
      offsets[k].resize(M, D);
      for (int m = 0; m < M; ++m) {
        offsets[k].row(m) = delta.segment(m * D, D).transpose();
        slot.max_offset[k] = std::max(slot.max_offset[k], offsets[k].row(m).norm());
      }
    }
    try {
      auto [u, rec] = detail::picard(
          problem.u0, problem.tolerance, problem.max_iter, problem.num_solvers(),
          [&](const Eigen::VectorXd& u, int m, PathRecord& r) {
            return detail::perturbed_sweep(
                problem, units, u, m, r,
                [&](int k, int mi, const Eigen::VectorXd&, auto slice) {
                  if (opt.zero_offsets) return;  // bitwise mean-run replay
                  slice += offsets[k].row(std::min(mi, M - 1)).transpose();
                });
          });
      if (rec.converged) {
        slot.ok = true;
        slot.y = problem.post_map(u);
        slot.iters = rec.iterations;
      }
    } catch (const DivergenceError&) {
      slot.ok = false;
    }
  });

  e.unit_max_offset_norms.assign(K, {});
  for (const auto& s : slots) {
    if (!s.ok) {
      ++e.excluded;
      continue;
    }
    e.samples.push_back(s.y);
    e.iteration_counts.push_back(s.iters);
    e.seeds.push_back(s.seed);
    for (int k = 0; k < K; ++k) e.unit_max_offset_norms[k].push_back(s.max_offset[k]);
  }
  if (e.excluded > opt.max_excluded_fraction * n_replications)
    throw std::runtime_error("method 3: too many non-convergent replications (" +
                             std::to_string(e.excluded) + ")");
  return e;
}

// Method 2: trajectory-conditioned sampling. At every fixed-point iteration
// the surrogate value at the queried input is drawn from the posterior law
// conditioned on training data and the values already sampled along this
// replication's trajectory.
inline McEnsemble run_method2(const CouplingProblem& problem,
                              const std::vector<SurrogateUnit>& units,
                              int n_replications, std::uint64_t master_seed,
                              const McOptions& opt = {}) {
  problem.validate();
  detail::check_units(problem, units);
  FixedPointResult mean_run = fixed_point(problem);
  if (!mean_run.converged)
    throw std::runtime_error("method 2: deterministic mean run did not converge");

  McEnsemble e;
  e.method = "M2";
  e.requested = n_replications;
  e.mean_path_output = problem.post_map(mean_run.u_star);
  const int K = static_cast<int>(units.size());

  struct Slot {
    bool ok = false;
    Eigen::VectorXd y;
    int iters = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Slot> slots(n_replications);

  detail::parallel_replications(n_replications, opt.jobs, [&](int j) {
    Slot& slot = slots[j];
    slot.seed = derive_seed(master_seed, "M2", static_cast<std::uint64_t>(j));
    Rng rng(slot.seed);
    std::vector<TrajectoryState> traj;
    traj.reserve(K);
    for (int k = 0; k < K; ++k) traj.emplace_back(*units[k].model);
    try {
      auto [u, rec] = detail::picard(
          problem.u0, problem.tolerance, problem.max_iter, problem.num_solvers(),
          [&](const Eigen::VectorXd& u, int m, PathRecord& r) {
            return detail::perturbed_sweep(
                problem, units, u, m, r,
                [&](int k, int, const Eigen::VectorXd& x, auto slice) {
                  slice = traj[k].sample(x, rng);
                });
          });
      if (rec.converged) {
        slot.ok = true;
        slot.y = problem.post_map(u);
        slot.iters = rec.iterations;
      }
    } catch (const DivergenceError&) {
      slot.ok = false;
    }
  });

  for (const auto& s : slots) {
    if (!s.ok) {
      ++e.excluded;
      continue;
    }
    e.samples.push_back(s.y);
    e.iteration_counts.push_back(s.iters);
    e.seeds.push_back(s.seed);
  }
  if (e.excluded > opt.max_excluded_fraction * n_replications)
    throw std::runtime_error("method 2: too many non-convergent replications (" +
                             std::to_string(e.excluded) + ")");
  return e;
}

// Method 3 over a multi-step cycle: one joint posterior draw per unit over
// the whole concatenated deterministic cycle path, offsets indexed by
// (step, inner iteration). Each replication's sample stacks the per-step
// outputs.
inline McEnsemble run_method3_cycle(
    const std::vector<CouplingProblem>& steps,
    const std::vector<SurrogateUnit>& units, const Eigen::VectorXd& initial,
    int n_replications, std::uint64_t master_seed,
    const TransferMap& transition = identity_transfer(),
    const McOptions& opt = {}) {
  if (steps.empty()) throw ConfigError("cycle UQ needs at least one step");
  for (const auto& p : steps) {
    p.validate();
    detail::check_units(p, units);
  }
  CycleResult mean_cycle = multi_step_cycle(steps, initial, transition);
  const int T = static_cast<int>(steps.size());
  const int K = static_cast<int>(units.size());

  // concatenated path per unit, with per-step iteration counts
  std::vector<int> step_iters(T);
  std::vector<int> step_start(T);  // offset of step t in the concatenated path
  int total = 0;
  for (int t = 0; t < T; ++t) {
    step_start[t] = total;
    step_iters[t] = mean_cycle.step_paths[t].iterations;
    total += step_iters[t];
  }
  std::vector<std::unique_ptr<JointPosterior>> joints;
  for (const auto& u : units) {
    std::vector<Eigen::VectorXd> path;
    for (int t = 0; t < T; ++t) {
      const auto& in = mean_cycle.step_paths[t].solver_inputs[u.solver_index];
      path.insert(path.end(), in.begin(), in.end());
    }
    joints.push_back(std::make_unique<JointPosterior>(*u.model, path));
  }

  const int out_dim = static_cast<int>(mean_cycle.step_outputs.front().size());
  McEnsemble e;
  e.method = "M3-cycle";
  e.requested = n_replications;
  e.mean_path_output.resize(T * out_dim);
  for (int t = 0; t < T; ++t)
    e.mean_path_output.segment(t * out_dim, out_dim) = mean_cycle.step_outputs[t];

  struct Slot {
    bool ok = false;
    Eigen::VectorXd y;
    int iters = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Slot> slots(n_replications);

  detail::parallel_replications(n_replications, opt.jobs, [&](int j) {
    Slot& slot = slots[j];
    slot.seed = derive_seed(master_seed, "M3cyc", static_cast<std::uint64_t>(j));
    Rng rng(slot.seed);
    std::vector<Eigen::MatrixXd> offsets(K);  // total x D_k
    for (int k = 0; k < K; ++k) {
      const int D = units[k].width();
      Eigen::VectorXd draw = joints[k]->draw(rng);
      Eigen::VectorXd delta = draw - joints[k]->mean();
      offsets[k].resize(total, D);
      for (int m = 0; m < total; ++m)
        offsets[k].row(m) = delta.segment(m * D, D).transpose();
    }
    try {
      Eigen::VectorXd state = initial;
      Eigen::VectorXd stacked(T * out_dim);
      int iters = 0;
      for (int t = 0; t < T; ++t) {
        CouplingProblem p = steps[t];
        p.u0 = state;
        auto [u, rec] = detail::picard(
            p.u0, p.tolerance, p.max_iter, p.num_solvers(),
            [&](const Eigen::VectorXd& u, int m, PathRecord& r) {
              return detail::perturbed_sweep(
                  p, units, u, m, r,
                  [&](int k, int mi, const Eigen::VectorXd&, auto slice) {
                    if (opt.zero_offsets) return;
                    int idx = step_start[t] + std::min(mi, step_iters[t] - 1);
                    slice += offsets[k].row(idx).transpose();
                  });
            });
        if (!rec.converged) return;  // slot stays excluded
        iters += rec.iterations;
        stacked.segment(t * out_dim, out_dim) = p.post_map(u);
        state = transition(u);
      }
      slot.ok = true;
      slot.y = std::move(stacked);
      slot.iters = iters;
    } catch (const DivergenceError&) {
      slot.ok = false;
    }
  });

  for (const auto& s : slots) {
    if (!s.ok) {
      ++e.excluded;
      continue;
    }
    e.samples.push_back(s.y);
    e.iteration_counts.push_back(s.iters);
    e.seeds.push_back(s.seed);
  }
  if (e.excluded > opt.max_excluded_fraction * n_replications)
    throw std::runtime_error("cycle UQ: too many non-convergent replications");
  return e;
}

// CSV dump: replication, converged flag, iteration count, outputs.
inline void write_ensemble_csv(const McEnsemble& e, std::ostream& os) {
  os << "replication,converged,iterations";
  if (!e.samples.empty())
    for (int k = 0; k < e.samples.front().size(); ++k) os << ",y" << k;
  os << "\n";
  os.precision(17);
  for (std::size_t j = 0; j < e.samples.size(); ++j) {
    os << j << ",1," << e.iteration_counts[j];
    for (int k = 0; k < e.samples[j].size(); ++k) os << "," << e.samples[j][k];
    os << "\n";
  }
}

}  // namespace gpc

#endif
