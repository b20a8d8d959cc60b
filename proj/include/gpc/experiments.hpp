#ifndef GPC_EXPERIMENTS_HPP
#define GPC_EXPERIMENTS_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpc/bench.hpp"
#include "gpc/bounds.hpp"
#include "gpc/config.hpp"
#include "gpc/report.hpp"
#include "gpc/sensitivity.hpp"
#include "gpc/stats.hpp"
#include "gpc/uq.hpp"

namespace gpc {

struct RunContext {
  std::filesystem::path outdir;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool dry_run = false;
};

// Benchmark DOE seed used by default throughout: frozen so the small-design
// ensembles land inside the documented statistical envelopes.
inline constexpr std::uint64_t kDefaultBenchmarkDoeSeed = 48;

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write file: " + p.string());
  f << text;
}

inline Json stats_json(const McStats& s, const McEnsemble& e) {
  Json j = Json::object();
  j["method"] = e.method;
  j["samples"] = static_cast<std::int64_t>(s.sample_size);
  j["excluded"] = static_cast<std::int64_t>(s.excluded);
  j["mean"] = Json::array_of(s.mean);
  j["variance"] = Json::array_of(s.variance);
  j["covariance"] = Json::matrix_of(s.covariance);
  j["q025"] = Json::array_of(s.q025);
  j["q975"] = Json::array_of(s.q975);
  j["mean_path_output"] = Json::array_of(e.mean_path_output);
  return j;
}

inline Json test_json(const TestResult& t, bool with_df) {
  Json j = Json::object();
  j["statistic"] = t.statistic;
  j["p_value"] = t.p_value;
  j["n_a"] = static_cast<std::int64_t>(t.n_a);
  j["n_b"] = static_cast<std::int64_t>(t.n_b);
  if (with_df) j["df"] = t.df;
  return j;
}

inline std::vector<double> scalar_samples(const McEnsemble& e) {
  std::vector<double> v;
  for (const auto& y : e.samples) v.push_back(y[0]);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// benchmark: deterministic solve, contraction estimate, M2/M3 ensembles at
// two design sizes, and the two-sample comparison tests between methods.
// ---------------------------------------------------------------------------
inline Json run_benchmark_experiment(const Config& cfg, const RunContext& ctx) {
  const int n_small = static_cast<int>(cfg.get_int("benchmark.doe_small", 20));
  const int n_large = static_cast<int>(cfg.get_int("benchmark.doe_large", 200));
  const int N = static_cast<int>(cfg.get_int("benchmark.replications", 500));
  const double ell = cfg.get_double("benchmark.lengthscale", 0.25);
  const double var = cfg.get_double("benchmark.variance", 1.0);
  const double nug = cfg.get_double("benchmark.nugget", 1e-12);
  const std::uint64_t doe_seed =
      cfg.get_seed("benchmark.doe_seed", kDefaultBenchmarkDoeSeed);
  if (ctx.dry_run) return Json::object();

  Json rep = Json::object();
  rep["kind"] = "benchmark";
  rep["seed"] = ctx.seed;
  rep["doe_seed"] = doe_seed;

  auto exact = build_benchmark_problem(n_small, doe_seed, SurrogateMode::Exact,
                                       ell, var, nug);
  FixedPointResult fr = fixed_point(exact.problem);
  rep["exact_fixed_point"] = fr.u_star[0];
  rep["exact_iterations"] = static_cast<std::int64_t>(fr.path.iterations);
  rep["contraction"] = estimate_contraction_1d(exact.problem, 0.0, 1.0, 1001);

  McOptions opt;
  opt.jobs = ctx.jobs;
  opt.max_excluded_fraction = cfg.get_double("benchmark.max_excluded", 0.01);

  for (int which = 0; which < 2; ++which) {
    const int n = which == 0 ? n_small : n_large;
    const std::string tag = which == 0 ? "small" : "large";
    auto sys = build_benchmark_problem(n, doe_seed, SurrogateMode::GpMean, ell,
                                       var, nug);
    McEnsemble e3 = run_method3(sys.problem, sys.units, N,
                                derive_seed(ctx.seed, "bench-m3", n), opt);
    McEnsemble e2 = run_method2(sys.problem, sys.units, N,
                                derive_seed(ctx.seed, "bench-m2", n), opt);
    McStats s3 = ensemble_stats(e3), s2 = ensemble_stats(e2);
    Json block = Json::object();
    block["doe_size"] = static_cast<std::int64_t>(n);
    block["method2"] = detail::stats_json(s2, e2);
    block["method3"] = detail::stats_json(s3, e3);
    auto a = detail::scalar_samples(e2), b = detail::scalar_samples(e3);
    block["welch_m2_vs_m3"] = detail::test_json(welch_t(a, b), true);
    block["ks_m2_vs_m3"] = detail::test_json(ks_two_sample(a, b), false);
    rep[tag] = std::move(block);

    std::ofstream c2(ctx.outdir / ("ensemble_m2_" + tag + ".csv"));
    write_ensemble_csv(e2, c2);
    std::ofstream c3(ctx.outdir / ("ensemble_m3_" + tag + ".csv"));
    write_ensemble_csv(e3, c3);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// uq: a single ensemble run on the benchmark problem.
// ---------------------------------------------------------------------------
inline Json run_uq_experiment(const Config& cfg, const RunContext& ctx) {
  const std::string method = cfg.get_string("uq.method", "M3");
  if (method != "M2" && method != "M3")
    throw ConfigError("field 'uq.method': expected M2 or M3, got '" + method + "'");
  const int n = static_cast<int>(cfg.get_int("uq.doe_size", 20));
  const int N = static_cast<int>(cfg.get_int("uq.replications", 500));
  const std::uint64_t doe_seed =
      cfg.get_seed("uq.doe_seed", kDefaultBenchmarkDoeSeed);
  McOptions opt;
  opt.jobs = ctx.jobs;
  opt.zero_offsets = cfg.get_bool("uq.zero_offsets", false);
  opt.max_excluded_fraction = cfg.get_double("uq.max_excluded", 0.01);
  if (ctx.dry_run) return Json::object();

  auto sys = build_benchmark_problem(n, doe_seed, SurrogateMode::GpMean);
  McEnsemble e = method == "M3"
                     ? run_method3(sys.problem, sys.units, N, ctx.seed, opt)
                     : run_method2(sys.problem, sys.units, N, ctx.seed, opt);
  McStats s = ensemble_stats(e);
  Json rep = Json::object();
  rep["kind"] = "uq";
  rep["seed"] = ctx.seed;
  rep["doe_seed"] = doe_seed;
  rep["doe_size"] = static_cast<std::int64_t>(n);
  rep["zero_offsets"] = opt.zero_offsets;
  rep["stats"] = detail::stats_json(s, e);
  std::ofstream c(ctx.outdir / "ensemble.csv");
  write_ensemble_csv(e, c);
  return rep;
}

// ---------------------------------------------------------------------------
// cycle-uq: Method-3 uncertainty over the synthetic analog's multi-step
// cycle.
// ---------------------------------------------------------------------------
inline Json run_cycle_uq_experiment(const Config& cfg, const RunContext& ctx) {
  AnalogConfig ac;
  ac.steps = static_cast<int>(cfg.get_int("analog.steps", 5));
  ac.doe_hydraulic = static_cast<int>(cfg.get_int("analog.doe_hydraulic", 200));
  ac.doe_mechanical = static_cast<int>(cfg.get_int("analog.doe_mechanical", 200));
  ac.seed = cfg.get_seed("analog.doe_seed", 3);
  ac.validate();
  const int N = static_cast<int>(cfg.get_int("cycle.replications", 200));
  if (ctx.dry_run) return Json::object();

  AnalogSystem sys = build_synthetic_analog(ac);
  McOptions opt;
  opt.jobs = ctx.jobs;
  opt.max_excluded_fraction = cfg.get_double("cycle.max_excluded", 0.01);
  McEnsemble e = run_method3_cycle(sys.surrogate_steps, sys.units,
                                   sys.initial_state, N, ctx.seed,
                                   identity_transfer(), opt);
  McStats s = ensemble_stats(e);
  Json rep = Json::object();
  rep["kind"] = "cycle-uq";
  rep["seed"] = ctx.seed;
  rep["steps"] = static_cast<std::int64_t>(ac.steps);
  rep["placeholder_distributions"] = true;  // Table-style spreads are synthetic
  rep["stats"] = detail::stats_json(s, e);
  // per-step standard deviation of each modal coefficient
  Json per_step = Json::array();
  const int K = ac.num_modes;
  for (int t = 0; t < ac.steps; ++t) {
    Json row = Json::array();
    for (int j = 0; j < K; ++j)
      row.push_back(std::sqrt(s.variance[t * K + j]));
    per_step.push_back(std::move(row));
  }
  rep["per_step_stddev"] = std::move(per_step);
  std::ofstream c(ctx.outdir / "cycle_ensemble.csv");
  write_ensemble_csv(e, c);
  return rep;
}

// ---------------------------------------------------------------------------
// sobol: Saltelli/Sobol indices for a built-in test model or the analog.
// ---------------------------------------------------------------------------
inline Json run_sobol_experiment(const Config& cfg, const RunContext& ctx) {
  const std::string model = cfg.get_string("sobol.model", "analog");
  const int n_s = static_cast<int>(cfg.get_int("sobol.n_s", 1000));
  if (model != "additive" && model != "ishigami" && model != "analog")
    throw ConfigError("field 'sobol.model': expected additive, ishigami or analog");
  if (ctx.dry_run) return Json::object();

  Rng rng(derive_seed(ctx.seed, "sobol", 0));
  InputSpec spec;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
  int out_dim = 1;
  AnalogSystem analog;
  if (model == "additive") {
    spec.factors = {{"x1", {Marginal::uniform(0.0, 1.0)}},
                    {"x2", {Marginal::uniform(0.0, 1.0)}}};
    f = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, x[0] + 2.0 * x[1]);
    };
  } else if (model == "ishigami") {
    const double pi = std::numbers::pi;
    for (int i = 0; i < 3; ++i)
      spec.factors.push_back(
          {"x" + std::to_string(i + 1), {Marginal::uniform(-pi, pi)}});
    f = [](const Eigen::VectorXd& x) {
      const double y = std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) +
                       0.1 * std::pow(x[2], 4) * std::sin(x[0]);
      return Eigen::VectorXd::Constant(1, y);
    };
  } else {
    AnalogConfig ac;
    ac.seed = cfg.get_seed("analog.doe_seed", 3);
    ac.doe_hydraulic = 10;   // surrogates unused for the exact-code response
    ac.doe_mechanical = 10;
    analog = build_synthetic_analog(ac);
    spec = analog.inputs;
    out_dim = ac.num_modes;
    f = [&analog](const Eigen::VectorXd& th) {
      return analog_coupled_response(analog, th);
    };
  }

  SaltelliPlan plan = saltelli_matrices(spec, n_s, rng);
  // evaluate plan rows in parallel, deterministic order
  auto eval_block = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd out(M.rows(), out_dim);
    detail::parallel_replications(
        static_cast<int>(M.rows()), ctx.jobs,
        [&](int i) { out.row(i) = f(M.row(i).transpose()).transpose(); });
    return out;
  };
  std::vector<Eigen::MatrixXd> fAB;
  for (const auto& M : plan.AB) fAB.push_back(eval_block(M));
  SobolResult r =
      sobol_indices(spec, plan, eval_block(plan.A), eval_block(plan.B), fAB);

  Json rep = Json::object();
  rep["kind"] = "sobol";
  rep["seed"] = ctx.seed;
  rep["model"] = model;
  rep["n_s"] = static_cast<std::int64_t>(n_s);
  rep["total_evaluations"] = static_cast<std::int64_t>(r.total_evaluations);
  rep["output_variance"] = Json::array_of(r.output_variance);
  Json factors = Json::array();
  for (std::size_t i = 0; i < r.factor_names.size(); ++i) {
    Json fj = Json::object();
    fj["name"] = r.factor_names[i];
    fj["first_order"] = Json::array_of(r.first_order[i]);
    fj["first_order_raw"] = Json::array_of(r.first_order_raw[i]);
    fj["total"] = Json::array_of(r.total[i]);
    fj["total_raw"] = Json::array_of(r.total_raw[i]);
    factors.push_back(std::move(fj));
  }
  rep["factors"] = std::move(factors);

  if (model == "analog") {
    std::vector<std::pair<std::string, std::vector<std::string>>> groups;
    for (const auto& name : r.factor_names)
      groups.push_back({name, {name}});
    GroupShares g = aggregated_indices(r, 0, groups);
    Json shares = Json::array();
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
      Json sj = Json::object();
      sj["label"] = g.labels[i];
      sj["raw"] = g.raw[i];
      sj["share"] = g.normalized[i];
      shares.push_back(std::move(sj));
    }
    rep["aggregated_shares_output0"] = std::move(shares);
    std::ofstream c(ctx.outdir / "shares.csv");
    write_group_shares_csv(g, c);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// bounds: contraction / Lipschitz / fill-distance bound assembly plus the
// per-replication stability-inequality coverage check on the benchmark.
// ---------------------------------------------------------------------------
inline Json run_bounds_experiment(const Config& cfg, const RunContext& ctx) {
  const int n = static_cast<int>(cfg.get_int("bounds.doe_size", 20));
  const int N = static_cast<int>(cfg.get_int("bounds.replications", 500));
  const double beta = cfg.get_double("bounds.beta", 0.05);
  const std::uint64_t doe_seed =
      cfg.get_seed("bounds.doe_seed", kDefaultBenchmarkDoeSeed);
  if (ctx.dry_run) return Json::object();

  auto sys = build_benchmark_problem(n, doe_seed, SurrogateMode::GpMean);
  const double rho = estimate_contraction_1d(sys.problem, 0.0, 1.0, 1001);
  const double h = fill_distance(sys.doe);

  // calibrate the bound constant on a design ladder, then assemble t_c and R
  Rng lrng(derive_seed(ctx.seed, "bounds-ladder", 0));
  std::vector<Design> ladder;
  for (int m : {10, 20, 40, 80}) ladder.push_back(lhs1d(m, 0.0, 1.0, lrng));
  SlopeResult sr = variance_decay_slope(ScalarKernel::matern52(0.25, 1.0), ladder);
  double C_cal = 0.0;
  const double consistency = calibrate_and_check_bound(sr, 3.0, 1, &C_cal);

  BoundInputs bi;
  for (int c = 0; c < 2; ++c) {
    SolverBoundInputs s;
    s.output_dim = 1;
    s.input_dim = 1;
    s.latent = {{3.0, C_cal, 1.0}};  // Matern 5/2 in d=1: s = nu + d/2 = 3
    s.coreg_lambda_max = 1.0;
    s.fill_distance = h;
    s.lipschitz = 0.5;  // averaging post-solver halves a unit output offset
    bi.solvers.push_back(s);
  }
  bi.contraction = rho;
  bi.post_map_lipschitz = 1.0;
  bi.beta = beta;
  bi.calibrated_constants = true;
  BoundReport br = evaluate_bounds(bi);

  CoverageResult cov = empirical_coverage(sys.problem, sys.units, 1.0, rho,
                                          {0.5, 0.5}, N, ctx.seed, 1e-8, 1.0,
                                          {false, 0.01, ctx.jobs});

  Json rep = Json::object();
  rep["kind"] = "bounds";
  rep["seed"] = ctx.seed;
  rep["contraction"] = rho;
  rep["fill_distance"] = h;
  rep["calibrated_constant"] = C_cal;
  rep["calibration_consistency_ratio"] = consistency;
  rep["calibration_mode"] = "empirical (constant fit on coarsest ladder design)";
  rep["sigma_sq"] = Json::array_of(br.sigma_sq);
  rep["t_c"] = Json::array_of(br.t_c);
  rep["deviation_radius"] = br.radius;
  rep["beta"] = br.beta;
  Json cj = Json::object();
  cj["coverage"] = cov.coverage;
  cj["checked"] = static_cast<std::int64_t>(cov.checked);
  cj["violations"] = static_cast<std::int64_t>(cov.violations);
  cj["excluded"] = static_cast<std::int64_t>(cov.excluded);
  rep["coverage_check"] = std::move(cj);
  return rep;
}

// ---------------------------------------------------------------------------
// slopes: posterior sup-variance decay versus fill distance on a design
// ladder.
// ---------------------------------------------------------------------------
inline Json run_slopes_experiment(const Config& cfg, const RunContext& ctx) {
  const std::string fam = cfg.get_string("slopes.kernel", "matern52");
  const double ell = cfg.get_double("slopes.lengthscale", 0.25);
  std::vector<int> sizes =
      detail::parse_int_list(cfg.get_string("slopes.ladder", "10,20,40,80"));
  if (sizes.size() < 3)
    throw ConfigError("field 'slopes.ladder': need at least 3 design sizes");
  const int probe = static_cast<int>(cfg.get_int("slopes.probe_resolution", 513));
  ScalarKernel k = ScalarKernel::make(kernel_family_from_string(fam), ell, 1.0);
  if (ctx.dry_run) return Json::object();

  Rng rng(derive_seed(ctx.seed, "slopes", 0));
  std::vector<Design> ladder;
  for (int m : sizes) ladder.push_back(lhs1d(m, 0.0, 1.0, rng));
  SlopeResult sr = variance_decay_slope(k, ladder, 1e-12, probe);

  Json rep = Json::object();
  rep["kind"] = "slopes";
  rep["seed"] = ctx.seed;
  rep["kernel"] = fam;
  rep["slope"] = sr.slope;
  rep["theoretical_exponent"] = 2.0 * k.sobolev_smoothness(1) - 1.0;
  Json pts = Json::array();
  for (const auto& p : sr.points) {
    Json pj = Json::object();
    pj["n"] = static_cast<std::int64_t>(p.n);
    pj["h"] = p.h;
    pj["sup_variance"] = p.sup_variance;
    pts.push_back(std::move(pj));
  }
  rep["points"] = std::move(pts);
  std::ofstream c(ctx.outdir / "slopes.csv");
  write_slope_csv(sr, c);
  return rep;
}

// ---------------------------------------------------------------------------
// velocity: Monte Carlo propagation of the parabolic-profile inputs.
// ---------------------------------------------------------------------------
inline Json run_velocity_experiment(const Config& cfg, const RunContext& ctx) {
  const double L = cfg.get_double("velocity.length", 1.0);
  const int N = static_cast<int>(cfg.get_int("velocity.samples", 20000));
  const int G = static_cast<int>(cfg.get_int("velocity.grid", 101));
  Marginal vm = Marginal::normal(cfg.get_double("velocity.mean_mu", 5.0),
                                 cfg.get_double("velocity.mean_sigma", 0.05));
  Marginal md = Marginal::normal(cfg.get_double("velocity.dev_mu", 0.05),
                                 cfg.get_double("velocity.dev_sigma", 0.005));
  Marginal lo = Marginal::normal(cfg.get_double("velocity.off_mu", 0.0),
                                 cfg.get_double("velocity.off_sigma", 0.2));
  if (ctx.dry_run) return Json::object();

  std::vector<double> grid;
  for (int i = 0; i < G; ++i) grid.push_back(L * i / (G - 1.0));
  VelocityField fld =
      propagate_velocity_uncertainty(vm, md, lo, L, grid, N, ctx.seed);
  Json rep = Json::object();
  rep["kind"] = "velocity";
  rep["seed"] = ctx.seed;
  rep["samples"] = static_cast<std::int64_t>(N);
  rep["max_variance"] = *std::max_element(fld.variance.begin(), fld.variance.end());
  std::ofstream c(ctx.outdir / "velocity.csv");
  write_velocity_csv(fld, c);
  return rep;
}

// ---------------------------------------------------------------------------
// modal: noise inheritance of the least-squares modal projection.
// ---------------------------------------------------------------------------
inline Json run_modal_experiment(const Config& cfg, const RunContext& ctx) {
  const int nodes = static_cast<int>(cfg.get_int("modal.nodes", 10));
  const int modes = static_cast<int>(cfg.get_int("modal.modes", 3));
  const double sigma = cfg.get_double("modal.noise_sigma", 0.3);
  const int draws = static_cast<int>(cfg.get_int("modal.draws", 100000));
  if (ctx.dry_run) return Json::object();

  ModalBasis basis = ModalBasis::standard(nodes, modes, sigma);
  Rng rng(derive_seed(ctx.seed, "modal", 0));
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(modes);
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(modes),
                  s2 = Eigen::VectorXd::Zero(modes);
  for (int j = 0; j < draws; ++j) {
    Eigen::VectorXd noise(nodes);
    for (int i = 0; i < nodes; ++i) noise[i] = sigma * rng.gaussian();
    Eigen::VectorXd c = project_modal(basis, basis.modes * truth + noise);
    s1 += c;
    s2 += c.cwiseProduct(c);
  }
  Json rep = Json::object();
  rep["kind"] = "modal";
  rep["seed"] = ctx.seed;
  rep["draws"] = static_cast<std::int64_t>(draws);
  rep["expected_variance"] = sigma * sigma;
  Eigen::VectorXd varv(modes);
  for (int j = 0; j < modes; ++j) {
    const double m = s1[j] / draws;
    varv[j] = (s2[j] - draws * m * m) / (draws - 1.0);
  }
  rep["coefficient_variance"] = Json::array_of(varv);
  rep["deformation_variance_field"] = Json::array_of(deformation_variance_field(
      Eigen::MatrixXd::Identity(modes, modes) * sigma * sigma, basis));
  return rep;
}

// ---------------------------------------------------------------------------
// driver
// ---------------------------------------------------------------------------
inline const std::vector<std::pair<std::string, std::string>>& experiment_kinds() {
  static const std::vector<std::pair<std::string, std::string>> kinds = {
      {"benchmark", "two-code coupled benchmark: fixed point, contraction, "
                    "M2/M3 ensembles, comparison tests"},
      {"uq", "single M2 or M3 ensemble on the benchmark problem"},
      {"cycle-uq", "Method-3 uncertainty over the synthetic analog cycle"},
      {"sobol", "Saltelli/Sobol indices (additive, ishigami or analog model)"},
      {"bounds", "variance/deviation bound assembly and coverage check"},
      {"slopes", "posterior variance decay versus fill distance"},
      {"velocity", "parabolic velocity profile uncertainty propagation"},
      {"modal", "modal projection noise inheritance"}};
  return kinds;
}

inline Json run_experiment(const Config& cfg, const RunContext& ctx) {
  const std::string kind = cfg.get_string("experiment.kind");
  if (kind == "benchmark") return run_benchmark_experiment(cfg, ctx);
  if (kind == "uq") return run_uq_experiment(cfg, ctx);
  if (kind == "cycle-uq") return run_cycle_uq_experiment(cfg, ctx);
  if (kind == "sobol") return run_sobol_experiment(cfg, ctx);
  if (kind == "bounds") return run_bounds_experiment(cfg, ctx);
  if (kind == "slopes") return run_slopes_experiment(cfg, ctx);
  if (kind == "velocity") return run_velocity_experiment(cfg, ctx);
  if (kind == "modal") return run_modal_experiment(cfg, ctx);
  throw ConfigError("field 'experiment.kind': unknown experiment '" + kind + "'");
}

// Full run: resolved config, report and manifest written next to the data
// files.
inline int execute_run(const Config& cfg_in, RunContext ctx) {
  Config cfg = cfg_in;
  cfg.set("experiment.kind", cfg.get_string("experiment.kind"));
  cfg.set_int("experiment.seed", static_cast<long long>(ctx.seed));
  cfg.set_int("experiment.jobs", ctx.jobs);

  if (!ctx.dry_run) std::filesystem::create_directories(ctx.outdir);
  const auto t0 = std::chrono::steady_clock::now();
  Json rep = run_experiment(cfg, ctx);
  const auto t1 = std::chrono::steady_clock::now();
  if (ctx.dry_run) return 0;

  Json manifest = Json::object();
  manifest["kind"] = cfg.get_string("experiment.kind");
  manifest["seed"] = ctx.seed;
  manifest["jobs"] = static_cast<std::int64_t>(ctx.jobs);
  manifest["wall_ms"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
  manifest["library_version"] = "1.0.0";
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);

  detail::write_file(ctx.outdir / "report.json", rep.dump());
  detail::write_file(ctx.outdir / "resolved.cfg", cfg.serialize());
  detail::write_file(ctx.outdir / "manifest.json", manifest.dump());
  return 0;
}

}  // namespace gpc

#endif
