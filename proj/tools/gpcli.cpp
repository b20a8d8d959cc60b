// Config-driven experiment runner: reproducible coupled-surrogate UQ runs,
// report comparison and experiment discovery.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gpc/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitThreshold = 4;

void write_error_json(const std::filesystem::path& outdir,
                      const std::string& category, const std::string& message) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) return;
  gpc::Json err = gpc::Json::object();
  err["error"] = category;
  err["message"] = message;
  std::ofstream f(outdir / "error.json");
  if (f) f << err.dump();
}

// Field-wise numeric diff of two parsed reports.
struct DiffStats {
  int compared = 0;
  int mismatched = 0;
  double max_abs_diff = 0.0;
  std::string worst_path;
};

void diff_json(const nlohmann::json& a, const nlohmann::json& b,
               const std::string& path, double tol, DiffStats& d) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string sub = path + "/" + it.key();
      if (!b.contains(it.key())) {
        ++d.mismatched;
        std::cout << "missing in B: " << sub << "\n";
        continue;
      }
      diff_json(it.value(), b.at(it.key()), sub, tol, d);
    }
    return;
  }
  if (a.is_array() && b.is_array()) {
    const std::size_t n = std::min(a.size(), b.size());
    if (a.size() != b.size()) {
      ++d.mismatched;
      std::cout << "array size differs at " << path << ": " << a.size()
                << " vs " << b.size() << "\n";
    }
    for (std::size_t i = 0; i < n; ++i)
      diff_json(a[i], b[i], path + "/" + std::to_string(i), tol, d);
    return;
  }
  if (a.is_number() && b.is_number()) {
    ++d.compared;
    const double diff = std::abs(a.get<double>() - b.get<double>());
    if (diff > d.max_abs_diff) {
      d.max_abs_diff = diff;
      d.worst_path = path;
    }
    if (diff > tol) {
      ++d.mismatched;
      std::cout.precision(17);
      std::cout << "diff at " << path << ": " << a.get<double>() << " vs "
                << b.get<double>() << " (|d|=" << diff << ")\n";
    }
    return;
  }
  ++d.compared;
  if (a != b) {
    ++d.mismatched;
    std::cout << "value differs at " << path << ": " << a.dump() << " vs "
              << b.dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled-surrogate uncertainty experiment runner"};
  app.require_subcommand(1);

  std::string config_path, outdir_flag;
  std::uint64_t seed_override = 0;
  bool have_seed = false, dry_run = false;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("-o,--output", outdir_flag, "output directory");
  auto* seed_opt = run->add_option("--seed", seed_override, "master seed override");
  run->add_option("--jobs", jobs, "worker threads for replications/rows")
      ->check(CLI::PositiveNumber);
  run->add_flag("--dry-run", dry_run, "validate the config, write nothing");

  std::string report_a, report_b;
  double tol = 0.0;
  auto* cmp = app.add_subcommand("compare", "field-wise diff of two reports");
  cmp->add_option("report_a", report_a)->required();
  cmp->add_option("report_b", report_b)->required();
  cmp->add_option("--tol", tol, "absolute tolerance for numeric fields");

  auto* list = app.add_subcommand("list-experiments", "show available kinds");

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;

  if (list->parsed()) {
    for (const auto& [kind, desc] : gpc::experiment_kinds())
      std::cout << kind << "\n    " << desc << "\n";
    return kExitOk;
  }

  if (cmp->parsed()) {
    try {
      nlohmann::json a, b;
      {
        std::ifstream fa(report_a), fb(report_b);
        if (!fa) throw gpc::ConfigError("cannot open report: " + report_a);
        if (!fb) throw gpc::ConfigError("cannot open report: " + report_b);
        fa >> a;
        fb >> b;
      }
      if (!a.contains("kind") || !b.contains("kind") || a["kind"] != b["kind"])
        throw gpc::ConfigError("reports have different kinds; not comparable");
      DiffStats d;
      diff_json(a, b, "", tol, d);
      std::cout << "compared " << d.compared << " fields, " << d.mismatched
                << " beyond tolerance; max |diff| = " << d.max_abs_diff;
      if (!d.worst_path.empty()) std::cout << " at " << d.worst_path;
      std::cout << "\n";
      return d.mismatched == 0 ? kExitOk : kExitThreshold;
    } catch (const gpc::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitNumerical;
    }
  }

  // run
  gpc::RunContext ctx;
  ctx.jobs = jobs;
  ctx.dry_run = dry_run;
  std::filesystem::path outdir;
  if (const char* env = std::getenv("GPC_OUTPUT_DIR"); env && *env)
    outdir = env;
  if (!outdir_flag.empty()) outdir = outdir_flag;
  if (outdir.empty()) outdir = "runs";

  try {
    gpc::Config cfg = gpc::Config::parse_file(config_path);
    ctx.seed = have_seed ? seed_override : cfg.get_seed("experiment.seed", 1);
    const std::string kind = cfg.get_string("experiment.kind");
    ctx.outdir = outdir / (kind + "-seed" + std::to_string(ctx.seed));
    return gpc::execute_run(cfg, ctx);
  } catch (const gpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    if (!dry_run) write_error_json(ctx.outdir.empty() ? outdir : ctx.outdir,
                                   "config", e.what());
    return kExitConfig;
  } catch (const gpc::AcceptanceError& e) {
    std::cerr << "threshold failure: " << e.what() << "\n";
    if (!dry_run) write_error_json(ctx.outdir, "threshold", e.what());
    return kExitThreshold;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    if (!dry_run) write_error_json(ctx.outdir, "numerical", e.what());
    return kExitNumerical;
  }
}
