// lgest command-line harness: simulate / filter / batch / verify.
//
// Exit codes: 0 success, 1 verification failure, 2 input/validation/IO
// error, 3 numerical failure (certification loss mid-run).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "lgest/harness/commands.hpp"
#include "lgest/harness/config.hpp"
#include "lgest/harness/verify.hpp"

namespace {

using namespace lgest;
using namespace lgest::harness;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
};

ScenarioConfig load_config_with_overrides(const GlobalOpts& opts) {
  if (opts.config_path.empty()) {
    throw ConfigError("--config <path> is required for this command");
  }
  ScenarioConfig cfg = load_scenario_config(opts.config_path);
  if (opts.has_seed) cfg.master_seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.output_path = opts.out_dir;
  return cfg;
}

int run_simulate(const GlobalOpts& opts) {
  const ScenarioConfig cfg = load_config_with_overrides(opts);
  const auto written = cmd_simulate(cfg, cfg.output_path);
  std::printf("simulate: wrote %zu files to %s\n", written.size(),
              cfg.output_path.c_str());
  return 0;
}

int run_filter(const GlobalOpts& opts, const std::string& trajectory) {
  const ScenarioConfig cfg = load_config_with_overrides(opts);
  const FilterOutput out = cmd_filter(cfg, trajectory, cfg.output_path);
  if (cfg.filter_variant == FilterVariant::Both) {
    std::printf("filter: wrote %s (max variant deviation %s)\n",
                out.trace_path.c_str(),
                render_double(out.max_variant_dev).c_str());
  } else {
    std::printf("filter: wrote %s\n", out.trace_path.c_str());
  }
  return 0;
}

int run_batch(const GlobalOpts& opts, const std::string& manifest) {
  const std::string out_dir = opts.out_dir.empty() ? "out" : opts.out_dir;
  const std::string path = cmd_batch(manifest, out_dir);
  std::printf("batch: wrote %s\n", path.c_str());
  return 0;
}

int run_verify(const GlobalOpts& opts) {
  const ScenarioConfig cfg = load_config_with_overrides(opts);
  const ConsistencyReport report = lgest::harness::run_verify(cfg,
                                                              opts.tol_scale);
  const std::string path =
      write_verify_report(report, cfg, opts.tol_scale, cfg.output_path);
  for (const auto& c : report.identity_checks) {
    std::printf("%-24s residual %-12s tol %-8s %s\n", c.name.c_str(),
                render_double(c.residual).c_str(),
                render_double(c.tolerance).c_str(),
                c.passed ? "ok" : "FAIL");
    if (!c.detail.empty()) {
      std::printf("  %s\n", c.detail.c_str());
    }
  }
  std::printf("%-24s mean %-12s bounds [%s, %s] %s\n", "nees",
              render_double(report.mean_nees).c_str(),
              render_double(report.nees_bounds.lo).c_str(),
              render_double(report.nees_bounds.hi).c_str(),
              report.nees_passed ? "ok" : "FAIL");
  std::printf("%-24s mean %-12s bounds [%s, %s] %s\n", "nis",
              render_double(report.mean_nis).c_str(),
              render_double(report.nis_bounds.lo).c_str(),
              render_double(report.nis_bounds.hi).c_str(),
              report.nis_passed ? "ok" : "FAIL");
  std::printf("verify: wrote %s\n", path.c_str());
  if (!report.all_passed()) {
    std::fprintf(stderr, "verify: FAILED\n");
    return 1;
  }
  std::printf("verify: all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lgest: linear-Gaussian estimation and Kalman filter harness"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "Scenario config file (JSON)");
  app.add_option("--out", opts.out_dir,
                 "Output directory (overrides config output.path)");
  auto* seed_opt =
      app.add_option("--seed", opts.seed, "Master seed override (u64)");
  app.add_option("--tol-scale", opts.tol_scale,
                 "Multiplier applied to verification tolerances");

  auto* sim = app.add_subcommand(
      "simulate", "Sample Monte-Carlo trajectories and write CSVs");
  std::string trajectory;
  auto* filt = app.add_subcommand(
      "filter", "Run the configured filter over a trajectory CSV");
  filt->add_option("trajectory", trajectory, "Trajectory CSV from simulate")
      ->required();
  std::string manifest;
  auto* batch = app.add_subcommand(
      "batch", "Solve a batch estimation problem from a manifest");
  batch->add_option("manifest", manifest, "Manifest JSON naming W/Q/y[/R]")
      ->required();
  auto* verify = app.add_subcommand(
      "verify", "Run the identity suite and Monte-Carlo consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  opts.has_seed = seed_opt->count() > 0;

  try {
    if (sim->parsed()) return run_simulate(opts);
    if (filt->parsed()) return run_filter(opts, trajectory);
    if (batch->parsed()) return run_batch(opts, manifest);
    if (verify->parsed()) return run_verify(opts);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
