#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "lgest/harness/commands.hpp"
#include "lgest/harness/config.hpp"
#include "lgest/harness/csv.hpp"
#include "lgest/harness/verify.hpp"

using namespace lgest;
using namespace lgest::harness;

namespace {

namespace fs = std::filesystem;

/// Fresh scratch directory for one test; wiped on entry so reruns are clean.
fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lgest_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_text(const fs::path& path, const std::string& text) {
  write_file(path.string(), text);
  return path;
}

fs::path write_json(const fs::path& path, const ordered_json& j) {
  return write_text(path, j.dump(2) + "\n");
}

/// Base scalar scenario the config tests mutate.
ordered_json scalar_config(double phi, double q, std::size_t horizon,
                           std::size_t runs, std::uint64_t seed) {
  ordered_json j;
  j["model"] = {{"n", 1},
                {"m", 1},
                {"phi", {{phi}}},
                {"h", {{1.0}}},
                {"q", {{q}}},
                {"r", {{1.0}}}};
  j["init"] = {{"x0_mean", {0.0}}, {"p0", {{1.0}}}};
  j["run"] = {{"horizon", horizon},
              {"master_seed", seed},
              {"monte_carlo_runs", runs},
              {"filter_variant", "both"},
              {"covariance_form", "standard"}};
  return j;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + LGEST_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

double reparse(const std::string& s) {
  return parse_double_field(s, "reparse");
}

bool same_bits(double a, double b) {
  std::uint64_t ba, bb;
  std::memcpy(&ba, &a, 8);
  std::memcpy(&bb, &b, 8);
  return ba == bb;
}

}  // namespace

TEST_CASE("shortest double rendering round-trips", "[harness]") {
  const double cases[] = {0.0,         -0.0,       1.0,
                          0.1,         1.0 / 3.0,  -2.5e-7,
                          1e300,       5e-324,     12345678.9,
                          0.3333333333333333, 6.62607015e-34};
  for (double v : cases) {
    CAPTURE(v);
    REQUIRE(same_bits(reparse(render_double(v)), v));
  }
  // Shortest form: plain values render without exponent noise.
  REQUIRE(render_double(1.0) == "1");
  REQUIRE(render_double(0.5) == "0.5");
  REQUIRE(render_double(-0.25) == "-0.25");
  REQUIRE(render_u64(0) == "0");
  REQUIRE(render_u64(18446744073709551615ULL) == "18446744073709551615");
}

TEST_CASE("csv split and field parsing", "[harness]") {
  REQUIRE(split_csv_line("a,b,c") ==
          std::vector<std::string>{"a", "b", "c"});
  REQUIRE(split_csv_line("a,") == std::vector<std::string>{"a", ""});
  REQUIRE(split_csv_line("") == std::vector<std::string>{});
  REQUIRE(parse_double_field("2.5", "t") == 2.5);
  REQUIRE_THROWS_AS(parse_double_field("2.5x", "t"), CsvError);
  REQUIRE_THROWS_AS(parse_double_field("", "t"), CsvError);
  REQUIRE_THROWS_MATCHES(parse_double_field("nope", "ctx"), CsvError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("ctx")));
}

TEST_CASE("csv writer and reader round trip", "[harness]") {
  const fs::path dir = scratch_dir("csv_round_trip");
  CsvBuilder b({"alpha", "beta"});
  b.add_row({1.0 / 3.0, -0.1});
  b.add_row({1e300, 5e-324});
  REQUIRE_THROWS_AS(b.add_row({1.0}), CsvError);

  const fs::path file = dir / "t.csv";
  write_file(file.string(), b.text());
  const CsvTable t = read_csv(file.string());
  REQUIRE(t.header == std::vector<std::string>{"alpha", "beta"});
  REQUIRE(t.num_rows() == 2);
  REQUIRE(same_bits(t.rows[0][0], 1.0 / 3.0));
  REQUIRE(same_bits(t.rows[0][1], -0.1));
  REQUIRE(same_bits(t.rows[1][0], 1e300));
  REQUIRE(same_bits(t.rows[1][1], 5e-324));
}

TEST_CASE("csv reader diagnostics carry file and line", "[harness]") {
  const fs::path dir = scratch_dir("csv_errors");
  REQUIRE_THROWS_AS(read_csv((dir / "missing.csv").string()), CsvError);

  const fs::path ragged = write_text(dir / "ragged.csv", "a,b\n1,2\n3\n");
  REQUIRE_THROWS_MATCHES(read_csv(ragged.string()), CsvError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring(":3")));

  const fs::path bad = write_text(dir / "bad.csv", "a\nnot_a_number\n");
  REQUIRE_THROWS_AS(read_csv(bad.string()), CsvError);
  const fs::path empty = write_text(dir / "empty.csv", "");
  REQUIRE_THROWS_AS(read_csv(empty.string()), CsvError);

  // Headerless matrix reader: rectangular only.
  const fs::path mat = write_text(dir / "m.csv", "1,2\r\n3,4\n\n");
  const Matrix m = read_csv_matrix(mat.string());
  REQUIRE(m == Matrix{{1.0, 2.0}, {3.0, 4.0}});
  const fs::path mr = write_text(dir / "mr.csv", "1,2\n3\n");
  REQUIRE_THROWS_AS(read_csv_matrix(mr.string()), CsvError);
}

TEST_CASE("scenario config loads with defaults and overrides", "[harness]") {
  const fs::path dir = scratch_dir("config_load");
  ordered_json j = scalar_config(0.9, 1.0, 20, 3, 77);
  j["output"] = {{"path", "custom_out"}};
  j["verify"] = {{"confidence", 0.95},
                 {"r_scale", 2.0},
                 {"identity_instances", 50},
                 {"probe_points", 7}};
  const fs::path cfg_path = write_json(dir / "cfg.json", j);

  const ScenarioConfig cfg = load_scenario_config(cfg_path.string());
  REQUIRE(cfg.model.n == 1);
  REQUIRE(cfg.model.m == 1);
  REQUIRE(cfg.model.phi.at(5)(0, 0) == 0.9);
  REQUIRE(cfg.horizon == 20);
  REQUIRE(cfg.master_seed == 77);
  REQUIRE(cfg.monte_carlo_runs == 3);
  REQUIRE(cfg.filter_variant == FilterVariant::Both);
  REQUIRE(cfg.covariance_form == CovarianceForm::Standard);
  REQUIRE(cfg.output_path == "custom_out");
  REQUIRE(cfg.verify.confidence == 0.95);
  REQUIRE(cfg.verify.r_scale == 2.0);
  REQUIRE(cfg.verify.identity_instances == 50);
  REQUIRE(cfg.verify.probe_points == 7);

  // Optional sections fall back to defaults.
  const fs::path bare_path =
      write_json(dir / "bare.json", scalar_config(1.0, 1.0, 5, 1, 1));
  const ScenarioConfig bare = load_scenario_config(bare_path.string());
  REQUIRE(bare.output_path == "out");
  REQUIRE(bare.verify.confidence == 0.99);
  REQUIRE(bare.verify.identity_instances == 1000);
}

TEST_CASE("config matrices can come from csv files and schedules",
          "[harness]") {
  const fs::path dir = scratch_dir("config_sources");
  write_text(dir / "phi.csv", "0.5\n");
  ordered_json j = scalar_config(1.0, 1.0, 2, 1, 1);
  j["model"]["phi"] = {{"csv", "phi.csv"}};
  j["model"]["h"] = {{"per_step", {{{1.0}}, {{2.0}}, {{3.0}}}}};
  const fs::path cfg_path = write_json(dir / "cfg.json", j);

  const ScenarioConfig cfg = load_scenario_config(cfg_path.string());
  REQUIRE(cfg.model.phi.at(0)(0, 0) == 0.5);
  REQUIRE(cfg.model.h.at(0)(0, 0) == 1.0);
  REQUIRE(cfg.model.h.at(2)(0, 0) == 3.0);

  // A per-step schedule shorter than horizon + 1 is rejected at load.
  ordered_json shortj = scalar_config(1.0, 1.0, 5, 1, 1);
  shortj["model"]["h"] = {{"per_step", {{{1.0}}, {{2.0}}}}};
  const fs::path short_path = write_json(dir / "short.json", shortj);
  REQUIRE_THROWS_MATCHES(load_scenario_config(short_path.string()),
                         ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("model:")));
}

TEST_CASE("config diagnostics name the offending field", "[harness]") {
  const fs::path dir = scratch_dir("config_errors");

  const auto expect_error = [&](ordered_json j, const std::string& needle,
                                const char* stem) {
    const fs::path p = write_json(dir / (std::string(stem) + ".json"), j);
    REQUIRE_THROWS_MATCHES(load_scenario_config(p.string()), ConfigError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring(needle)));
  };

  ordered_json miss_phi = scalar_config(1.0, 1.0, 5, 1, 1);
  miss_phi["model"].erase("phi");
  expect_error(miss_phi, "model.phi", "miss_phi");

  ordered_json bad_r = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_r["model"]["r"] = {{-1.0}};
  expect_error(bad_r, "model.r", "bad_r");

  ordered_json bad_dim = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_dim["model"]["phi"] = {{1.0, 0.0}, {0.0, 1.0}};
  expect_error(bad_dim, "model:", "bad_dim");

  ordered_json bad_x0 = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_x0["init"]["x0_mean"] = {0.0, 0.0};
  expect_error(bad_x0, "init.x0_mean", "bad_x0");

  ordered_json bad_h = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_h["run"]["horizon"] = 0;
  expect_error(bad_h, "run.horizon", "bad_h");

  ordered_json bad_var = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_var["run"]["filter_variant"] = "fancy";
  expect_error(bad_var, "run.filter_variant", "bad_var");

  ordered_json bad_conf = scalar_config(1.0, 1.0, 5, 1, 1);
  bad_conf["verify"] = {{"confidence", 1.5}};
  expect_error(bad_conf, "verify.confidence", "bad_conf");

  REQUIRE_THROWS_AS(load_scenario_config((dir / "absent.json").string()),
                    ConfigError);
  const fs::path mangled = write_text(dir / "mangled.json", "{not json");
  REQUIRE_THROWS_MATCHES(load_scenario_config(mangled.string()), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("mangled")));
}

TEST_CASE("model hash is stable and input-sensitive", "[harness]") {
  const fs::path dir = scratch_dir("model_hash");
  const ordered_json j = scalar_config(0.9, 1.0, 5, 1, 1);
  const ScenarioConfig a =
      load_scenario_config(write_json(dir / "a.json", j).string());
  const ScenarioConfig b =
      load_scenario_config(write_json(dir / "b.json", j).string());
  const std::string ha = model_hash(a.model, a.x0_mean, a.p0);
  REQUIRE(ha == model_hash(b.model, b.x0_mean, b.p0));
  REQUIRE(ha.size() == 16);

  ordered_json changed = j;
  changed["model"]["phi"] = {{0.9000000001}};
  const ScenarioConfig c =
      load_scenario_config(write_json(dir / "c.json", changed).string());
  REQUIRE(ha != model_hash(c.model, c.x0_mean, c.p0));

  // The seed is runtime state, not part of the model identity.
  ordered_json reseeded = j;
  reseeded["run"]["master_seed"] = 999;
  const ScenarioConfig d =
      load_scenario_config(write_json(dir / "d.json", reseeded).string());
  REQUIRE(ha == model_hash(d.model, d.x0_mean, d.p0));
}

TEST_CASE("simulate writes the documented layout deterministically",
          "[harness]") {
  const fs::path dir = scratch_dir("simulate_layout");
  ordered_json j = scalar_config(0.8, 0.5, 3, 2, 321);
  j["model"]["n"] = 2;
  j["model"]["phi"] = {{0.8, 0.1}, {0.0, 0.9}};
  j["model"]["h"] = {{1.0, 0.0}};
  j["model"]["q"] = {{0.5, 0.0}, {0.0, 0.5}};
  j["init"]["x0_mean"] = {0.0, 0.0};
  j["init"]["p0"] = {{1.0, 0.0}, {0.0, 1.0}};
  const ScenarioConfig cfg =
      load_scenario_config(write_json(dir / "cfg.json", j).string());

  const fs::path out_a = dir / "a";
  const auto written = cmd_simulate(cfg, out_a.string());
  REQUIRE(written.size() == 3);  // two runs + metadata
  REQUIRE(fs::exists(out_a / "trajectory_0000.csv"));
  REQUIRE(fs::exists(out_a / "trajectory_0001.csv"));
  REQUIRE(fs::exists(out_a / "metadata.json"));

  const CsvTable t = read_csv((out_a / "trajectory_0000.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"k", "x_0", "x_1", "z_0"});
  REQUIRE(t.num_rows() == 4);  // k = 0..horizon
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE(t.rows[k][0] == static_cast<double>(k));
  }

  const ordered_json meta =
      ordered_json::parse(slurp(out_a / "metadata.json"));
  REQUIRE(meta.at("command") == "simulate");
  REQUIRE(meta.at("generator") == kGeneratorId);
  REQUIRE(meta.at("master_seed") == 321);
  REQUIRE(meta.at("model_hash") == model_hash(cfg.model, cfg.x0_mean, cfg.p0));
  REQUIRE(meta.at("runs") == 2);
  REQUIRE(meta.at("horizon") == 3);
  REQUIRE(meta.at("files").size() == 2);

  // Same config, second directory: byte-identical artifacts.
  const fs::path out_b = dir / "b";
  cmd_simulate(cfg, out_b.string());
  REQUIRE(slurp(out_a / "trajectory_0000.csv") ==
          slurp(out_b / "trajectory_0000.csv"));
  REQUIRE(slurp(out_a / "trajectory_0001.csv") ==
          slurp(out_b / "trajectory_0001.csv"));
  REQUIRE(slurp(out_a / "metadata.json") == slurp(out_b / "metadata.json"));

  // Runs differ from each other (different substreams).
  REQUIRE(slurp(out_a / "trajectory_0000.csv") !=
          slurp(out_a / "trajectory_0001.csv"));
}

TEST_CASE("filter trace has the pinned schema and known variances",
          "[harness]") {
  const fs::path dir = scratch_dir("filter_trace");
  // Static scalar state observed through unit noise: textbook averaging.
  ordered_json j = scalar_config(1.0, 0.0, 9, 1, 5);
  const ScenarioConfig cfg =
      load_scenario_config(write_json(dir / "cfg.json", j).string());

  std::string csv = "k,x_0,z_0\n";
  for (int k = 0; k < 10; ++k) {
    csv += std::to_string(k) + ",0,1\n";
  }
  const fs::path traj = write_text(dir / "run.csv", csv);

  const FilterOutput out = cmd_filter(cfg, traj.string(), (dir / "o").string());
  REQUIRE(out.trace_path == (dir / "o" / "run_trace.csv").string());
  REQUIRE(out.max_variant_dev < 1e-12);

  const CsvTable t = read_csv(out.trace_path);
  REQUIRE(t.header ==
          std::vector<std::string>{
              "k", "xhat_pred_0", "P_pred_diag_0", "xhat_post_0",
              "P_post_diag_0", "innov_0", "S_diag_0", "gain_frobenius",
              "log_predictive", "variant_max_dev"});
  REQUIRE(t.num_rows() == 10);
  for (std::size_t k = 0; k < 10; ++k) {
    const double kk = static_cast<double>(k);
    REQUIRE(t.rows[k][0] == kk);
    REQUIRE(t.rows[k][2] == Catch::Approx(1.0 / (kk + 1.0)).epsilon(1e-12));
    REQUIRE(t.rows[k][4] == Catch::Approx(1.0 / (kk + 2.0)).epsilon(1e-12));
    REQUIRE(std::isfinite(t.rows[k][8]));
  }
  // All-ones data keeps the posterior mean on the sample mean: exactly 1
  // in the limit, k/(k+1) after k+1 observations from prior 0.
  REQUIRE(t.rows[9][3] ==
          Catch::Approx(10.0 / 11.0).epsilon(1e-12));

  // Re-running produces the identical trace, byte for byte.
  cmd_filter(cfg, traj.string(), (dir / "o2").string());
  REQUIRE(slurp(out.trace_path) == slurp(dir / "o2" / "run_trace.csv"));

  // Single-variant runs drop the deviation column.
  ordered_json pj = j;
  pj["run"]["filter_variant"] = "projection";
  const ScenarioConfig pcfg =
      load_scenario_config(write_json(dir / "p.json", pj).string());
  const FilterOutput pout =
      cmd_filter(pcfg, traj.string(), (dir / "po").string());
  const CsvTable pt = read_csv(pout.trace_path);
  REQUIRE(pt.header.back() == "log_predictive");
}

TEST_CASE("filter rejects trajectories that do not match the model",
          "[harness]") {
  const fs::path dir = scratch_dir("filter_reject");
  const ScenarioConfig cfg = load_scenario_config(
      write_json(dir / "cfg.json", scalar_config(1.0, 1.0, 5, 1, 5)).string());

  REQUIRE_THROWS_AS(
      cmd_filter(cfg, (dir / "missing.csv").string(), (dir / "o").string()),
      ConfigError);

  const fs::path wrong =
      write_text(dir / "wrong.csv", "k,x_0,x_1,z_0\n0,0,0,1\n");
  REQUIRE_THROWS_MATCHES(
      cmd_filter(cfg, wrong.string(), (dir / "o").string()), ConfigError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("columns")));

  const fs::path headers_only = write_text(dir / "empty.csv", "k,x_0,z_0\n");
  REQUIRE_THROWS_AS(
      cmd_filter(cfg, headers_only.string(), (dir / "o").string()),
      ConfigError);
  // Nothing was written on the failure paths.
  REQUIRE_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("batch command solves the bundled manifests", "[harness]") {
  const fs::path dir = scratch_dir("batch_cmd");
  const std::string examples = std::string(LGEST_CONFIG_DIR) +
                               "/batch_example";

  const std::string gm_out = (dir / "gm").string();
  const std::string path = cmd_batch(examples + "/manifest_gm.json", gm_out);
  const ordered_json gm = ordered_json::parse(slurp(path));
  REQUIRE(gm.at("command") == "batch");
  REQUIRE(gm.at("method") == "gauss_markov");
  REQUIRE(gm.at("beta_hat")[0].get<double>() == Catch::Approx(2.0));
  REQUIRE(gm.at("error_cov")[0][0].get<double>() == Catch::Approx(0.5));
  REQUIRE(gm.at("gain")[0][0].get<double>() == Catch::Approx(0.5));
  REQUIRE(gm.at("gain")[0][1].get<double>() == Catch::Approx(0.5));

  // The prior manifest carries a diffuse prior, so it lands near the same
  // answer and reports the cross-form residual.
  const std::string mv_out = (dir / "mv").string();
  const ordered_json mv = ordered_json::parse(
      slurp(cmd_batch(examples + "/manifest.json", mv_out)));
  REQUIRE(mv.at("method") == "min_variance_prior");
  REQUIRE(mv.at("beta_hat")[0].get<double>() == Catch::Approx(2.0).margin(1e-6));
  REQUIRE(mv.at("two_form_residual").get<double>() < 1e-6);
}

TEST_CASE("batch failures are diagnosed and leave no output", "[harness]") {
  const fs::path dir = scratch_dir("batch_fail");
  write_text(dir / "w.csv", "1\n1\n");
  write_text(dir / "q.csv", "1,0\n0,1\n");

  ordered_json manifest;
  manifest["w"] = "w.csv";
  manifest["q"] = "q.csv";
  const fs::path mpath = write_json(dir / "manifest.json", manifest);
  REQUIRE_THROWS_MATCHES(
      cmd_batch(mpath.string(), (dir / "o").string()), ConfigError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("y")));
  REQUIRE_FALSE(fs::exists(dir / "o" / "estimate.json"));

  // Rank-deficient designs are refused with a pointed diagnostic.
  write_text(dir / "w_flat.csv", "1,1\n1,1\n");
  write_text(dir / "y.csv", "1\n2\n");
  ordered_json flat;
  flat["w"] = "w_flat.csv";
  flat["q"] = "q.csv";
  flat["y"] = "y.csv";
  const fs::path fpath = write_json(dir / "flat.json", flat);
  REQUIRE_THROWS_MATCHES(
      cmd_batch(fpath.string(), (dir / "o").string()), ConfigError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("rank deficiency")));

  // y must be one column.
  ordered_json wide;
  wide["w"] = "w.csv";
  wide["q"] = "q.csv";
  wide["y"] = "q.csv";
  const fs::path wpath = write_json(dir / "wide.json", wide);
  REQUIRE_THROWS_MATCHES(
      cmd_batch(wpath.string(), (dir / "o").string()), ConfigError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("single-column")));
}

TEST_CASE("verify produces a complete report on a small scenario",
          "[harness]") {
  const fs::path dir = scratch_dir("verify_report");
  ordered_json j = scalar_config(0.5, 1.0, 15, 40, 11);
  j["verify"] = {{"identity_instances", 40}, {"probe_points", 10}};
  const ScenarioConfig cfg =
      load_scenario_config(write_json(dir / "cfg.json", j).string());

  const ConsistencyReport report = run_verify(cfg);
  REQUIRE(report.identity_checks.size() == 7);
  for (const auto& c : report.identity_checks) {
    CAPTURE(c.name, c.residual, c.tolerance, c.detail);
    REQUIRE(c.passed);
  }
  REQUIRE(report.nees_dof == 40.0 * 16.0);
  REQUIRE(report.nis_dof == 40.0 * 16.0);

  const std::string path =
      write_verify_report(report, cfg, 1.0, (dir / "o").string());
  const ordered_json r = ordered_json::parse(slurp(path));
  REQUIRE(r.at("command") == "verify");
  REQUIRE(r.at("master_seed") == 11);
  REQUIRE(r.at("confidence") == 0.99);
  REQUIRE(r.at("r_scale") == 1.0);
  REQUIRE(r.at("tol_scale") == 1.0);
  REQUIRE(r.at("monte_carlo_runs") == 40);
  REQUIRE(r.at("horizon") == 15);
  REQUIRE(r.at("rmse_per_component").size() == 1);
  for (const char* key : {"mean", "bounds", "dof", "passed"}) {
    REQUIRE(r.at("nees").contains(key));
    REQUIRE(r.at("nis").contains(key));
  }
  REQUIRE(r.at("identity_residuals").size() == 7);
  REQUIRE(r.at("checks").size() == 7);
  REQUIRE(r.at("passed").is_boolean());
}

TEST_CASE("cli exit codes separate failure classes", "[harness]") {
  const fs::path dir = scratch_dir("cli_exit");
  const std::string examples = std::string(LGEST_CONFIG_DIR) +
                               "/batch_example";

  // 0: clean runs.
  REQUIRE(run_cli("--help") == 0);
  REQUIRE(run_cli("batch \"" + examples + "/manifest_gm.json\" --out \"" +
                  (dir / "b").string() + "\"") == 0);

  // 2: usage and input problems.
  REQUIRE(run_cli("") == 2);                 // no subcommand
  REQUIRE(run_cli("simulate") == 2);         // --config missing
  REQUIRE(run_cli("simulate --config \"" + (dir / "absent.json").string() +
                  "\"") == 2);
  const fs::path mangled = write_text(dir / "mangled.json", "{oops");
  REQUIRE(run_cli("simulate --config \"" + mangled.string() + "\"") == 2);
  REQUIRE(run_cli("batch \"" + (dir / "absent_manifest.json").string() +
                  "\" --out \"" + (dir / "b2").string() + "\"") == 2);

  // Simulate a sane scalar run to drive the filter cases.
  const fs::path sane =
      write_json(dir / "sane.json", scalar_config(0.9, 0.2, 4, 1, 9));
  REQUIRE(run_cli("simulate --config \"" + sane.string() + "\" --out \"" +
                  (dir / "sim").string() + "\"") == 0);
  const std::string traj = (dir / "sim" / "trajectory_0000.csv").string();
  REQUIRE(run_cli("filter \"" + traj + "\" --config \"" + sane.string() +
                  "\" --out \"" + (dir / "f").string() + "\"") == 0);

  // 3: numerical blow-up mid-filter (dynamics overflow to non-finite).
  const fs::path blowup =
      write_json(dir / "blowup.json", scalar_config(1e200, 0.2, 4, 1, 9));
  REQUIRE(run_cli("filter \"" + traj + "\" --config \"" + blowup.string() +
                  "\" --out \"" + (dir / "f3").string() + "\"") == 3);

  // --seed overrides the config master seed in the metadata.
  REQUIRE(run_cli("simulate --config \"" + sane.string() + "\" --seed 123 " +
                  "--out \"" + (dir / "seeded").string() + "\"") == 0);
  const ordered_json meta =
      ordered_json::parse(slurp(dir / "seeded" / "metadata.json"));
  REQUIRE(meta.at("master_seed") == 123);
}

TEST_CASE("cli verify exit codes reflect the report", "[harness]") {
  const fs::path dir = scratch_dir("cli_verify");
  ordered_json j = scalar_config(0.5, 1.0, 15, 40, 11);
  j["verify"] = {{"identity_instances", 40}, {"probe_points", 10}};
  const fs::path cfg = write_json(dir / "cfg.json", j);

  REQUIRE(run_cli("verify --config \"" + cfg.string() + "\" --out \"" +
                  (dir / "v").string() + "\"") == 0);
  REQUIRE(fs::exists(dir / "v" / "report.json"));

  // Impossible tolerances force identity-check failure: exit 1, but the
  // report is still written for inspection.
  REQUIRE(run_cli("verify --config \"" + cfg.string() + "\" --tol-scale 1e-20"
                  " --out \"" + (dir / "v1").string() + "\"") == 1);
  const ordered_json failed =
      ordered_json::parse(slurp(dir / "v1" / "report.json"));
  REQUIRE(failed.at("passed") == false);
}
