#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lgest/bayes.hpp"
#include "lgest/harness/config.hpp"
#include "lgest/harness/csv.hpp"
#include "lgest/projection.hpp"
#include "lgest/rng.hpp"
#include "lgest/simulator.hpp"

namespace lgest::harness {

/// Certification loss or other numerical breakdown mid-run. Maps to exit 3.
struct NumericalError : Error {
  using Error::Error;
};

using ordered_json = nlohmann::ordered_json;

inline ordered_json vector_to_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline ordered_json matrix_to_json(const Matrix& m) {
  ordered_json a = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory '" + dir + "': " +
                ec.message());
  }
}

// ---------------------------------------------------------------------------
// simulate: one CSV per Monte-Carlo run plus a metadata sidecar.
// ---------------------------------------------------------------------------
inline std::vector<std::string> cmd_simulate(const ScenarioConfig& cfg,
                                             const std::string& out_dir) {
  ensure_dir(out_dir);

  std::vector<std::string> header{"k"};
  for (std::size_t i = 0; i < cfg.model.n; ++i) {
    header.push_back("x_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < cfg.model.m; ++i) {
    header.push_back("z_" + std::to_string(i));
  }

  std::vector<std::string> written;
  ordered_json files = ordered_json::array();
  for (std::size_t run = 0; run < cfg.monte_carlo_runs; ++run) {
    const Trajectory t = sample_trajectory(cfg.model, cfg.x0_mean, cfg.p0,
                                           cfg.horizon, cfg.master_seed, run);
    CsvBuilder csv(header);
    std::vector<double> row(header.size(), 0.0);
    for (std::size_t k = 0; k <= cfg.horizon; ++k) {
      row[0] = static_cast<double>(k);
      for (std::size_t i = 0; i < cfg.model.n; ++i) {
        row[1 + i] = t.states[k][i];
      }
      for (std::size_t i = 0; i < cfg.model.m; ++i) {
        row[1 + cfg.model.n + i] = t.measurements[k][i];
      }
      csv.add_row(row);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "trajectory_%04zu.csv", run);
    const auto path = std::filesystem::path(out_dir) / name;
    write_file(path.string(), csv.text());
    written.push_back(path.string());
    files.push_back(name);
  }

  ordered_json meta;
  meta["command"] = "simulate";
  meta["generator"] = kGeneratorId;
  meta["master_seed"] = cfg.master_seed;
  meta["model_hash"] = model_hash(cfg.model, cfg.x0_mean, cfg.p0);
  meta["runs"] = cfg.monte_carlo_runs;
  meta["horizon"] = cfg.horizon;
  meta["files"] = std::move(files);
  const auto meta_path = std::filesystem::path(out_dir) / "metadata.json";
  write_file(meta_path.string(), meta.dump(2) + "\n");
  written.push_back(meta_path.string());
  return written;
}

// ---------------------------------------------------------------------------
// filter: run the configured variant(s) over one trajectory file and write a
// per-step trace with a pinned column schema.
// ---------------------------------------------------------------------------
namespace detail {

/// Max relative deviation between the two variants' step outputs.
inline double variant_deviation(const FilterStep& a, const FilterStep& b) {
  double dev = rel_deviation(to_column(a.x_pred), to_column(b.x_pred));
  dev = std::max(dev, rel_deviation(a.p_pred.matrix(), b.p_pred.matrix()));
  dev = std::max(dev, rel_deviation(to_column(a.x_post), to_column(b.x_post)));
  dev = std::max(dev, rel_deviation(a.p_post.matrix(), b.p_post.matrix()));
  return dev;
}

}  // namespace detail

struct FilterOutput {
  std::string trace_path;
  double max_variant_dev = 0.0;  // only meaningful for variant = both
};

inline FilterOutput cmd_filter(const ScenarioConfig& cfg,
                               const std::string& trajectory_path,
                               const std::string& out_dir) {
  const std::size_t n = cfg.model.n;
  const std::size_t m = cfg.model.m;

  CsvTable table;
  try {
    table = read_csv(trajectory_path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::string> expect{"k"};
  for (std::size_t i = 0; i < n; ++i) expect.push_back("x_" + std::to_string(i));
  for (std::size_t i = 0; i < m; ++i) expect.push_back("z_" + std::to_string(i));
  if (table.header != expect) {
    throw ConfigError("trajectory '" + trajectory_path +
                      "': columns do not match the model dimensions (n=" +
                      std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  if (table.rows.empty()) {
    throw ConfigError("trajectory '" + trajectory_path + "' has no data rows");
  }

  std::vector<Vector> zs;
  zs.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Vector z(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) z[i] = row[1 + n + i];
    zs.push_back(std::move(z));
  }
  try {
    cfg.model.require_coverage(zs.size());
  } catch (const Error& e) {
    throw ConfigError(std::string("model schedules: ") + e.what());
  }

  const bool run_projection = cfg.filter_variant != FilterVariant::Bayes;
  const bool run_bayes = cfg.filter_variant != FilterVariant::Projection;
  const bool both = run_projection && run_bayes;

  std::vector<std::string> header{"k"};
  auto add_cols = [&header](const char* stem, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      header.push_back(std::string(stem) + "_" + std::to_string(i));
    }
  };
  add_cols("xhat_pred", n);
  add_cols("P_pred_diag", n);
  add_cols("xhat_post", n);
  add_cols("P_post_diag", n);
  add_cols("innov", m);
  add_cols("S_diag", m);
  header.push_back("gain_frobenius");
  header.push_back("log_predictive");
  if (both) header.push_back("variant_max_dev");

  CsvBuilder csv(header);
  FilterOutput out;

  ProjectionFilterState proj{0, cfg.x0_mean, cfg.p0};
  GaussianBelief belief{cfg.x0_mean, cfg.p0};
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const StepModel step = cfg.model.at(k);
    FilterStep rec;
    FilterStep alt;
    try {
      if (run_projection) {
        ProjectionStepDetail d =
            projection_step_detailed(proj, step, zs[k], cfg.covariance_form);
        rec = std::move(d.record);
        proj = std::move(d.next);
      }
      if (run_bayes) {
        CorrectionResult c =
            correct(belief, step.h, step.r, zs[k], cfg.covariance_form);
        FilterStep& target = run_projection ? alt : rec;
        target.k = k;
        target.x_pred = belief.mean;
        target.p_pred = belief.cov;
        target.innovation = std::move(c.innovation);
        target.innovation_cov = std::move(c.innovation_cov);
        target.gain = std::move(c.gain);
        target.x_post = c.posterior.mean;
        target.p_post = c.posterior.cov;
        target.log_predictive = c.log_predictive;
        belief = predict(c.posterior, step.phi, step.q);
      }
    } catch (const Error& e) {
      throw NumericalError("filter failed at step " + std::to_string(k) +
                           ": " + e.what());
    }

    std::vector<double> row;
    row.reserve(header.size());
    row.push_back(static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) row.push_back(rec.x_pred[i]);
    for (std::size_t i = 0; i < n; ++i) row.push_back(rec.p_pred(i, i));
    for (std::size_t i = 0; i < n; ++i) row.push_back(rec.x_post[i]);
    for (std::size_t i = 0; i < n; ++i) row.push_back(rec.p_post(i, i));
    for (std::size_t i = 0; i < m; ++i) row.push_back(rec.innovation[i]);
    for (std::size_t i = 0; i < m; ++i) row.push_back(rec.innovation_cov(i, i));
    row.push_back(rec.gain.frobenius());
    row.push_back(rec.log_predictive);
    if (both) {
      const double dev = detail::variant_deviation(rec, alt);
      out.max_variant_dev = std::max(out.max_variant_dev, dev);
      row.push_back(dev);
    }
    csv.add_row(row);
  }

  ensure_dir(out_dir);
  const std::string stem =
      std::filesystem::path(trajectory_path).stem().string();
  const auto path = std::filesystem::path(out_dir) / (stem + "_trace.csv");
  write_file(path.string(), csv.text());
  out.trace_path = path.string();
  return out;
}

// ---------------------------------------------------------------------------
// batch: solve one batch problem described by a manifest plus CSV blocks.
// ---------------------------------------------------------------------------
inline std::string cmd_batch(const std::string& manifest_path,
                             const std::string& out_dir) {
  const json manifest = cfg::load_json_file(manifest_path);
  const std::string base_dir =
      std::filesystem::path(manifest_path).parent_path().string();

  auto load_block = [&](const char* key) -> Matrix {
    const std::string rel =
        cfg::as_string(cfg::require(manifest, "", key), key);
    const auto full = std::filesystem::path(base_dir) / rel;
    try {
      return read_csv_matrix(full.string());
    } catch (const Error& e) {
      throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
  };

  Matrix w = load_block("w");
  Matrix q_raw = load_block("q");
  Matrix y_raw = load_block("y");
  if (y_raw.cols() != 1) {
    throw ConfigError("field 'y': must be a single-column CSV, got " +
                      y_raw.shape_str());
  }
  Vector y = y_raw.col(0);

  std::optional<Matrix> r_raw;
  if (manifest.contains("r")) {
    r_raw = load_block("r");
  }

  ordered_json result;
  result["command"] = "batch";
  try {
    SpdMatrix q = cfg::certify(q_raw, "q", /*allow_psd=*/false);
    BatchEstimate est;
    if (r_raw) {
      SpdMatrix r = cfg::certify(*r_raw, "r", /*allow_psd=*/false);
      BatchProblem problem(std::move(w), std::move(q), std::move(y),
                           std::move(r));
      est = min_variance_prior_gain(problem);
      const BatchEstimate info = min_variance_prior_info(problem);
      const double residual = std::max(
          rel_deviation(to_column(est.beta_hat), to_column(info.beta_hat)),
          rel_deviation(est.error_cov.matrix(), info.error_cov.matrix()));
      result["method"] = "min_variance_prior";
      result["two_form_residual"] = residual;
    } else {
      BatchProblem problem(std::move(w), std::move(q), std::move(y));
      est = gauss_markov(problem);
      result["method"] = "gauss_markov";
    }
    result["beta_hat"] = vector_to_json(est.beta_hat);
    result["error_cov"] = matrix_to_json(est.error_cov.matrix());
    result["gain"] = matrix_to_json(est.gain);
  } catch (const RankDeficient& e) {
    throw ConfigError(std::string("rank deficiency: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(std::string("dimension error: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw NumericalError(e.what());
  }

  ensure_dir(out_dir);
  const auto path = std::filesystem::path(out_dir) / "estimate.json";
  write_file(path.string(), result.dump(2) + "\n");
  return path.string();
}

}  // namespace lgest::harness
