#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lgest/harness/csv.hpp"
#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"
#include "lgest/state_space.hpp"

namespace lgest::harness {

using nlohmann::json;

/// Thrown for anything wrong with user input (parse errors, schema
/// violations, certification failures at load). Maps to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

enum class FilterVariant { Projection, Bayes, Both };

/// Settings for the `verify` command; all have defaults.
struct VerifySettings {
  double confidence = 0.99;
  double r_scale = 1.0;          // filter R multiplier (data keeps the true R)
  std::size_t identity_instances = 1000;
  std::size_t probe_points = 100;
};

/// Fully validated scenario: model and matrices are certified at load time.
struct ScenarioConfig {
  StateSpaceModel model;
  Vector x0_mean;
  SpdMatrix p0;
  std::size_t horizon = 1;
  std::uint64_t master_seed = 0;
  std::size_t monte_carlo_runs = 1;
  FilterVariant filter_variant = FilterVariant::Both;
  CovarianceForm covariance_form = CovarianceForm::Standard;
  std::string output_path;
  VerifySettings verify;
};

// ---------------------------------------------------------------------------
// FNV-1a hash over the exact bit patterns of the model, so metadata can tie
// outputs to the generating model across platforms.
// ---------------------------------------------------------------------------
class Fnv1a {
 public:
  void add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xFFu;
      h_ *= 0x100000001B3ull;
    }
  }

  void add_double(double v) { add_u64(std::bit_cast<std::uint64_t>(v)); }

  void add_matrix(const Matrix& m) {
    add_u64(m.rows());
    add_u64(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) add_double(m(i, j));
    }
  }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) {
      s[15 - i] = digits[(h_ >> (4 * i)) & 0xF];
    }
    return s;
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

inline std::string model_hash(const StateSpaceModel& model,
                              const Vector& x0_mean, const SpdMatrix& p0) {
  Fnv1a h;
  h.add_u64(model.n);
  h.add_u64(model.m);
  for (const auto& m : model.phi.items()) h.add_matrix(m);
  for (const auto& m : model.h.items()) h.add_matrix(m);
  for (const auto& m : model.q.items()) h.add_matrix(m.matrix());
  for (const auto& m : model.r.items()) h.add_matrix(m.matrix());
  for (double v : x0_mean) h.add_double(v);
  h.add_matrix(p0.matrix());
  return h.hex();
}

// ---------------------------------------------------------------------------
// JSON helpers that carry a dotted field path into every diagnostic.
// ---------------------------------------------------------------------------
namespace cfg {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline const json& require(const json& obj, const std::string& path,
                           const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing required field '" + path + "." + key + "'");
  }
  return obj.at(key);
}

inline double as_number(const json& node, const std::string& path) {
  if (!node.is_number()) {
    throw ConfigError("field '" + path + "' must be a number");
  }
  return node.get<double>();
}

inline std::size_t as_size(const json& node, const std::string& path) {
  if (!node.is_number_unsigned()) {
    throw ConfigError("field '" + path +
                      "' must be a non-negative integer");
  }
  return node.get<std::size_t>();
}

inline std::uint64_t as_u64(const json& node, const std::string& path) {
  if (!node.is_number_unsigned()) {
    throw ConfigError("field '" + path +
                      "' must be a non-negative integer");
  }
  return node.get<std::uint64_t>();
}

inline std::string as_string(const json& node, const std::string& path) {
  if (!node.is_string()) {
    throw ConfigError("field '" + path + "' must be a string");
  }
  return node.get<std::string>();
}

inline Vector as_vector(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) {
    throw ConfigError("field '" + path +
                      "' must be a non-empty array of numbers");
  }
  Vector v(node.size(), 0.0);
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[i] = as_number(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

/// Matrix literal: non-empty rectangular array of arrays of numbers.
inline Matrix as_matrix_literal(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty() || !node[0].is_array() ||
      node[0].empty()) {
    throw ConfigError("field '" + path +
                      "' must be a non-empty array of rows");
  }
  const std::size_t cols = node[0].size();
  Matrix m(node.size(), cols, 0.0);
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!node[i].is_array() || node[i].size() != cols) {
      throw ConfigError("field '" + row_path + "' must be a row of " +
                        std::to_string(cols) + " numbers");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = as_number(node[i][j], row_path + "[" + std::to_string(j) +
                                          "]");
    }
  }
  return m;
}

/// One matrix from a literal or a {"csv": "file"} reference.
inline Matrix as_matrix(const json& node, const std::string& path,
                        const std::string& base_dir) {
  if (node.is_object() && node.contains("csv")) {
    const std::string rel = as_string(node.at("csv"), path + ".csv");
    const auto full = std::filesystem::path(base_dir) / rel;
    try {
      return read_csv_matrix(full.string());
    } catch (const Error& e) {
      throw ConfigError("field '" + path + "': " + e.what());
    }
  }
  return as_matrix_literal(node, path);
}

/// Schedule forms: matrix literal, {"csv": ...}, or {"per_step": [...]}.
inline Schedule<Matrix> as_matrix_schedule(const json& node,
                                           const std::string& path,
                                           const std::string& base_dir) {
  if (node.is_object() && node.contains("per_step")) {
    const json& list = node.at("per_step");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("field '" + path +
                        ".per_step' must be a non-empty array");
    }
    std::vector<Matrix> items;
    items.reserve(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
      items.push_back(as_matrix(list[k],
                                path + ".per_step[" + std::to_string(k) + "]",
                                base_dir));
    }
    return Schedule<Matrix>::per_step(std::move(items));
  }
  return Schedule<Matrix>::constant(as_matrix(node, path, base_dir));
}

inline SpdMatrix certify(const Matrix& m, const std::string& path,
                         bool allow_psd) {
  try {
    return allow_psd ? psd_check(m) : spd_check(m);
  } catch (const Error& e) {
    throw ConfigError("field '" + path + "': " + e.what());
  }
}

inline Schedule<SpdMatrix> as_spd_schedule(const json& node,
                                           const std::string& path,
                                           const std::string& base_dir,
                                           bool allow_psd) {
  if (node.is_object() && node.contains("per_step")) {
    const json& list = node.at("per_step");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("field '" + path +
                        ".per_step' must be a non-empty array");
    }
    std::vector<SpdMatrix> items;
    items.reserve(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = path + ".per_step[" + std::to_string(k) + "]";
      items.push_back(certify(as_matrix(list[k], p, base_dir), p, allow_psd));
    }
    return Schedule<SpdMatrix>::per_step(std::move(items));
  }
  return Schedule<SpdMatrix>::constant(
      certify(as_matrix(node, path, base_dir), path, allow_psd));
}

}  // namespace cfg

inline FilterVariant parse_variant(const std::string& s,
                                   const std::string& path) {
  if (s == "projection") return FilterVariant::Projection;
  if (s == "bayes") return FilterVariant::Bayes;
  if (s == "both") return FilterVariant::Both;
  throw ConfigError("field '" + path +
                    "' must be one of projection | bayes | both");
}

inline CovarianceForm parse_form(const std::string& s,
                                 const std::string& path) {
  if (s == "standard") return CovarianceForm::Standard;
  if (s == "joseph") return CovarianceForm::Joseph;
  throw ConfigError("field '" + path + "' must be standard | joseph");
}

/// Loads and fully validates a scenario config. Every matrix is certified
/// here, so commands can assume a well-formed model.
inline ScenarioConfig load_scenario_config(const std::string& path) {
  const json root = cfg::load_json_file(path);
  const std::string base_dir =
      std::filesystem::path(path).parent_path().string();

  const json& jmodel = cfg::require(root, "", "model");
  const std::size_t n = cfg::as_size(cfg::require(jmodel, "model", "n"),
                                     "model.n");
  const std::size_t m = cfg::as_size(cfg::require(jmodel, "model", "m"),
                                     "model.m");
  if (n == 0 || m == 0) {
    throw ConfigError("model.n and model.m must be positive");
  }

  auto phi = cfg::as_matrix_schedule(cfg::require(jmodel, "model", "phi"),
                                     "model.phi", base_dir);
  auto h = cfg::as_matrix_schedule(cfg::require(jmodel, "model", "h"),
                                   "model.h", base_dir);
  auto q = cfg::as_spd_schedule(cfg::require(jmodel, "model", "q"), "model.q",
                                base_dir, /*allow_psd=*/true);
  auto r = cfg::as_spd_schedule(cfg::require(jmodel, "model", "r"), "model.r",
                                base_dir, /*allow_psd=*/false);

  const json& jinit = cfg::require(root, "", "init");
  Vector x0_mean =
      cfg::as_vector(cfg::require(jinit, "init", "x0_mean"), "init.x0_mean");
  SpdMatrix p0 = cfg::certify(
      cfg::as_matrix(cfg::require(jinit, "init", "p0"), "init.p0", base_dir),
      "init.p0", /*allow_psd=*/true);

  const json& jrun = cfg::require(root, "", "run");
  const std::size_t horizon =
      cfg::as_size(cfg::require(jrun, "run", "horizon"), "run.horizon");
  if (horizon < 1) {
    throw ConfigError("run.horizon must be >= 1");
  }
  const std::uint64_t master_seed =
      cfg::as_u64(cfg::require(jrun, "run", "master_seed"), "run.master_seed");
  std::size_t runs = 1;
  if (jrun.contains("monte_carlo_runs")) {
    runs = cfg::as_size(jrun.at("monte_carlo_runs"), "run.monte_carlo_runs");
    if (runs < 1) {
      throw ConfigError("run.monte_carlo_runs must be >= 1");
    }
  }
  FilterVariant variant = FilterVariant::Both;
  if (jrun.contains("filter_variant")) {
    variant = parse_variant(
        cfg::as_string(jrun.at("filter_variant"), "run.filter_variant"),
        "run.filter_variant");
  }
  CovarianceForm form = CovarianceForm::Standard;
  if (jrun.contains("covariance_form")) {
    form = parse_form(
        cfg::as_string(jrun.at("covariance_form"), "run.covariance_form"),
        "run.covariance_form");
  }

  std::string output_path = "out";
  if (root.contains("output")) {
    const json& jout = root.at("output");
    if (jout.contains("path")) {
      output_path = cfg::as_string(jout.at("path"), "output.path");
    }
  }

  VerifySettings verify;
  if (root.contains("verify")) {
    const json& jv = root.at("verify");
    if (jv.contains("confidence")) {
      verify.confidence = cfg::as_number(jv.at("confidence"),
                                         "verify.confidence");
      if (!(verify.confidence > 0.0) || !(verify.confidence < 1.0)) {
        throw ConfigError("verify.confidence must be in (0, 1)");
      }
    }
    if (jv.contains("r_scale")) {
      verify.r_scale = cfg::as_number(jv.at("r_scale"), "verify.r_scale");
      if (!(verify.r_scale > 0.0)) {
        throw ConfigError("verify.r_scale must be positive");
      }
    }
    if (jv.contains("identity_instances")) {
      verify.identity_instances = cfg::as_size(jv.at("identity_instances"),
                                               "verify.identity_instances");
    }
    if (jv.contains("probe_points")) {
      verify.probe_points =
          cfg::as_size(jv.at("probe_points"), "verify.probe_points");
    }
  }

  // The model ctor checks every schedule entry against the declared (n, m);
  // surface any mismatch as a config diagnostic.
  auto model = [&]() -> StateSpaceModel {
    try {
      StateSpaceModel built(n, m, std::move(phi), std::move(h), std::move(q),
                            std::move(r));
      built.require_coverage(horizon + 1);
      return built;
    } catch (const Error& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  }();
  if (x0_mean.size() != n || p0.dim() != n) {
    throw ConfigError("init.x0_mean/init.p0 must have dimension model.n");
  }

  return ScenarioConfig{std::move(model),
                        std::move(x0_mean),
                        std::move(p0),
                        horizon,
                        master_seed,
                        runs,
                        variant,
                        form,
                        std::move(output_path),
                        verify};
}

}  // namespace lgest::harness
