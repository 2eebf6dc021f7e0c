#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lgest/bayes.hpp"
#include "lgest/harness/commands.hpp"
#include "lgest/harness/config.hpp"
#include "lgest/projection.hpp"
#include "lgest/random_instances.hpp"
#include "lgest/simulator.hpp"
#include "lgest/stats.hpp"

namespace lgest::harness {

/// One named check in the verify suite.
struct VerifyCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;  // set when the check itself failed to run
};

/// Everything `verify` measures; serialized to report.json.
struct ConsistencyReport {
  std::vector<double> rmse_per_component;
  double mean_nees = 0.0;
  ChiSquareInterval nees_bounds;
  double nees_dof = 0.0;
  bool nees_passed = false;
  double mean_nis = 0.0;
  ChiSquareInterval nis_bounds;
  double nis_dof = 0.0;
  bool nis_passed = false;
  std::vector<VerifyCheck> identity_checks;

  bool all_passed() const {
    if (!nees_passed || !nis_passed) return false;
    for (const auto& c : identity_checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

namespace detail {

/// Runs `body` as a named check; an exception is a failure, never a skip.
template <class Body>
VerifyCheck run_check(const std::string& name, double tolerance, Body&& body) {
  VerifyCheck check;
  check.name = name;
  check.tolerance = tolerance;
  try {
    check.residual = body();
    check.passed = check.residual <= tolerance;
  } catch (const std::exception& e) {
    check.residual = std::numeric_limits<double>::infinity();
    check.passed = false;
    check.detail = e.what();
  }
  return check;
}

/// Max relative deviation across the per-step filter outputs.
inline double step_deviation(const FilterStep& a, const FilterStep& b) {
  double dev = rel_deviation(to_column(a.x_pred), to_column(b.x_pred));
  dev = std::max(dev, rel_deviation(a.p_pred.matrix(), b.p_pred.matrix()));
  dev = std::max(dev, rel_deviation(to_column(a.x_post), to_column(b.x_post)));
  dev = std::max(dev, rel_deviation(a.p_post.matrix(), b.p_post.matrix()));
  return dev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Identity residuals over shared-recipe random instances. Each function
// returns the max residual over `count` instances drawn from `g`.
// ---------------------------------------------------------------------------

/// Gain form vs information form of the prior minimum-variance estimate.
inline double residual_two_form(Xoshiro256pp& g, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = random_dim(g, 1, 8);
    const std::size_t m = random_dim(g, 1, 8);
    const BatchProblem p = random_batch_problem(g, n, m, /*with_prior=*/true);
    const BatchEstimate a = min_variance_prior_gain(p);
    const BatchEstimate b = min_variance_prior_info(p);
    worst = std::max(worst, rel_deviation(to_column(a.beta_hat),
                                          to_column(b.beta_hat)));
    worst = std::max(worst,
                     rel_deviation(a.error_cov.matrix(), b.error_cov.matrix()));
  }
  return worst;
}

/// Projection recursion vs predict∘correct composition, per-step.
inline double residual_projection_vs_bayes(Xoshiro256pp& g, std::size_t models,
                                           std::size_t horizon) {
  double worst = 0.0;
  for (std::size_t i = 0; i < models; ++i) {
    const std::size_t n = random_dim(g, 1, 6);
    const std::size_t m = random_dim(g, 1, 6);
    const StateSpaceModel model = random_model(g, n, m);
    const Vector x0 = random_uniform_vector(g, n);
    const SpdMatrix p0 = random_spd(g, n);
    const Trajectory t =
        sample_trajectory(model, x0, p0, horizon, g.next(), 0);
    const std::vector<Vector> zs(t.measurements.begin(),
                                 t.measurements.end());
    const FilterTrace a = projection_filter_run(model, zs, x0, p0);
    const FilterTrace b = bayes_filter_run(model, zs, x0, p0);
    for (std::size_t k = 0; k < zs.size(); ++k) {
      worst = std::max(worst, detail::step_deviation(a.steps[k], b.steps[k]));
    }
  }
  return worst;
}

/// Woodbury: P - PHᵀ(HPHᵀ+R)⁻¹HP vs (P⁻¹ + HᵀR⁻¹H)⁻¹.
inline double residual_woodbury(Xoshiro256pp& g, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = random_dim(g, 1, 6);
    const std::size_t m = random_dim(g, 1, 6);
    const SpdMatrix p = random_spd(g, n);
    const Matrix h = random_uniform_matrix(g, m, n);
    const SpdMatrix r = random_spd(g, m);
    const SpdMatrix direct = woodbury_posterior_cov(p, h, r);
    const Matrix via_info = inverse_spd(information_matrix(p, h, r));
    worst = std::max(worst, rel_deviation(direct.matrix(), via_info));
  }
  return worst;
}

/// Gain duality: PHᵀ(HPHᵀ+R)⁻¹ vs (P⁻¹+HᵀR⁻¹H)⁻¹HᵀR⁻¹.
inline double residual_gain_duality(Xoshiro256pp& g, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = random_dim(g, 1, 6);
    const std::size_t m = random_dim(g, 1, 6);
    const SpdMatrix p = random_spd(g, n);
    const Matrix h = random_uniform_matrix(g, m, n);
    const SpdMatrix r = random_spd(g, m);
    const Matrix pht = p.matrix() * h.transposed();
    const SpdMatrix s = spd_check(symmetrize(h * pht + r.matrix()));
    const Matrix k1 = solve_spd(s, pht.transposed()).transposed();
    const Matrix p_post = woodbury_posterior_cov(p, h, r).matrix();
    const Matrix k2 = p_post * solve_spd(r, h).transposed();
    worst = std::max(worst, rel_deviation(k1, k2));
  }
  return worst;
}

/// log det(R+HPHᵀ) vs log det R + log det P + log det(P⁻¹+HᵀR⁻¹H).
inline double residual_determinant(Xoshiro256pp& g, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = random_dim(g, 1, 6);
    const std::size_t m = random_dim(g, 1, 6);
    const SpdMatrix p = random_spd(g, n);
    const Matrix h = random_uniform_matrix(g, m, n);
    const SpdMatrix r = random_spd(g, m);
    const LogDetSplit split = innovation_logdet_split(p, h, r);
    worst = std::max(worst, std::fabs(split.direct - split.split));
  }
  return worst;
}

/// Pointwise Gaussian product identity at random probe points.
inline double residual_product_decomposition(Xoshiro256pp& g,
                                             std::size_t instances,
                                             std::size_t probes) {
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = random_dim(g, 1, 6);
    const std::size_t m = random_dim(g, 1, 6);
    GaussianBelief prior{random_uniform_vector(g, n), random_spd(g, n)};
    const Matrix h = random_uniform_matrix(g, m, n);
    const SpdMatrix r = random_spd(g, m);
    for (std::size_t pb = 0; pb < probes; ++pb) {
      const Vector x = random_uniform_vector(g, n);
      const Vector z = random_uniform_vector(g, m);
      const ProductLogDensities d =
          gaussian_product_decompose(h, r, prior, z, x);
      worst = std::max(worst, std::fabs(d.gap()));
    }
  }
  return worst;
}

/// Stacked minimum-variance estimate vs recursive filter posterior.
inline double residual_batch_oracle(Xoshiro256pp& g, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = random_dim(g, 1, 4);
    const std::size_t m = random_dim(g, 1, 3);
    const std::size_t horizon = random_dim(g, 0, 10);
    const StateSpaceModel model = random_model(g, n, m);
    const Vector x0 = random_uniform_vector(g, n);
    const SpdMatrix p0 = random_spd(g, n);
    const Trajectory t =
        sample_trajectory(model, x0, p0, horizon, g.next(), 0);
    const std::vector<Vector> zs(t.measurements.begin(),
                                 t.measurements.end());
    const FilterTrace f = bayes_filter_run(model, zs, x0, p0);
    const JointMoments moments = propagate_moments(model, x0, p0, horizon);
    std::vector<double> stacked;
    stacked.reserve(m * (horizon + 1));
    for (const auto& z : t.measurements) {
      for (double v : z) stacked.push_back(v);
    }
    const BatchEstimate oracle =
        batch_oracle_estimate(moments, Vector(std::move(stacked)));
    const FilterStep& last = f.steps.back();
    worst = std::max(worst, rel_deviation(to_column(oracle.beta_hat),
                                          to_column(last.x_post)));
    worst = std::max(worst, rel_deviation(oracle.error_cov.matrix(),
                                          last.p_post.matrix()));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Monte-Carlo consistency statistics on the configured scenario.
// ---------------------------------------------------------------------------

/// Scales every R_k of `model` by `r_scale` (the filter's assumed model).
inline StateSpaceModel scale_measurement_noise(const StateSpaceModel& model,
                                               double r_scale) {
  if (r_scale == 1.0) return model;
  std::vector<SpdMatrix> scaled;
  scaled.reserve(model.r.items().size());
  for (const auto& r : model.r.items()) {
    scaled.push_back(spd_check(r.matrix() * r_scale));
  }
  Schedule<SpdMatrix> sched =
      model.r.is_constant() ? Schedule<SpdMatrix>::constant(scaled.front())
                            : Schedule<SpdMatrix>::per_step(std::move(scaled));
  return StateSpaceModel(model.n, model.m, model.phi, model.h, model.q,
                         std::move(sched));
}

struct ConsistencyStats {
  std::vector<double> rmse_per_component;
  double mean_nees = 0.0;
  double mean_nis = 0.0;
  double samples = 0.0;  // runs * (horizon + 1)
};

/// Simulates with the true model, filters with (possibly mis-specified)
/// filter_model, and accumulates NEES/NIS/RMSE over all runs and steps.
inline ConsistencyStats consistency_monte_carlo(const ScenarioConfig& cfg,
                                                double r_scale) {
  const StateSpaceModel filter_model =
      scale_measurement_noise(cfg.model, r_scale);
  const std::size_t n = cfg.model.n;

  std::vector<double> sq_err(n, 0.0);
  double nees_sum = 0.0;
  double nis_sum = 0.0;
  for (std::size_t run = 0; run < cfg.monte_carlo_runs; ++run) {
    const Trajectory t = sample_trajectory(cfg.model, cfg.x0_mean, cfg.p0,
                                           cfg.horizon, cfg.master_seed, run);
    GaussianBelief belief{cfg.x0_mean, cfg.p0};
    for (std::size_t k = 0; k <= cfg.horizon; ++k) {
      const StepModel step = filter_model.at(k);
      const CorrectionResult c =
          correct(belief, step.h, step.r, t.measurements[k],
                  cfg.covariance_form);
      const Vector err = t.states[k] - c.posterior.mean;
      for (std::size_t i = 0; i < n; ++i) sq_err[i] += err[i] * err[i];
      nees_sum += inv_quad(c.posterior.cov, err);
      nis_sum += inv_quad(c.innovation_cov, c.innovation);
      belief = predict(c.posterior, step.phi, step.q);
    }
  }

  ConsistencyStats stats;
  stats.samples = static_cast<double>(cfg.monte_carlo_runs) *
                  static_cast<double>(cfg.horizon + 1);
  stats.rmse_per_component.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    stats.rmse_per_component[i] = std::sqrt(sq_err[i] / stats.samples);
  }
  stats.mean_nees = nees_sum / stats.samples;
  stats.mean_nis = nis_sum / stats.samples;
  return stats;
}

// ---------------------------------------------------------------------------
// The verify command: identity suite + consistency statistics + report.
// ---------------------------------------------------------------------------
inline ConsistencyReport run_verify(const ScenarioConfig& cfg,
                                    double tol_scale = 1.0) {
  ConsistencyReport report;
  const std::size_t instances = cfg.verify.identity_instances;
  const std::size_t small =
      std::max<std::size_t>(10, instances / 10);  // for the costlier checks
  const std::size_t filter_models = std::max<std::size_t>(10, instances / 20);

  // Each check draws from its own substream, so adding or reordering checks
  // never perturbs another check's instances.
  std::uint64_t which = 0;
  auto fresh = [&]() {
    return Xoshiro256pp(derive_stream_seed(cfg.master_seed, which++,
                                           stream_role::kVerifyInstances));
  };

  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "two_form", 1e-9 * tol_scale,
        [&] { return residual_two_form(g, instances); }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "projection_vs_bayes", 1e-12 * tol_scale,
        [&] { return residual_projection_vs_bayes(g, filter_models, 50); }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "woodbury", 1e-10 * tol_scale,
        [&] { return residual_woodbury(g, instances); }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "gain_duality", 1e-10 * tol_scale,
        [&] { return residual_gain_duality(g, instances); }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "determinant", 1e-9 * tol_scale,
        [&] { return residual_determinant(g, instances); }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "product_decomposition", 1e-9 * tol_scale, [&] {
          return residual_product_decomposition(g, small,
                                                cfg.verify.probe_points);
        }));
  }
  {
    auto g = fresh();
    report.identity_checks.push_back(detail::run_check(
        "batch_oracle", 1e-8 * tol_scale,
        [&] { return residual_batch_oracle(g, small); }));
  }

  // NEES/NIS against chi-square bounds. The bounds are distribution
  // quantiles, not tolerances, so tol_scale does not apply.
  const ConsistencyStats stats =
      consistency_monte_carlo(cfg, cfg.verify.r_scale);
  report.rmse_per_component = stats.rmse_per_component;
  report.mean_nees = stats.mean_nees;
  report.mean_nis = stats.mean_nis;
  report.nees_dof = stats.samples * static_cast<double>(cfg.model.n);
  report.nis_dof = stats.samples * static_cast<double>(cfg.model.m);
  const ChiSquareInterval nees_iv =
      chi_square_interval(cfg.verify.confidence, report.nees_dof);
  const ChiSquareInterval nis_iv =
      chi_square_interval(cfg.verify.confidence, report.nis_dof);
  report.nees_bounds =
      ChiSquareInterval{nees_iv.lo / stats.samples, nees_iv.hi / stats.samples};
  report.nis_bounds =
      ChiSquareInterval{nis_iv.lo / stats.samples, nis_iv.hi / stats.samples};
  report.nees_passed = report.nees_bounds.contains(report.mean_nees);
  report.nis_passed = report.nis_bounds.contains(report.mean_nis);
  return report;
}

inline std::string write_verify_report(const ConsistencyReport& report,
                                       const ScenarioConfig& cfg,
                                       double tol_scale,
                                       const std::string& out_dir) {
  ordered_json j;
  j["command"] = "verify";
  j["master_seed"] = cfg.master_seed;
  j["confidence"] = cfg.verify.confidence;
  j["r_scale"] = cfg.verify.r_scale;
  j["tol_scale"] = tol_scale;
  j["monte_carlo_runs"] = cfg.monte_carlo_runs;
  j["horizon"] = cfg.horizon;

  ordered_json rmse = ordered_json::array();
  for (double v : report.rmse_per_component) rmse.push_back(v);
  j["rmse_per_component"] = std::move(rmse);

  j["nees"] = {{"mean", report.mean_nees},
               {"bounds", {report.nees_bounds.lo, report.nees_bounds.hi}},
               {"dof", report.nees_dof},
               {"passed", report.nees_passed}};
  j["nis"] = {{"mean", report.mean_nis},
              {"bounds", {report.nis_bounds.lo, report.nis_bounds.hi}},
              {"dof", report.nis_dof},
              {"passed", report.nis_passed}};

  ordered_json residuals;
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.identity_checks) {
    residuals[c.name] = c.residual;
    ordered_json jc;
    jc["name"] = c.name;
    jc["residual"] = c.residual;
    jc["tolerance"] = c.tolerance;
    jc["passed"] = c.passed;
    if (!c.detail.empty()) jc["detail"] = c.detail;
    checks.push_back(std::move(jc));
  }
  j["identity_residuals"] = std::move(residuals);
  j["checks"] = std::move(checks);
  j["passed"] = report.all_passed();

  ensure_dir(out_dir);
  const auto path = std::filesystem::path(out_dir) / "report.json";
  write_file(path.string(), j.dump(2) + "\n");
  return path.string();
}

}  // namespace lgest::harness
