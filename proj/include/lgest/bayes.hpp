#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lgest/gaussian.hpp"
#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"
#include "lgest/state_space.hpp"
#include "lgest/trace.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Bayesian form of the filter: an explicit predict/correct cycle on Gaussian
// beliefs. `correct` conditions on a measurement, `predict` pushes the belief
// through the dynamics. Chaining correct-then-predict reproduces the
// projection recursion exactly.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_measurement_dims(const GaussianBelief& belief,
                                   const Matrix& h, const SpdMatrix& r,
                                   const Vector& z, const char* where) {
  if (belief.mean.size() != belief.cov.dim()) {
    throw DimensionMismatch(std::string(where) + ": belief mean dim " +
                            std::to_string(belief.mean.size()) +
                            " vs cov " + belief.cov.matrix().shape_str());
  }
  if (h.cols() != belief.mean.size()) {
    throw DimensionMismatch(std::string(where) + ": h is " + h.shape_str() +
                            ", state dim " +
                            std::to_string(belief.mean.size()));
  }
  if (r.dim() != h.rows()) {
    throw DimensionMismatch(std::string(where) + ": r is " +
                            r.matrix().shape_str() + ", h is " +
                            h.shape_str());
  }
  if (z.size() != h.rows()) {
    throw DimensionMismatch(std::string(where) + ": z has dim " +
                            std::to_string(z.size()) + ", h is " +
                            h.shape_str());
  }
}

}  // namespace detail

/// Pushes N(x̂, P) through x' = Φx + u, u ~ N(0, Q):
/// mean Φx̂, covariance ΦPΦᵀ + Q.
inline GaussianBelief predict(const GaussianBelief& belief, const Matrix& phi,
                              const SpdMatrix& q) {
  if (phi.cols() != belief.mean.size() || q.dim() != phi.rows()) {
    throw DimensionMismatch("predict: phi is " + phi.shape_str() +
                            ", state dim " +
                            std::to_string(belief.mean.size()) + ", q is " +
                            q.matrix().shape_str());
  }
  GaussianBelief out;
  out.mean = phi * belief.mean;
  out.cov = psd_check(symmetrize(
      phi * belief.cov.matrix() * phi.transposed() + q.matrix()));
  return out;
}

/// Output of conditioning a belief on one measurement.
struct CorrectionResult {
  GaussianBelief posterior;
  Vector innovation;        // z - H x̂
  SpdMatrix innovation_cov; // S = H P Hᵀ + R
  Matrix gain;              // K = P Hᵀ S⁻¹
  double log_predictive = 0.0;  // log N(z; H x̂, S)
};

/// Conditions N(x̂, P) on z = Hx + w, w ~ N(0, R):
/// x̂⁺ = x̂ + K(z - Hx̂), P⁺ = (I - KH)P with K = PHᵀ(HPHᵀ + R)⁻¹.
inline CorrectionResult correct(const GaussianBelief& belief, const Matrix& h,
                                const SpdMatrix& r, const Vector& z,
                                CovarianceForm form = CovarianceForm::Standard) {
  detail::check_measurement_dims(belief, h, r, z, "correct");
  const Matrix& p = belief.cov.matrix();
  const Matrix pht = p * h.transposed();
  const SpdMatrix s = spd_check(symmetrize(h * pht + r.matrix()));
  const Vector hx = h * belief.mean;

  CorrectionResult out;
  out.innovation = z - hx;
  out.innovation_cov = s;
  out.gain = solve_spd(s, pht.transposed()).transposed();
  out.posterior.mean = belief.mean + out.gain * out.innovation;
  if (form == CovarianceForm::Joseph) {
    const Matrix j = Matrix::identity(p.rows()) - out.gain * h;
    out.posterior.cov = psd_check(symmetrize(
        j * p * j.transposed() + out.gain * r.matrix() * out.gain.transposed()));
  } else {
    out.posterior.cov =
        psd_check(symmetrize(p - out.gain * pht.transposed()));
  }
  out.log_predictive = log_gaussian_density(z, hx, s);
  return out;
}

/// P⁻¹ + HᵀR⁻¹H. Requires a strictly positive definite prior covariance.
inline SpdMatrix information_matrix(const SpdMatrix& p, const Matrix& h,
                                    const SpdMatrix& r) {
  if (p.singular()) {
    throw NotPositiveDefinite(
        "information_matrix: prior covariance must be strictly positive "
        "definite (it is singular)");
  }
  const Matrix p_inv = inverse_spd(p);
  const Matrix ri_h = solve_spd(r, h);  // R⁻¹ H
  return spd_check(symmetrize(p_inv + h.transposed() * ri_h));
}

/// Same posterior as `correct`, computed in information form:
/// P⁺ = (P⁻¹ + HᵀR⁻¹H)⁻¹, x̂⁺ = P⁺(P⁻¹x̂ + HᵀR⁻¹z),
/// with the dual gain K = P⁺HᵀR⁻¹.
inline CorrectionResult information_correct(const GaussianBelief& belief,
                                            const Matrix& h,
                                            const SpdMatrix& r,
                                            const Vector& z) {
  detail::check_measurement_dims(belief, h, r, z, "information_correct");
  if (belief.cov.singular()) {
    throw NotPositiveDefinite(
        "information_correct: prior covariance must be strictly positive "
        "definite (it is singular)");
  }
  const Matrix p_inv = inverse_spd(belief.cov);
  const Matrix ri_h = solve_spd(r, h);  // R⁻¹H
  const SpdMatrix info =
      spd_check(symmetrize(p_inv + h.transposed() * ri_h));
  const Vector rhs = p_inv * belief.mean + h.transposed() * solve_spd(r, z);

  CorrectionResult out;
  out.posterior.mean = solve_spd(info, rhs);
  out.posterior.cov = spd_check(symmetrize(inverse_spd(info)));
  const Vector hx = h * belief.mean;
  out.innovation = z - hx;
  out.innovation_cov = spd_check(symmetrize(
      h * (belief.cov.matrix() * h.transposed()) + r.matrix()));
  out.gain = out.posterior.cov.matrix() * ri_h.transposed();
  out.log_predictive = log_gaussian_density(z, hx, out.innovation_cov);
  return out;
}

/// The two factors of
///   N(z; Hx, R) · N(x; x̂, P) = N(z; Hx̂, S) · N(x; x̂⁺, P⁺),
/// i.e. the predictive marginal over z and the posterior over x. The identity
/// holds pointwise in (x, z), which is what makes the correction step exact.
struct ProductDecomposition {
  GaussianBelief marginal;   // N(Hx̂, HPHᵀ + R) over measurement space
  GaussianBelief posterior;  // N(x̂⁺, P⁺) over state space
};

inline ProductDecomposition product_decomposition_parts(
    const GaussianBelief& prior, const Matrix& h, const SpdMatrix& r,
    const Vector& z) {
  CorrectionResult c = correct(prior, h, r, z);
  ProductDecomposition out;
  out.marginal.mean = h * prior.mean;
  out.marginal.cov = std::move(c.innovation_cov);
  out.posterior = std::move(c.posterior);
  return out;
}

/// Both sides of the product identity evaluated at a probe state:
///   lhs = log[N(z; H x_probe, R) · N(x_probe; x̂, P)]
///   rhs = log[N(z; H x̂, S)       · N(x_probe; x̂⁺, P⁺)].
/// Equal for every (z, x_probe); the gap measures implementation error only.
struct ProductLogDensities {
  double lhs = 0.0;
  double rhs = 0.0;

  double gap() const { return lhs - rhs; }
};

inline ProductLogDensities gaussian_product_decompose(
    const Matrix& h, const SpdMatrix& r, const GaussianBelief& prior,
    const Vector& z, const Vector& x_probe) {
  const ProductDecomposition d = product_decomposition_parts(prior, h, r, z);
  ProductLogDensities out;
  out.lhs = log_gaussian_density(z, h * x_probe, r) +
            log_gaussian_density(x_probe, prior.mean, prior.cov);
  out.rhs = log_gaussian_density(z, d.marginal.mean, d.marginal.cov) +
            log_gaussian_density(x_probe, d.posterior.mean, d.posterior.cov);
  return out;
}

/// Both sides of log det(R + HPHᵀ) = log det R + log det P
///                                  + log det(P⁻¹ + HᵀR⁻¹H).
/// Requires strictly positive definite P and R.
struct LogDetSplit {
  double direct = 0.0;  // log det(R + HPHᵀ)
  double split = 0.0;   // log det R + log det P + log det(P⁻¹ + HᵀR⁻¹H)
};

inline LogDetSplit innovation_logdet_split(const SpdMatrix& p, const Matrix& h,
                                           const SpdMatrix& r) {
  if (p.singular() || r.singular()) {
    throw NotPositiveDefinite(
        "innovation_logdet_split: p and r must be strictly positive definite");
  }
  LogDetSplit out;
  const SpdMatrix s =
      spd_check(symmetrize(h * (p.matrix() * h.transposed()) + r.matrix()));
  out.direct = logdet(s);
  out.split = logdet(r) + logdet(p) + logdet(information_matrix(p, h, r));
  return out;
}

/// Runs the predict/correct cycle over z_0..z_{T-1} from the prior N(x0, p0).
/// Produces the same trace layout as projection_filter_run.
inline FilterTrace bayes_filter_run(const StateSpaceModel& model,
                                    const std::vector<Vector>& zs,
                                    const Vector& x0, const SpdMatrix& p0,
                                    CovarianceForm form = CovarianceForm::Standard) {
  if (zs.empty()) {
    throw EmptyMeasurementSequence("bayes_filter_run: no measurements");
  }
  model.require_coverage(zs.size());
  if (x0.size() != model.n || p0.dim() != model.n) {
    throw DimensionMismatch("bayes_filter_run: prior dim " +
                            std::to_string(x0.size()) + "/" +
                            std::to_string(p0.dim()) + ", model n=" +
                            std::to_string(model.n));
  }

  FilterTrace trace;
  trace.steps.reserve(zs.size());
  GaussianBelief belief{x0, p0};
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const StepModel step = model.at(k);
    CorrectionResult c = correct(belief, step.h, step.r, zs[k], form);

    FilterStep rec;
    rec.k = k;
    rec.x_pred = belief.mean;
    rec.p_pred = belief.cov;
    rec.innovation = std::move(c.innovation);
    rec.innovation_cov = std::move(c.innovation_cov);
    rec.gain = std::move(c.gain);
    rec.x_post = c.posterior.mean;
    rec.p_post = c.posterior.cov;
    rec.log_predictive = c.log_predictive;
    trace.steps.push_back(std::move(rec));

    belief = predict(c.posterior, step.phi, step.q);
  }
  trace.x_final_pred = std::move(belief.mean);
  trace.p_final_pred = std::move(belief.cov);
  return trace;
}

}  // namespace lgest
