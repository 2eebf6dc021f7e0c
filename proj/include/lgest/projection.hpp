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
// Projection-form filter. Each step maps the one-step-ahead predicted
// estimate (x̂_{k|k-1}, P_{k|k-1}) directly to (x̂_{k+1|k}, P_{k+1|k}):
//
//   x̂_{k+1|k} = Φ_k x̂_{k|k-1}
//             + Φ_k P_{k|k-1} H_kᵀ [H_k P_{k|k-1} H_kᵀ + R_k]⁻¹ (z_k - H_k x̂_{k|k-1})
//   P_{k+1|k} = Φ_k P_{k|k-1} {I - H_kᵀ [H_k P_{k|k-1} H_kᵀ + R_k]⁻¹ H_k P_{k|k-1}} Φ_kᵀ
//             + Q_k
//
// The covariance recursion never reads z_k, so the whole P sequence can be
// computed before any data arrives.
// ---------------------------------------------------------------------------

struct ProjectionFilterState {
  std::size_t k = 0;   // next measurement index to absorb
  Vector x_pred;       // x̂_{k|k-1}
  SpdMatrix p_pred;    // P_{k|k-1}
};

/// One projection step plus the intermediate posterior quantities.
struct ProjectionStepDetail {
  ProjectionFilterState next;
  FilterStep record;
};

inline ProjectionStepDetail projection_step_detailed(
    const ProjectionFilterState& state, const StepModel& model,
    const Vector& z, CovarianceForm form = CovarianceForm::Standard) {
  const Matrix& phi = model.phi;
  const Matrix& h = model.h;
  const Matrix& p = state.p_pred.matrix();
  const std::size_t n = phi.rows();
  const std::size_t m = h.rows();
  if (state.x_pred.size() != n || p.rows() != n) {
    throw DimensionMismatch("projection_step: state dim " +
                            std::to_string(state.x_pred.size()) +
                            " does not match phi " + phi.shape_str());
  }
  if (z.size() != m) {
    throw DimensionMismatch("projection_step: z has dim " +
                            std::to_string(z.size()) + ", h is " +
                            h.shape_str());
  }

  const Matrix pht = p * h.transposed();                       // P Hᵀ
  const SpdMatrix s = spd_check(symmetrize(h * pht + model.r.matrix()));
  const Vector hx = h * state.x_pred;
  const Vector innovation = z - hx;
  const Vector sv = solve_spd(s, innovation);                  // S⁻¹ ν
  const Matrix x = solve_spd(s, pht.transposed());             // S⁻¹ H P
  const Matrix gain = x.transposed();                          // P Hᵀ S⁻¹

  FilterStep rec;
  rec.k = state.k;
  rec.x_pred = state.x_pred;
  rec.p_pred = state.p_pred;
  rec.innovation = innovation;
  rec.innovation_cov = s;
  rec.gain = gain;
  rec.x_post = state.x_pred + pht * sv;
  if (form == CovarianceForm::Joseph) {
    const Matrix j = Matrix::identity(n) - gain * h;
    rec.p_post = psd_check(symmetrize(j * p * j.transposed() +
                                      gain * model.r.matrix() *
                                          gain.transposed()));
  } else {
    rec.p_post = psd_check(symmetrize(p - pht * x));
  }
  rec.log_predictive = log_gaussian_density(z, hx, s);

  ProjectionFilterState next;
  next.k = state.k + 1;
  // Mean recursion, literally gain-times-innovation about the propagated mean.
  next.x_pred = phi * state.x_pred + (phi * pht) * sv;
  if (form == CovarianceForm::Joseph) {
    next.p_pred = psd_check(symmetrize(
        phi * rec.p_post.matrix() * phi.transposed() + model.q.matrix()));
  } else {
    // Literal covariance recursion: Φ P {I - Hᵀ S⁻¹ H P} Φᵀ + Q.
    const Matrix inner = Matrix::identity(n) - h.transposed() * x;
    next.p_pred = psd_check(symmetrize(phi * p * inner * phi.transposed() +
                                       model.q.matrix()));
  }
  return ProjectionStepDetail{std::move(next), std::move(rec)};
}

inline ProjectionFilterState projection_step(
    const ProjectionFilterState& state, const StepModel& model,
    const Vector& z, CovarianceForm form = CovarianceForm::Standard) {
  return projection_step_detailed(state, model, z, form).next;
}

/// Runs the projection filter over z_0..z_{T-1} from the prior N(x0, p0).
inline FilterTrace projection_filter_run(
    const StateSpaceModel& model, const std::vector<Vector>& zs,
    const Vector& x0, const SpdMatrix& p0,
    CovarianceForm form = CovarianceForm::Standard) {
  if (zs.empty()) {
    throw EmptyMeasurementSequence("projection_filter_run: no measurements");
  }
  model.require_coverage(zs.size());
  if (x0.size() != model.n || p0.dim() != model.n) {
    throw DimensionMismatch("projection_filter_run: prior dim " +
                            std::to_string(x0.size()) + "/" +
                            std::to_string(p0.dim()) + ", model n=" +
                            std::to_string(model.n));
  }

  FilterTrace trace;
  trace.steps.reserve(zs.size());
  ProjectionFilterState state{0, x0, p0};
  for (std::size_t k = 0; k < zs.size(); ++k) {
    ProjectionStepDetail d =
        projection_step_detailed(state, model.at(k), zs[k], form);
    trace.steps.push_back(std::move(d.record));
    state = std::move(d.next);
  }
  trace.x_final_pred = std::move(state.x_pred);
  trace.p_final_pred = std::move(state.p_pred);
  return trace;
}

}  // namespace lgest
