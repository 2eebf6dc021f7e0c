#pragma once

#include <string>
#include <utility>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Projection-based measurement update: fold a new measurement block
// y = W beta + eps into an existing estimate (mean, cov). The incoming noise
// must be zero-mean and uncorrelated with beta and with the past
// measurements; that is a modeling assumption, not something checked here.
// ---------------------------------------------------------------------------

struct PriorEstimate {
  Vector mean;    // n
  SpdMatrix cov;  // n x n error covariance of mean
};

struct MeasurementBlock {
  Matrix w;     // m x n
  SpdMatrix q;  // m x m block noise covariance
  Vector y;     // m

  MeasurementBlock(Matrix w_in, SpdMatrix q_in, Vector y_in)
      : w(std::move(w_in)), q(std::move(q_in)), y(std::move(y_in)) {
    if (q.dim() != w.rows() || y.size() != w.rows()) {
      throw DimensionMismatch("MeasurementBlock: W is " + w.shape_str() +
                              ", Q dim " + std::to_string(q.dim()) +
                              ", y length " + std::to_string(y.size()));
    }
  }
};

namespace detail {

inline void check_block(const PriorEstimate& prior,
                        const MeasurementBlock& blk, const char* op) {
  if (blk.w.cols() != prior.mean.size() ||
      prior.cov.dim() != prior.mean.size()) {
    throw DimensionMismatch(std::string(op) + ": block W is " +
                            blk.w.shape_str() + ", prior dim " +
                            std::to_string(prior.mean.size()));
  }
}

}  // namespace detail

/// y - W mean: the part of the new data not predicted by the old estimate.
inline Vector innovation(const PriorEstimate& prior,
                         const MeasurementBlock& blk) {
  detail::check_block(prior, blk, "innovation");
  return blk.y - blk.w * prior.mean;
}

/// W cov W^T + Q, certified SPD.
inline SpdMatrix innovation_covariance(const PriorEstimate& prior,
                                       const MeasurementBlock& blk) {
  detail::check_block(prior, blk, "innovation_covariance");
  return spd_check(
      symmetrize(blk.w * prior.cov.matrix() * blk.w.transposed() +
                 blk.q.matrix()));
}

// ---------------------------------------------------------------------------
// The update itself:
//   mean' = mean + cov W^T (W cov W^T + Q)^{-1} (y - W mean)
//   cov'  = cov - cov W^T (W cov W^T + Q)^{-1} W cov
// One factorization of the innovation covariance serves both lines. The
// Joseph variant (I-KW) cov (I-KW)^T + K Q K^T is equivalent algebra with
// better PSD retention over long runs.
// ---------------------------------------------------------------------------
inline PriorEstimate update(const PriorEstimate& prior,
                            const MeasurementBlock& blk,
                            CovarianceForm form = CovarianceForm::Standard) {
  detail::check_block(prior, blk, "update");
  const std::size_t n = prior.mean.size();
  const Matrix gwt = prior.cov.matrix() * blk.w.transposed();  // n x m
  const SpdMatrix s =
      spd_check(symmetrize(blk.w * gwt + blk.q.matrix()));

  PriorEstimate out;
  out.mean = prior.mean + gwt * solve_spd(s, blk.y - blk.w * prior.mean);
  if (form == CovarianceForm::Standard) {
    const Matrix x = solve_spd(s, gwt.transposed());  // S^{-1} W cov
    out.cov = psd_check(symmetrize(prior.cov.matrix() - gwt * x));
  } else {
    const Matrix k = solve_spd(s, gwt.transposed()).transposed();
    const Matrix j = Matrix::identity(n) - k * blk.w;
    out.cov = psd_check(symmetrize(j * prior.cov.matrix() * j.transposed() +
                                   k * blk.q.matrix() * k.transposed()));
  }
  return out;
}

}  // namespace lgest
