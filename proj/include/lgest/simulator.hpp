#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "lgest/batch.hpp"
#include "lgest/matrix.hpp"
#include "lgest/rng.hpp"
#include "lgest/spd.hpp"
#include "lgest/state_space.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Ground-truth generator for the linear-Gaussian model, plus an exact
// second-moment propagator that turns the stacked measurement history into a
// non-recursive minimum-variance problem (the cross-oracle for the filter).
// ---------------------------------------------------------------------------

/// One sampled realization of states x_0..x_K and measurements z_0..z_K.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> measurements;
  std::uint64_t seed = 0;       // master seed the substreams derive from
  std::uint64_t run_index = 0;  // substream index within the master seed
};

/// Exact joint second moments of (x_K, Z) with Z = stacked (z_0 .. z_K),
/// centered about the propagated means.
struct JointMoments {
  Matrix cov_x_z;    // n x m(K+1), blocks E[(x_K - x̄_K)(z_j - z̄_j)ᵀ]
  SpdMatrix cov_zz;  // m(K+1) square, blocks E[(z_i - z̄_i)(z_j - z̄_j)ᵀ]
  SpdMatrix cov_xx;  // n x n, E[(x_K - x̄_K)(x_K - x̄_K)ᵀ]
  Vector mean_x;     // x̄_K
  Vector mean_z;     // stacked (z̄_0 .. z̄_K)
};

/// Samples one trajectory. x_0, {u_k} and {w_k} come from three independent
/// substreams derived from (seed, run_index), so every draw sequence is
/// reproducible bit-for-bit and runs never share randomness.
inline Trajectory sample_trajectory(const StateSpaceModel& model,
                                    const Vector& x0_mean, const SpdMatrix& p0,
                                    std::size_t horizon, std::uint64_t seed,
                                    std::uint64_t run_index = 0) {
  model.require_coverage(horizon + 1);
  if (x0_mean.size() != model.n || p0.dim() != model.n) {
    throw DimensionMismatch("sample_trajectory: x0_mean dim " +
                            std::to_string(x0_mean.size()) + ", p0 " +
                            p0.matrix().shape_str() + ", model n=" +
                            std::to_string(model.n));
  }

  GaussianSampler init(
      derive_stream_seed(seed, run_index, stream_role::kInitialState));
  GaussianSampler process(
      derive_stream_seed(seed, run_index, stream_role::kProcessNoise));
  GaussianSampler measurement(
      derive_stream_seed(seed, run_index, stream_role::kMeasurementNoise));

  const Vector zero_n(model.n, 0.0);
  const Vector zero_m(model.m, 0.0);

  Trajectory t;
  t.seed = seed;
  t.run_index = run_index;
  t.states.reserve(horizon + 1);
  t.measurements.reserve(horizon + 1);

  Vector x = init.gaussian(x0_mean, p0);
  for (std::size_t k = 0; k <= horizon; ++k) {
    const StepModel step = model.at(k);
    t.states.push_back(x);
    t.measurements.push_back(step.h * x + measurement.gaussian(zero_m, step.r));
    if (k < horizon) {
      x = step.phi * x + process.gaussian(zero_n, step.q);
    }
  }
  return t;
}

/// Exact joint moments of (x_K, z_0..z_K) by linear covariance propagation:
///   Σ_{k+1} = Φ_k Σ_k Φ_kᵀ + Q_k, cross-blocks advanced by Φ_k.
/// No sampling; this is the analytic ground truth the sampler must match.
inline JointMoments propagate_moments(const StateSpaceModel& model,
                                      const Vector& x0_mean,
                                      const SpdMatrix& p0,
                                      std::size_t horizon) {
  model.require_coverage(horizon + 1);
  if (x0_mean.size() != model.n || p0.dim() != model.n) {
    throw DimensionMismatch("propagate_moments: x0_mean dim " +
                            std::to_string(x0_mean.size()) + ", p0 " +
                            p0.matrix().shape_str() + ", model n=" +
                            std::to_string(model.n));
  }
  const std::size_t n = model.n;
  const std::size_t m = model.m;
  const std::size_t stacked = m * (horizon + 1);
  if (stacked > 1000) {
    throw Error("propagate_moments: stacked measurement dimension " +
                std::to_string(stacked) + " exceeds 1000");
  }

  Vector mean = x0_mean;
  Matrix sigma = p0.matrix();          // cov of x_k
  std::vector<Matrix> cross;           // cross[j] = E[(x_k - x̄_k)(z_j - z̄_j)ᵀ]
  cross.reserve(horizon + 1);
  Matrix cov_zz(stacked, stacked, 0.0);
  Vector mean_z(stacked, 0.0);

  for (std::size_t k = 0; k <= horizon; ++k) {
    const StepModel step = model.at(k);
    // New measurement block: E[(x_k)(z_k)ᵀ] = Σ_k H_kᵀ.
    cross.push_back(sigma * step.h.transposed());
    const Vector zbar = step.h * mean;
    for (std::size_t i = 0; i < m; ++i) mean_z[k * m + i] = zbar[i];

    // Row k of cov_zz: E[z_k z_jᵀ] = H_k E[x_k z_jᵀ] for j < k,
    // and H_k Σ_k H_kᵀ + R_k on the diagonal.
    for (std::size_t j = 0; j < k; ++j) {
      const Matrix blk = step.h * cross[j];
      cov_zz.set_block(k * m, j * m, blk);
      cov_zz.set_block(j * m, k * m, blk.transposed());
    }
    cov_zz.set_block(k * m, k * m,
                     symmetrize(step.h * cross[k] + step.r.matrix()));

    if (k < horizon) {
      for (auto& c : cross) c = step.phi * c;
      sigma = symmetrize(step.phi * sigma * step.phi.transposed() +
                         step.q.matrix());
      mean = step.phi * mean;
    }
  }

  JointMoments out;
  out.cov_x_z = Matrix(n, stacked, 0.0);
  for (std::size_t j = 0; j <= horizon; ++j) {
    out.cov_x_z.set_block(0, j * m, cross[j]);
  }
  out.cov_zz = spd_check(cov_zz);
  out.cov_xx = psd_check(sigma);
  out.mean_x = std::move(mean);
  out.mean_z = std::move(mean_z);
  return out;
}

/// Non-recursive minimum-variance estimate of x_K from the stacked
/// measurement vector: x̂_K = x̄_K + K (Z - Z̄) with K = E[x Zᵀ](E[Z Zᵀ])⁻¹,
/// error covariance E[x xᵀ] - K E[Z xᵀ] (all moments centered).
inline BatchEstimate batch_oracle_estimate(const JointMoments& moments,
                                           const Vector& z_stacked) {
  if (z_stacked.size() != moments.cov_zz.dim()) {
    throw DimensionMismatch("batch_oracle_estimate: Z has dim " +
                            std::to_string(z_stacked.size()) +
                            ", moments expect " +
                            std::to_string(moments.cov_zz.dim()));
  }
  BatchEstimate e;
  e.gain = min_variance_gain(SecondMoments{moments.cov_x_z, moments.cov_zz});
  e.beta_hat = moments.mean_x + e.gain * (z_stacked - moments.mean_z);
  e.error_cov = psd_check(symmetrize(moments.cov_xx.matrix() -
                                     e.gain * moments.cov_x_z.transposed()));
  return e;
}

}  // namespace lgest
