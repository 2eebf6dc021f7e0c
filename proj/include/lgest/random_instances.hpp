#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "lgest/batch.hpp"
#include "lgest/matrix.hpp"
#include "lgest/rng.hpp"
#include "lgest/spd.hpp"
#include "lgest/state_space.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// One shared recipe for random test instances, so the unit tests, the verify
// suite and the acceptance checks all draw from the same family of
// well-conditioned problems.
// ---------------------------------------------------------------------------

/// Integer uniform in [lo, hi] (inclusive). Modulo bias is irrelevant here.
inline std::size_t random_dim(Xoshiro256pp& g, std::size_t lo,
                              std::size_t hi) {
  return lo + static_cast<std::size_t>(g.next() % (hi - lo + 1));
}

/// Matrix with entries uniform in (-1, 1].
inline Matrix random_uniform_matrix(Xoshiro256pp& g, std::size_t rows,
                                    std::size_t cols) {
  Matrix m(rows, cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = 2.0 * g.next_unit() - 1.0;
    }
  }
  return m;
}

inline Vector random_uniform_vector(Xoshiro256pp& g, std::size_t n) {
  Vector v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = 2.0 * g.next_unit() - 1.0;
  return v;
}

/// Well-conditioned SPD matrix: A Aᵀ + n·I with U(-1,1] entries, rescaled so
/// the diagonal averages 1. Eigenvalues stay within a few decades of 1.
inline SpdMatrix random_spd(Xoshiro256pp& g, std::size_t n) {
  const Matrix a = random_uniform_matrix(g, n, n);
  Matrix m = a * a.transposed();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) += static_cast<double>(n);
  }
  const double scale = static_cast<double>(n) / m.trace();
  return spd_check(symmetrize(m * scale));
}

/// Random PSD matrix of rank `rank` (defaults to full): B Bᵀ with B n×rank.
inline SpdMatrix random_psd(Xoshiro256pp& g, std::size_t n,
                            std::size_t rank = 0) {
  if (rank == 0 || rank > n) rank = n;
  const Matrix b = random_uniform_matrix(g, n, rank);
  return psd_check(symmetrize(b * b.transposed()));
}

/// Random batch problem y = W β + e with SPD noise covariance Q and,
/// optionally, an SPD prior covariance R. W has U(-1,1] entries, so it has
/// full column rank almost surely whenever num_obs >= num_params.
inline BatchProblem random_batch_problem(Xoshiro256pp& g,
                                         std::size_t num_params,
                                         std::size_t num_obs,
                                         bool with_prior) {
  Matrix w = random_uniform_matrix(g, num_obs, num_params);
  SpdMatrix q = random_spd(g, num_obs);
  Vector y = random_uniform_vector(g, num_obs);
  if (with_prior) {
    return BatchProblem(std::move(w), std::move(q), std::move(y),
                        random_spd(g, num_params));
  }
  return BatchProblem(std::move(w), std::move(q), std::move(y));
}

/// Random constant-coefficient state-space model. Φ is scaled by 1/√n so its
/// spectral radius is usually below 1 and 50-step covariances stay tame.
inline StateSpaceModel random_model(Xoshiro256pp& g, std::size_t n,
                                    std::size_t m) {
  Matrix phi = random_uniform_matrix(g, n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  phi = phi * scale;
  Matrix h = random_uniform_matrix(g, m, n);
  return StateSpaceModel::constant(std::move(phi), std::move(h),
                                   random_spd(g, n), random_spd(g, m));
}

}  // namespace lgest
