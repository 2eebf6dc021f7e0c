#pragma once

#include <cmath>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

/// A Gaussian state belief N(mean, cov).
struct GaussianBelief {
  Vector mean;
  SpdMatrix cov;
};

/// log N(x; mean, cov) for a strictly positive definite covariance.
inline double log_gaussian_density(const Vector& x, const Vector& mean,
                                   const SpdMatrix& cov) {
  if (x.size() != mean.size() || x.size() != cov.dim()) {
    throw DimensionMismatch("log_gaussian_density: x has dim " +
                            std::to_string(x.size()) + ", mean " +
                            std::to_string(mean.size()) + ", cov " +
                            cov.matrix().shape_str());
  }
  constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * kLog2Pi + logdet(cov) + inv_quad(cov, x - mean));
}

}  // namespace lgest
