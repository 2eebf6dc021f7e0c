#pragma once

#include <cstddef>
#include <vector>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

/// Everything a filter produces while absorbing measurement z_k.
struct FilterStep {
  std::size_t k = 0;
  Vector x_pred;            // x̂_{k|k-1}
  SpdMatrix p_pred;         // P_{k|k-1}
  Vector innovation;        // z_k - H_k x̂_{k|k-1}
  SpdMatrix innovation_cov; // S_k = H_k P_{k|k-1} H_kᵀ + R_k
  Matrix gain;              // K_k = P_{k|k-1} H_kᵀ S_k⁻¹
  Vector x_post;            // x̂_{k|k}
  SpdMatrix p_post;         // P_{k|k}
  double log_predictive = 0.0;  // log N(z_k; H_k x̂_{k|k-1}, S_k)
};

/// Full history of a filter run over z_0..z_{T-1}, plus the one-step-ahead
/// prediction left standing after the final update.
struct FilterTrace {
  std::vector<FilterStep> steps;
  Vector x_final_pred;    // x̂_{T|T-1}
  SpdMatrix p_final_pred; // P_{T|T-1}

  /// Sum of per-step log predictive densities (the log evidence of the run).
  double total_log_predictive() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.log_predictive;
    return s;
  }
};

}  // namespace lgest
