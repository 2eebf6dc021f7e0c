#pragma once

#include <optional>
#include <string>
#include <utility>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

// Full-column-rank gate for the Gauss-Markov normal matrix: smallest
// factorization pivot must exceed this ratio times the largest.
inline constexpr double kRankPivotRatio = 1e-10;

// ---------------------------------------------------------------------------
// Stacked linear observation model y = W beta + eps with noise covariance Q
// and, optionally, a prior covariance R on the zero-mean parameter vector.
// Nonzero prior means are handled by callers by centering.
// ---------------------------------------------------------------------------
struct BatchProblem {
  Matrix w;                          // m x n design
  SpdMatrix q;                       // m x m, E[eps eps^T]
  Vector y;                          // m observations
  std::optional<SpdMatrix> prior_r;  // n x n, E[beta beta^T]

  BatchProblem(Matrix w_in, SpdMatrix q_in, Vector y_in,
               std::optional<SpdMatrix> prior_r_in = std::nullopt)
      : w(std::move(w_in)),
        q(std::move(q_in)),
        y(std::move(y_in)),
        prior_r(std::move(prior_r_in)) {
    if (q.dim() != w.rows() || y.size() != w.rows()) {
      throw DimensionMismatch("BatchProblem: W is " + w.shape_str() +
                              ", Q dim " + std::to_string(q.dim()) +
                              ", y length " + std::to_string(y.size()));
    }
    if (prior_r && prior_r->dim() != w.cols()) {
      throw DimensionMismatch("BatchProblem: prior R dim " +
                              std::to_string(prior_r->dim()) +
                              " vs W cols " + std::to_string(w.cols()));
    }
  }

  std::size_t num_obs() const { return w.rows(); }
  std::size_t num_params() const { return w.cols(); }
};

struct BatchEstimate {
  Vector beta_hat;      // n
  SpdMatrix error_cov;  // n x n, PSD-certified
  Matrix gain;          // n x m, beta_hat == gain * y
};

/// Second-moment description of (beta, y): E[beta y^T] and E[y y^T].
struct SecondMoments {
  Matrix cov_beta_y;  // n x m
  SpdMatrix cov_yy;   // m x m
};

namespace detail {

inline void require_prior(const BatchProblem& p, const char* op) {
  if (!p.prior_r) {
    throw Error(std::string(op) + ": problem has no prior covariance");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Minimum-variance unbiased estimate, no prior:
//   beta_hat = (W^T Q^{-1} W)^{-1} W^T Q^{-1} y,  error cov (W^T Q^{-1} W)^{-1}.
// The gain satisfies K W = I (unbiasedness constraint).
// ---------------------------------------------------------------------------
inline BatchEstimate gauss_markov(const BatchProblem& p) {
  if (p.prior_r) {
    throw Error("gauss_markov: problem carries a prior; use the "
                "minimum-variance estimators instead");
  }
  const Matrix qi_w = solve_spd(p.q, p.w);  // Q^{-1} W, m x n
  const Matrix normal = symmetrize(p.w.transposed() * qi_w);

  SpdMatrix a;
  try {
    a = spd_check(normal);
  } catch (const NotPositiveDefinite& e) {
    throw RankDeficient(std::string("gauss_markov: W^T Q^{-1} W failed "
                                    "certification: ") +
                        e.what());
  }
  const auto& piv = a.pivots();
  const double pmax = *std::max_element(piv.begin(), piv.end());
  const double pmin = *std::min_element(piv.begin(), piv.end());
  if (pmin <= kRankPivotRatio * pmax) {
    throw RankDeficient("gauss_markov: pivot ratio " +
                        std::to_string(pmin / pmax) +
                        " indicates rank-deficient W");
  }

  BatchEstimate e;
  e.gain = solve_spd(a, qi_w.transposed());  // n x m
  e.beta_hat = solve_spd(a, qi_w.transposed() * p.y);
  e.error_cov = psd_check(inverse_spd(a));
  return e;
}

// ---------------------------------------------------------------------------
// Minimum-variance gain from second moments: K = E[beta y^T] (E[y y^T])^{-1}.
// Callers form beta_hat = K y and error cov = E[beta beta^T] - K E[y beta^T].
// ---------------------------------------------------------------------------
inline Matrix min_variance_gain(const SecondMoments& m) {
  if (m.cov_beta_y.cols() != m.cov_yy.dim()) {
    throw DimensionMismatch("min_variance_gain: E[beta y^T] is " +
                            m.cov_beta_y.shape_str() + ", E[y y^T] dim " +
                            std::to_string(m.cov_yy.dim()));
  }
  return solve_spd(m.cov_yy, m.cov_beta_y.transposed()).transposed();
}

// ---------------------------------------------------------------------------
// Minimum-variance estimate with prior, gain form:
//   beta_hat = R W^T (W R W^T + Q)^{-1} y
//   error cov = R - R W^T (W R W^T + Q)^{-1} W R.
// ---------------------------------------------------------------------------
inline BatchEstimate min_variance_prior_gain(const BatchProblem& p) {
  detail::require_prior(p, "min_variance_prior_gain");
  const Matrix& r = p.prior_r->matrix();
  const Matrix rwt = r * p.w.transposed();  // n x m
  const SpdMatrix s =
      spd_check(symmetrize(p.w * rwt + p.q.matrix()));
  const Matrix x = solve_spd(s, rwt.transposed());  // S^{-1} W R, m x n

  BatchEstimate e;
  e.gain = x.transposed();
  e.beta_hat = e.gain * p.y;
  e.error_cov = psd_check(symmetrize(r - rwt * x));
  return e;
}

// ---------------------------------------------------------------------------
// The same estimate in information form:
//   beta_hat = (W^T Q^{-1} W + R^{-1})^{-1} W^T Q^{-1} y
//   error cov = (W^T Q^{-1} W + R^{-1})^{-1}.
// ---------------------------------------------------------------------------
inline BatchEstimate min_variance_prior_info(const BatchProblem& p) {
  detail::require_prior(p, "min_variance_prior_info");
  const Matrix qi_w = solve_spd(p.q, p.w);
  const Matrix info =
      symmetrize(p.w.transposed() * qi_w + inverse_spd(*p.prior_r));
  const SpdMatrix a = spd_check(info);

  BatchEstimate e;
  e.gain = solve_spd(a, qi_w.transposed());
  e.beta_hat = solve_spd(a, qi_w.transposed() * p.y);
  e.error_cov = psd_check(inverse_spd(a));
  return e;
}

// ---------------------------------------------------------------------------
// Estimate of the linear function T beta: mean T beta_hat, gain T K,
// error covariance T cov T^T.
// ---------------------------------------------------------------------------
inline BatchEstimate linear_function_estimate(const Matrix& t,
                                              const BatchEstimate& e) {
  if (t.cols() != e.beta_hat.size()) {
    throw DimensionMismatch("linear_function_estimate: T is " + t.shape_str() +
                            ", estimate dim " +
                            std::to_string(e.beta_hat.size()));
  }
  BatchEstimate out;
  out.beta_hat = t * e.beta_hat;
  out.gain = t * e.gain;
  out.error_cov =
      psd_check(symmetrize(t * e.error_cov.matrix() * t.transposed()));
  return out;
}

// ---------------------------------------------------------------------------
// Exact error covariance of an arbitrary linear estimator beta_hat = K y
// under the prior-moment assumptions:
//   K (W R W^T + Q) K^T - K W R - R W^T K^T + R.
// The optimality tests evaluate this at perturbed gains.
// ---------------------------------------------------------------------------
inline Matrix error_covariance_of_linear_estimator(const Matrix& k,
                                                   const BatchProblem& p) {
  detail::require_prior(p, "error_covariance_of_linear_estimator");
  const std::size_t n = p.num_params();
  const std::size_t m = p.num_obs();
  if (k.rows() != n || k.cols() != m) {
    throw DimensionMismatch("error_covariance_of_linear_estimator: K is " +
                            k.shape_str() + ", expected " + std::to_string(n) +
                            "x" + std::to_string(m));
  }
  const Matrix& r = p.prior_r->matrix();
  const Matrix wr = p.w * r;                              // m x n
  const Matrix s = symmetrize(wr * p.w.transposed() + p.q.matrix());
  const Matrix kwr = k * wr;                              // n x n
  return symmetrize(k * s * k.transposed() - kwr - kwr.transposed() + r);
}

}  // namespace lgest
