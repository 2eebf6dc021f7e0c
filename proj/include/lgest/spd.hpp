#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lgest/matrix.hpp"

namespace lgest {

inline constexpr double kDefaultSymTol = 1e-8;   // relative asymmetry bound
inline constexpr double kDefaultSolveTol = 1e-10;  // residual contract, see tests
inline constexpr double kPsdPivotTol = 1e-10;    // relative pivot floor, PSD mode
inline constexpr double kConditionWarnRatio = 1e12;

/// Covariance-update algebra selector. Joseph is the algebraically equivalent
/// (I-KH)P(I-KH)^T + KRK^T form that stays PSD under long filter runs.
enum class CovarianceForm { Standard, Joseph };

// ---------------------------------------------------------------------------
// SpdMatrix: a square matrix certified symmetric positive (semi)definite.
//
// Certification means a complete lower Cholesky factorization succeeded with
// strictly positive pivots (spd_check), or with pivots allowed to touch zero
// within a relative tolerance (psd_check; zero-pivot columns are annihilated,
// which is exact for a true PSD matrix). The factor is retained so that every
// later solve, log-determinant and quadratic form reuses it; no explicit
// inverse is ever formed on these paths.
// ---------------------------------------------------------------------------
class SpdMatrix {
 public:
  SpdMatrix() = default;

  std::size_t dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  /// Lower factor L with matrix() == L * L^T. Columns at annihilated pivots
  /// are zero.
  const Matrix& chol_lower() const { return l_; }
  /// Raw factorization pivots d_j (diagonal of D in the LDL^T reading).
  const std::vector<double>& pivots() const { return pivots_; }

  /// Pivot-ratio conditioning guard tripped (ratio > kConditionWarnRatio).
  /// A warning, not an error: filters keep running and report degradation.
  bool ill_conditioned() const { return ill_; }
  /// True iff any pivot was annihilated (possible only via psd_check).
  bool singular() const { return singular_; }

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  friend SpdMatrix detail_certify(const Matrix&, double, bool, double);

  Matrix m_;
  Matrix l_;
  std::vector<double> pivots_;
  bool ill_ = false;
  bool singular_ = false;
};

inline SpdMatrix detail_certify(const Matrix& input, double sym_tol,
                                bool allow_psd, double pivot_tol) {
  input.require_square("spd_check");
  if (!input.is_finite()) {
    throw Error("spd_check: non-finite entries");
  }
  const std::size_t n = input.rows();

  double max_asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      max_asym = std::max(max_asym, std::abs(input(i, j) - input(j, i)));
  const double mag = input.max_abs();
  if (max_asym > sym_tol * mag) {
    throw AsymmetryExceedsTol("spd_check: max asymmetry " +
                              std::to_string(max_asym) + " exceeds " +
                              std::to_string(sym_tol) + " * " +
                              std::to_string(mag));
  }

  SpdMatrix out;
  out.m_ = symmetrize(input);
  out.l_ = Matrix(n, n);
  out.pivots_.resize(n);

  double diag_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    diag_scale = std::max(diag_scale, std::abs(out.m_(i, i)));
  if (diag_scale == 0.0) diag_scale = 1.0;
  const double zero_band = pivot_tol * diag_scale;

  Matrix& l = out.l_;
  const Matrix& a = out.m_;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    out.pivots_[j] = d;

    if (allow_psd && d <= zero_band) {
      if (d < -zero_band) {
        throw NotPositiveDefinite("psd_check: pivot " + std::to_string(j) +
                                  " = " + std::to_string(d) +
                                  " below -" + std::to_string(zero_band));
      }
      // Semidefinite direction: annihilate the column. Exact for true PSD
      // input, where the residual column is zero whenever the pivot is.
      out.singular_ = true;
      continue;
    }
    if (d <= 0.0) {
      throw NotPositiveDefinite("spd_check: pivot " + std::to_string(j) +
                                " = " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }

  double pmax = 0.0, pmin = 0.0;
  bool seen = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (allow_psd && out.pivots_[j] <= zero_band) continue;
    if (!seen) {
      pmax = pmin = out.pivots_[j];
      seen = true;
    } else {
      pmax = std::max(pmax, out.pivots_[j]);
      pmin = std::min(pmin, out.pivots_[j]);
    }
  }
  out.ill_ = seen && pmax > kConditionWarnRatio * pmin;
  return out;
}

/// Certify strict SPD: every pivot must be strictly positive.
inline SpdMatrix spd_check(const Matrix& m, double sym_tol = kDefaultSymTol) {
  return detail_certify(m, sym_tol, /*allow_psd=*/false, kPsdPivotTol);
}

/// Certify PSD with tolerance: pivots may touch zero within
/// pivot_tol * max|diag|; their columns are annihilated.
inline SpdMatrix psd_check(const Matrix& m, double sym_tol = kDefaultSymTol,
                           double pivot_tol = kPsdPivotTol) {
  return detail_certify(m, sym_tol, /*allow_psd=*/true, pivot_tol);
}

// ---------------------------------------------------------------------------
// Factor-solves
// ---------------------------------------------------------------------------

namespace detail {

inline void require_invertible(const SpdMatrix& a, const char* op) {
  if (a.singular()) {
    throw NotPositiveDefinite(std::string(op) +
                              ": factor has annihilated pivots (singular)");
  }
}

}  // namespace detail

/// X with A X = B, by forward/back substitution on the retained factor.
inline Matrix solve_spd(const SpdMatrix& a, const Matrix& b) {
  const std::size_t n = a.dim();
  if (b.rows() != n) {
    throw DimensionMismatch("solve_spd: A is " + std::to_string(n) + "x" +
                            std::to_string(n) + ", B is " + b.shape_str());
  }
  detail::require_invertible(a, "solve_spd");
  const Matrix& l = a.chol_lower();
  Matrix x = b;
  const std::size_t k = b.cols();
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = x(i, c);
      for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x(j, c);
      x(i, c) = s / l(i, i);
    }
  }
  // L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = x(ii, c);
      for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x(j, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  return x;
}

inline Vector solve_spd(const SpdMatrix& a, const Vector& b) {
  return to_vector(solve_spd(a, to_column(b)));
}

/// v^T A^{-1} v through a single forward solve; nonnegative by construction.
inline double inv_quad(const SpdMatrix& a, const Vector& v) {
  const std::size_t n = a.dim();
  if (v.size() != n) {
    throw DimensionMismatch("inv_quad: dim " + std::to_string(n) +
                            " vs vector length " + std::to_string(v.size()));
  }
  detail::require_invertible(a, "inv_quad");
  const Matrix& l = a.chol_lower();
  Vector u = v;
  for (std::size_t i = 0; i < n; ++i) {
    double s = u[i];
    for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * u[j];
    u[i] = s / l(i, i);
  }
  return u.dot(u);
}

/// log det A from the factorization pivots.
inline double logdet(const SpdMatrix& a) {
  detail::require_invertible(a, "logdet");
  double s = 0.0;
  for (double d : a.pivots()) s += std::log(d);
  return s;
}

/// A^{-1} as a value, via a factor-solve against the identity. Estimation
/// code calls this only where the contract returns an inverse itself.
inline Matrix inverse_spd(const SpdMatrix& a) {
  return symmetrize(solve_spd(a, Matrix::identity(a.dim())));
}

// ---------------------------------------------------------------------------
// Matrix inversion lemma as a first-class identity:
// (P^{-1} + H^T R^{-1} H)^{-1} = P - P H^T (R + H P H^T)^{-1} H P.
// Only the right-hand side is evaluated here; the left-hand route lives in
// the verification tests.
// ---------------------------------------------------------------------------
inline SpdMatrix woodbury_posterior_cov(const SpdMatrix& p, const Matrix& h,
                                        const SpdMatrix& r) {
  const std::size_t n = p.dim();
  const std::size_t m = r.dim();
  if (h.rows() != m || h.cols() != n) {
    throw DimensionMismatch("woodbury_posterior_cov: H is " + h.shape_str() +
                            ", expected " + std::to_string(m) + "x" +
                            std::to_string(n));
  }
  const Matrix hp = h * p.matrix();                       // m x n
  const SpdMatrix s =
      spd_check(symmetrize(r.matrix() + hp * h.transposed()));
  const Matrix x = solve_spd(s, hp);                      // S^{-1} H P
  return spd_check(symmetrize(p.matrix() - hp.transposed() * x));
}

}  // namespace lgest
