#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "lgest/matrix.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Chi-square distribution support for the filter-consistency statistics.
// Self-contained: regularized incomplete gamma by series / continued
// fraction, quantiles by bracketed bisection from a Wilson-Hilferty start.
// ---------------------------------------------------------------------------

namespace detail {

/// Lower regularized incomplete gamma P(a, x), series expansion (x < a + 1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Upper regularized incomplete gamma Q(a, x), Lentz continued fraction
/// (x >= a + 1).
inline double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
    throw Error("regularized_gamma_p: require a > 0, x >= 0, finite");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// P(X <= x) for X ~ chi-square with `dof` degrees of freedom.
inline double chi_square_cdf(double x, double dof) {
  if (!(dof > 0.0)) {
    throw Error("chi_square_cdf: dof must be positive");
  }
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

/// Inverse CDF: the x with chi_square_cdf(x, dof) = p.
inline double chi_square_quantile(double p, double dof) {
  if (!(dof > 0.0) || !(p > 0.0) || !(p < 1.0)) {
    throw Error("chi_square_quantile: require dof > 0 and p in (0, 1)");
  }
  // Wilson-Hilferty start: x ≈ dof (1 - 2/(9 dof) + z sqrt(2/(9 dof)))³.
  // A crude z is fine; bisection does the real work.
  const double t = (p < 0.5) ? std::sqrt(-2.0 * std::log(p))
                             : std::sqrt(-2.0 * std::log(1.0 - p));
  double z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                     (1.0 + 1.432788 * t + 0.189269 * t * t +
                      0.001308 * t * t * t);
  if (p < 0.5) z = -z;
  const double wh = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
  double guess = dof * wh * wh * wh;
  if (!(guess > 0.0)) guess = dof * 1e-3;

  double lo = 0.0;
  double hi = std::fmax(2.0 * guess, dof + 20.0 * std::sqrt(2.0 * dof) + 10.0);
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // bisected to adjacent doubles
    if (chi_square_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Central interval containing `confidence` mass of chi-square(dof):
/// [quantile(α/2), quantile(1 - α/2)] with α = 1 - confidence.
struct ChiSquareInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline ChiSquareInterval chi_square_interval(double confidence, double dof) {
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw Error("chi_square_interval: confidence must be in (0, 1)");
  }
  const double alpha = 1.0 - confidence;
  return ChiSquareInterval{chi_square_quantile(0.5 * alpha, dof),
                           chi_square_quantile(1.0 - 0.5 * alpha, dof)};
}

}  // namespace lgest
