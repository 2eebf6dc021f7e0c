#pragma once

// Deliberately simple reference implementations used only as test oracles.
// They share no code path with the library's factor-based solvers: inversion
// is Gauss-Jordan with partial pivoting, the determinant comes from plain LU.

#include <cmath>
#include <stdexcept>

#include "lgest/matrix.hpp"

namespace naive {

/// Gauss-Jordan inverse with partial pivoting.
inline lgest::Matrix inverse(const lgest::Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("naive::inverse: square matrix required");
  }
  const std::size_t n = a.rows();
  lgest::Matrix work = a;
  lgest::Matrix inv = lgest::Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(work(r, col)) > std::fabs(work(pivot, col))) pivot = r;
    }
    if (work(pivot, col) == 0.0) {
      throw std::invalid_argument("naive::inverse: singular matrix");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(col, j), work(pivot, j));
        std::swap(inv(col, j), inv(pivot, j));
      }
    }
    const double d = work(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      work(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(r, j) -= f * work(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// log(det a) via LU with partial pivoting; requires det > 0.
inline double log_determinant(const lgest::Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("naive::log_determinant: square required");
  }
  const std::size_t n = a.rows();
  lgest::Matrix work = a;
  double log_abs = 0.0;
  int sign = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(work(r, col)) > std::fabs(work(pivot, col))) pivot = r;
    }
    if (work(pivot, col) == 0.0) {
      throw std::invalid_argument("naive::log_determinant: singular matrix");
    }
    if (pivot != col) {
      sign = -sign;
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(col, j), work(pivot, j));
      }
    }
    const double d = work(col, col);
    log_abs += std::log(std::fabs(d));
    if (d < 0.0) sign = -sign;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = work(r, col) / d;
      for (std::size_t j = col; j < n; ++j) {
        work(r, j) -= f * work(col, j);
      }
    }
  }
  if (sign <= 0) {
    throw std::invalid_argument("naive::log_determinant: determinant <= 0");
  }
  return log_abs;
}

inline lgest::Vector solve(const lgest::Matrix& a, const lgest::Vector& b) {
  return inverse(a) * b;
}

}  // namespace naive
