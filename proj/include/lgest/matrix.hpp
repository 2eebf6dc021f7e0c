#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgest {

// ---------------------------------------------------------------------------
// Error hierarchy
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotSquare : Error {
  explicit NotSquare(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct AsymmetryExceedsTol : Error {
  explicit AsymmetryExceedsTol(const std::string& what) : Error(what) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what) : Error(what) {}
};

struct EmptyMeasurementSequence : Error {
  explicit EmptyMeasurementSequence(const std::string& what) : Error(what) {}
};

struct ScheduleError : Error {
  explicit ScheduleError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Vector
// ---------------------------------------------------------------------------

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : v_(n, fill) {}
  Vector(std::initializer_list<double> init) : v_(init) {}
  explicit Vector(std::vector<double> data) : v_(std::move(data)) {}

  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) {
    assert(i < v_.size());
    return v_[i];
  }
  double operator[](std::size_t i) const {
    assert(i < v_.size());
    return v_[i];
  }

  const std::vector<double>& data() const { return v_; }

  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool is_finite() const {
    return std::all_of(v_.begin(), v_.end(),
                       [](double x) { return std::isfinite(x); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  double norm2() const { return std::sqrt(dot(*this)); }

  double dot(const Vector& o) const {
    if (o.size() != size()) {
      throw DimensionMismatch("dot: length " + std::to_string(size()) +
                              " vs " + std::to_string(o.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) s += v_[i] * o.v_[i];
    return s;
  }

  Vector& operator+=(const Vector& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vector& operator*=(double c) {
    for (double& x : v_) x *= c;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(double c, Vector a) { return a *= c; }
  friend Vector operator*(Vector a, double c) { return a *= c; }
  friend Vector operator-(Vector a) { return a *= -1.0; }

  friend bool operator==(const Vector& a, const Vector& b) {
    return a.v_ == b.v_;
  }

 private:
  void check_same(const Vector& o, const char* op) const {
    if (o.size() != size()) {
      throw DimensionMismatch(std::string("vector ") + op + ": length " +
                              std::to_string(size()) + " vs " +
                              std::to_string(o.size()));
    }
  }

  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Matrix: dense, double precision, row-major
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw DimensionMismatch("matrix dimensions must be >= 1");
    }
  }

  // Row-by-row construction: Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    if (rows_ == 0) throw DimensionMismatch("matrix dimensions must be >= 1");
    cols_ = rows.begin()->size();
    if (cols_ == 0) throw DimensionMismatch("matrix dimensions must be >= 1");
    d_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw DimensionMismatch("ragged initializer rows");
      }
      d_.insert(d_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return d_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return d_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return d_; }

  bool is_finite() const {
    return std::all_of(d_.begin(), d_.end(),
                       [](double x) { return std::isfinite(x); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : d_) m = std::max(m, std::abs(x));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (double x : d_) s += x * x;
    return std::sqrt(s);
  }

  double trace() const {
    require_square("trace");
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
    return s;
  }

  Vector diag() const {
    require_square("diag");
    Vector d(rows_);
    for (std::size_t i = 0; i < rows_; ++i) d[i] = (*this)(i, i);
    return d;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Vector row(std::size_t i) const {
    Vector r(cols_);
    for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
    return r;
  }

  Vector col(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_block(std::size_t i0, std::size_t j0, const Matrix& b) {
    if (i0 + b.rows() > rows_ || j0 + b.cols() > cols_) {
      throw DimensionMismatch("set_block out of range");
    }
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j)
        (*this)(i0 + i, j0 + j) = b(i, j);
  }

  Matrix block(std::size_t i0, std::size_t j0, std::size_t r,
               std::size_t c) const {
    if (i0 + r > rows_ || j0 + c > cols_) {
      throw DimensionMismatch("block out of range");
    }
    Matrix b(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Matrix& operator*=(double c) {
    for (double& x : d_) x *= c;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double c, Matrix a) { return a *= c; }
  friend Matrix operator*(Matrix a, double c) { return a *= c; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw DimensionMismatch("matmul: " + a.shape_str() + " * " +
                              b.shape_str());
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          c(i, j) += aik * b(k, j);
        }
      }
    }
    return c;
  }

  friend Vector operator*(const Matrix& a, const Vector& v) {
    if (a.cols_ != v.size()) {
      throw DimensionMismatch("matvec: " + a.shape_str() + " * len " +
                              std::to_string(v.size()));
    }
    Vector r(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.d_ == b.d_;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  void require_square(const char* op) const {
    if (!square()) {
      throw NotSquare(std::string(op) + ": matrix is " + shape_str());
    }
  }

 private:
  void check_same(const Matrix& o, const char* op) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) {
      throw DimensionMismatch(std::string("matrix ") + op + ": " +
                              shape_str() + " vs " + o.shape_str());
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> d_;
};

// ---------------------------------------------------------------------------
// Free helpers
// ---------------------------------------------------------------------------

/// (M + M^T) / 2.
inline Matrix symmetrize(const Matrix& m) {
  m.require_square("symmetrize");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

inline Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).max_abs();
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).max_abs();
}

// Relative deviations used throughout the equivalence tests: max-norm and
// Frobenius-norm differences scaled by the larger operand, with 0/0 -> 0.
inline double rel_deviation(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  if (scale == 0.0) return 0.0;
  return max_abs_diff(a, b) / scale;
}

inline double rel_deviation(const Vector& a, const Vector& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  if (scale == 0.0) return 0.0;
  return max_abs_diff(a, b) / scale;
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.frobenius(), b.frobenius());
  if (scale == 0.0) return 0.0;
  return (a - b).frobenius() / scale;
}

inline Vector to_vector(const Matrix& column) {
  if (column.cols() != 1) {
    throw DimensionMismatch("to_vector: expected single column, got " +
                            column.shape_str());
  }
  return column.col(0);
}

inline Matrix to_column(const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

}  // namespace lgest
