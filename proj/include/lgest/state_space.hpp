#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Per-step matrix schedules: either one constant matrix reused at every step
// or an explicit list indexed by the time step.
// ---------------------------------------------------------------------------
template <class M>
class Schedule {
 public:
  static Schedule constant(M item) {
    Schedule s;
    s.items_.push_back(std::move(item));
    s.constant_ = true;
    return s;
  }

  static Schedule per_step(std::vector<M> items) {
    if (items.empty()) {
      throw ScheduleError("per-step schedule must not be empty");
    }
    Schedule s;
    s.items_ = std::move(items);
    s.constant_ = false;
    return s;
  }

  bool is_constant() const { return constant_; }

  /// Steps covered; a constant schedule covers every step.
  std::size_t length() const { return items_.size(); }

  const M& at(std::size_t k) const {
    if (constant_) return items_.front();
    if (k >= items_.size()) {
      throw ScheduleError("schedule has " + std::to_string(items_.size()) +
                          " entries, step " + std::to_string(k) +
                          " requested");
    }
    return items_[k];
  }

  const std::vector<M>& items() const { return items_; }

 private:
  std::vector<M> items_;
  bool constant_ = true;
};

/// The model matrices in effect at one time step.
struct StepModel {
  const Matrix& phi;   // n x n
  const Matrix& h;     // m x n
  const SpdMatrix& q;  // n x n, PSD allowed (Q = 0 for deterministic dynamics)
  const SpdMatrix& r;  // m x m, strictly SPD
};

// ---------------------------------------------------------------------------
// Linear-Gaussian process and measurement model:
//   x_{k+1} = Phi_k x_k + u_k,   u_k ~ N(0, Q_k), white
//   z_k     = H_k x_k + w_k,     w_k ~ N(0, R_k), white
// with x_0, {u_j}, {w_k} mutually uncorrelated.
// ---------------------------------------------------------------------------
struct StateSpaceModel {
  std::size_t n = 0;  // state dimension
  std::size_t m = 0;  // measurement dimension
  Schedule<Matrix> phi;
  Schedule<Matrix> h;
  Schedule<SpdMatrix> q;
  Schedule<SpdMatrix> r;

  StateSpaceModel(std::size_t n_in, std::size_t m_in, Schedule<Matrix> phi_in,
                  Schedule<Matrix> h_in, Schedule<SpdMatrix> q_in,
                  Schedule<SpdMatrix> r_in)
      : n(n_in),
        m(m_in),
        phi(std::move(phi_in)),
        h(std::move(h_in)),
        q(std::move(q_in)),
        r(std::move(r_in)) {
    for (const auto& p : phi.items()) check_dims(p, n, n, "phi");
    for (const auto& hh : h.items()) check_dims(hh, m, n, "h");
    for (const auto& qq : q.items()) check_dims(qq.matrix(), n, n, "q");
    for (const auto& rr : r.items()) {
      check_dims(rr.matrix(), m, m, "r");
      if (rr.singular()) {
        throw NotPositiveDefinite("StateSpaceModel: R_k must be strictly "
                                  "positive definite");
      }
    }
  }

  /// Convenience: all-constant model.
  static StateSpaceModel constant(Matrix phi_c, Matrix h_c, SpdMatrix q_c,
                                  SpdMatrix r_c) {
    const std::size_t n_c = phi_c.rows();
    const std::size_t m_c = h_c.rows();
    return StateSpaceModel(n_c, m_c, Schedule<Matrix>::constant(std::move(phi_c)),
                           Schedule<Matrix>::constant(std::move(h_c)),
                           Schedule<SpdMatrix>::constant(std::move(q_c)),
                           Schedule<SpdMatrix>::constant(std::move(r_c)));
  }

  StepModel at(std::size_t k) const {
    return StepModel{phi.at(k), h.at(k), q.at(k), r.at(k)};
  }

  /// Throws ScheduleError unless every schedule covers steps 0..steps-1.
  void require_coverage(std::size_t steps) const {
    check_len(phi, steps, "phi");
    check_len(h, steps, "h");
    check_len(q, steps, "q");
    check_len(r, steps, "r");
  }

 private:
  template <class S>
  static void check_len(const S& sched, std::size_t steps, const char* name) {
    if (!sched.is_constant() && sched.length() < steps) {
      throw ScheduleError(std::string(name) + " schedule covers " +
                          std::to_string(sched.length()) + " steps, " +
                          std::to_string(steps) + " required");
    }
  }

  static void check_dims(const Matrix& m_in, std::size_t r, std::size_t c,
                         const char* name) {
    if (m_in.rows() != r || m_in.cols() != c) {
      throw DimensionMismatch("StateSpaceModel: " + std::string(name) +
                              " entry is " + m_in.shape_str() +
                              ", expected " + std::to_string(r) + "x" +
                              std::to_string(c));
    }
  }
};

}  // namespace lgest
