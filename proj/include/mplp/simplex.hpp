#pragma once

// Dense revised simplex for min c'x s.t. Ax = b, x >= 0.
// Two phases with artificials, Dantzig pricing that falls back to Bland's
// rule, explicit B^-1 kept by eta updates and refactored periodically.

#include "mplp/common.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace mplp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

struct SimplexOptions {
  double feas_tol = 1e-9;   // phase-1 residual, scaled by max(1, |b|)
  double dual_tol = 1e-9;   // entering threshold, scaled by max(1, |c_j|)
  double pivot_tol = 1e-9;
  Index max_iterations = 50000;
  Index refactor_every = 50;
};

struct SimplexResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;        // primal, n
  Vector y;        // simplex multipliers, m
  Vector d;        // reduced costs c - A'y, n
  IndexList basis; // structural basic columns (redundant rows omitted)
  double objective = 0.0;
  Index iterations = 0;
};

class SimplexSolver {
 public:
  explicit SimplexSolver(SimplexOptions opt = {}) : opt_(opt) {}

  SimplexResult solve(const Matrix& a, const Vector& b, const Vector& c) {
    if (b.size() != a.rows() || c.size() != a.cols()) throw Error(ErrorCode::kFormat, "simplex: dimension mismatch");
    m_ = a.rows();
    n_ = a.cols();
    iterations_ = 0;

    // rows with negative rhs are negated so the artificial basis is feasible
    sign_ = Vector::Ones(m_);
    for (Index i = 0; i < m_; ++i) {
      if (b(i) < 0) sign_(i) = -1.0;
    }
    a_.resize(m_, n_ + m_);
    a_.leftCols(n_) = sign_.asDiagonal() * a;
    a_.rightCols(m_).setIdentity();
    b_ = sign_.cwiseProduct(b);

    basis_.resize(static_cast<std::size_t>(m_));
    is_basic_.assign(static_cast<std::size_t>(n_ + m_), -1);
    for (Index i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      is_basic_[static_cast<std::size_t>(n_ + i)] = i;
    }
    binv_ = Matrix::Identity(m_, m_);
    xb_ = b_;
    since_refactor_ = 0;

    const double bscale = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
    SimplexResult res;

    // phase 1
    Vector cost1 = Vector::Zero(n_ + m_);
    cost1.tail(m_).setOnes();
    allow_artificial_ = true;
    LpStatus s1 = iterate(cost1);
    if (s1 == LpStatus::kUnbounded) throw Error(ErrorCode::kSolverFailure, "simplex: phase 1 unbounded");
    double infeas = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= n_) infeas += std::abs(xb_(i));
    }
    if (infeas > opt_.feas_tol * bscale * std::max<Index>(1, m_)) {
      res.status = LpStatus::kInfeasible;
      res.iterations = iterations_;
      return res;
    }
    drive_out_artificials();

    // phase 2
    Vector cost2 = Vector::Zero(n_ + m_);
    cost2.head(n_) = c;
    allow_artificial_ = false;
    LpStatus s2 = iterate(cost2);
    res.iterations = iterations_;
    if (s2 == LpStatus::kUnbounded) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
    refactor();
    res.status = LpStatus::kOptimal;
    res.x = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      const Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        res.x(j) = std::max(0.0, xb_(i));
        res.basis.push_back(j);
      }
    }
    std::sort(res.basis.begin(), res.basis.end());
    Vector cb(m_);
    for (Index i = 0; i < m_; ++i) cb(i) = cost2(basis_[static_cast<std::size_t>(i)]);
    Vector yflip = binv_.transpose() * cb;
    res.y = sign_.cwiseProduct(yflip);
    res.d = c - a.transpose() * res.y;
    for (Index j : res.basis) res.d(j) = 0.0;
    res.objective = c.dot(res.x);
    return res;
  }

 private:
  LpStatus iterate(const Vector& cost) {
    const Index phase_start = iterations_;
    const Index bland_after = 3 * (m_ + n_);
    while (true) {
      if (iterations_ >= opt_.max_iterations) throw Error(ErrorCode::kSolverFailure, "simplex: iteration limit reached");
      const bool bland = iterations_ - phase_start > bland_after;

      Vector cb(m_);
      for (Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      const Vector y = binv_.transpose() * cb;

      // the entering threshold scales with each column's own cost; a single
      // huge cost (a cap row, say) must not hide small negative reduced costs
      Index enter = -1;
      double best = 0.0;
      const Index ncols = allow_artificial_ ? n_ + m_ : n_;
      for (Index j = 0; j < ncols; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)] >= 0) continue;
        const double dj = cost(j) - a_.col(j).dot(y);
        if (dj >= -opt_.dual_tol * std::max(1.0, std::abs(cost(j)))) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (dj < best) {
          best = dj;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      const Vector u = binv_ * a_.col(enter);
      Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (u(i) <= opt_.pivot_tol) continue;
        const double r = std::max(0.0, xb_(i)) / u(i);
        if (leave < 0 || r < ratio - 1e-12 * std::max(1.0, ratio)) {
          ratio = r;
          leave = i;
        } else if (r <= ratio + 1e-12 * std::max(1.0, ratio)) {
          // tie: Bland wants the smallest basic index, otherwise prefer the larger pivot
          const bool take = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                  : u(i) > u(leave);
          if (take) {
            ratio = std::min(ratio, r);
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      pivot(enter, leave, u, ratio);
    }
  }

  void pivot(Index enter, Index leave, const Vector& u, double step) {
    ++iterations_;
    xb_ -= step * u;
    xb_(leave) = step;
    const double piv = u(leave);
    const Vector row = binv_.row(leave) / piv;
    for (Index i = 0; i < m_; ++i) {
      if (i == leave || u(i) == 0.0) continue;
      binv_.row(i) -= u(i) * row;
    }
    binv_.row(leave) = row;
    is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = -1;
    basis_[static_cast<std::size_t>(leave)] = enter;
    is_basic_[static_cast<std::size_t>(enter)] = leave;
    if (++since_refactor_ >= opt_.refactor_every) refactor();
  }

  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    Matrix bmat(m_, m_);
    for (Index i = 0; i < m_; ++i) bmat.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Matrix> lu(bmat);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (Index i = 0; i < m_; ++i) {
      if (xb_(i) < 0.0 && xb_(i) > -opt_.feas_tol * std::max(1.0, b_.cwiseAbs().maxCoeff())) xb_(i) = 0.0;
    }
  }

  // Artificials left at zero are swapped for structural columns where a
  // usable pivot exists; the rest sit on redundant rows and stay basic.
  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      const Vector row = binv_.row(i) * a_.leftCols(n_);
      Index best = -1;
      double mag = opt_.pivot_tol * 1e2;
      for (Index j = 0; j < n_; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)] >= 0) continue;
        if (std::abs(row(j)) > mag) {
          mag = std::abs(row(j));
          best = j;
        }
      }
      if (best < 0) continue;
      const Vector u = binv_ * a_.col(best);
      pivot(best, i, u, xb_(i) / u(i));
    }
    refactor();
  }

  SimplexOptions opt_;
  Index m_ = 0;
  Index n_ = 0;
  Matrix a_;
  Vector b_;
  Vector sign_;
  Matrix binv_;
  Vector xb_;
  std::vector<Index> basis_;
  std::vector<Index> is_basic_;
  Index iterations_ = 0;
  Index since_refactor_ = 0;
  bool allow_artificial_ = true;
};

/// min c'x s.t. Ax = b, x >= 0.
inline SimplexResult simplex_solve(const Matrix& a, const Vector& b, const Vector& c, SimplexOptions opt = {}) {
  SimplexSolver s(opt);
  return s.solve(a, b, c);
}

struct InequalityLpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector z;         // primal point
  Vector y;         // row multipliers (>= 0), one per inequality
  double objective = 0.0;
};

/// min c'z s.t. Gz <= h with z free. Solved through the standard-form dual
/// min h'y s.t. G'y = -c, y >= 0, whose simplex multipliers are the primal z.
inline InequalityLpResult solve_inequality_lp(const Vector& c, const Matrix& g, const Vector& h,
                                              SimplexOptions opt = {}) {
  if (g.cols() != c.size() || g.rows() != h.size()) throw Error(ErrorCode::kFormat, "inequality LP: dimension mismatch");
  InequalityLpResult out;
  const Matrix gt = g.transpose();
  SimplexResult dual = simplex_solve(gt, -c, h, opt);
  if (dual.status == LpStatus::kOptimal) {
    out.status = LpStatus::kOptimal;
    out.z = dual.y;
    out.y = dual.x;
    out.objective = c.dot(out.z);
    return out;
  }
  if (dual.status == LpStatus::kUnbounded) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  // dual infeasible: primal is infeasible or unbounded; settle with a zero objective
  SimplexResult feas = simplex_solve(gt, Vector::Zero(c.size()), h, opt);
  out.status = feas.status == LpStatus::kUnbounded ? LpStatus::kInfeasible : LpStatus::kUnbounded;
  if (out.status == LpStatus::kUnbounded) out.z = feas.y;
  return out;
}

}  // namespace mplp
