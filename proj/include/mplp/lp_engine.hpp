#pragma once

// Parametric LPs in general and standard form, the vertex solver, lexicographic
// solves, the multiplicity test and the degeneracy degree.

#include "mplp/common.hpp"
#include "mplp/simplex.hpp"
#include "mplp/sparse_linalg.hpp"

#include <optional>
#include <string>

namespace mplp {

enum class Sense { kMax, kMin };

/// One row a'x (<= or =) w + f'theta.
struct ParamRow {
  Vector a;
  double w = 0.0;
  Vector f;  // length q, or empty for no parameter dependence
};

struct ParamLink {
  Index index = 0;     // parameter index
  double scale = 0.0;  // contribution scale * theta[index]
};

struct VarBound {
  Index var = 0;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<ParamLink> lo_param;
};

struct GeneralLP {
  Sense sense = Sense::kMax;
  Vector c;
  std::vector<ParamRow> ineq;
  std::vector<ParamRow> eq;
  std::vector<VarBound> bounds;  // variables without an entry are free
  Index q = 0;
  Vector box_lo;
  Vector box_hi;

  Index num_vars() const { return c.size(); }
};

enum class ColumnKind { kPositive, kNegative, kShifted, kReflected, kIneqSlack, kBoundSlack };

struct ColumnOrigin {
  ColumnKind kind;
  Index index;  // original variable, or original inequality row for kIneqSlack

  bool is_slack() const { return kind == ColumnKind::kIneqSlack || kind == ColumnKind::kBoundSlack; }
};

/// max c'x s.t. Ax = w + F theta, x >= 0, with the map back to the original
/// variables: original = R x + r + T theta.
struct StandardFormLP {
  SparseMatrix A;
  Vector w;
  SparseMatrix F;
  Vector c;

  Matrix R;
  Vector r;
  Matrix T;
  double objective_sign = 1.0;  // original objective = sign * c'x + offset + offset_theta'theta
  double objective_offset = 0.0;
  Vector objective_theta;
  std::vector<ColumnOrigin> columns;

  Vector box_lo;
  Vector box_hi;

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }
  Index q() const { return F.cols(); }

  Vector rhs(const Vector& theta) const {
    if (theta.size() != q()) throw Error(ErrorCode::kFormat, "parameter dimension mismatch");
    return w + F * theta;
  }

  Vector recover(const Vector& x, const Vector& theta) const { return R * x + r + T * theta; }

  double original_objective(double z, const Vector& theta) const {
    double v = objective_sign * z + objective_offset;
    if (objective_theta.size() == theta.size() && theta.size() > 0) v += objective_theta.dot(theta);
    return v;
  }

  /// Standard column that holds the slack of original inequality row i, or -1.
  Index slack_column_of_row(Index row) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].kind == ColumnKind::kIneqSlack && columns[j].index == row) return static_cast<Index>(j);
    }
    return -1;
  }

  /// Partner column of a split free variable, or -1.
  Index split_partner(Index j) const {
    const auto& o = columns[static_cast<std::size_t>(j)];
    if (o.kind != ColumnKind::kPositive && o.kind != ColumnKind::kNegative) return -1;
    const ColumnKind want = o.kind == ColumnKind::kPositive ? ColumnKind::kNegative : ColumnKind::kPositive;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k].kind == want && columns[k].index == o.index) return static_cast<Index>(k);
    }
    return -1;
  }

  /// Builds a problem directly in standard form (identity recovery map).
  static StandardFormLP direct(const Matrix& a, const Vector& w, const Matrix& f, const Vector& c) {
    if (a.rows() != w.size() || f.rows() != a.rows() || c.size() != a.cols()) {
      throw Error(ErrorCode::kFormat, "standard form: inconsistent dimensions");
    }
    StandardFormLP lp;
    lp.A = SparseMatrix::from_dense(a);
    lp.w = w;
    lp.F = SparseMatrix::from_dense(f);
    lp.c = c;
    lp.R = Matrix::Identity(a.cols(), a.cols());
    lp.r = Vector::Zero(a.cols());
    lp.T = Matrix::Zero(a.cols(), f.cols());
    lp.objective_theta = Vector::Zero(f.cols());
    for (Index j = 0; j < a.cols(); ++j) lp.columns.push_back({ColumnKind::kShifted, j});
    lp.box_lo = Vector::Zero(f.cols());
    lp.box_hi = Vector::Ones(f.cols());
    return lp;
  }
};

/// [A' c] must have full column rank and m <= n.
inline void check_well_conditioned(const StandardFormLP& lp) {
  if (lp.m() > lp.n()) throw Error(ErrorCode::kIllPosed, "more equality rows than variables");
  Matrix g(lp.n(), lp.m() + 1);
  g.leftCols(lp.m()) = lp.A.dense().transpose();
  g.col(lp.m()) = lp.c;
  if (!check_full_column_rank(g)) throw Error(ErrorCode::kIllPosed, "[A' c] is rank deficient");
}

inline StandardFormLP to_standard_form(const GeneralLP& g) {
  const Index n0 = g.num_vars();
  const Index q = g.q;
  auto check_row = [&](const ParamRow& row, const char* what) {
    if (row.a.size() != n0) throw Error(ErrorCode::kFormat, std::string(what) + " row has wrong length");
    if (row.f.size() != 0 && row.f.size() != q) throw Error(ErrorCode::kFormat, std::string(what) + " row parameter length");
  };
  for (const auto& row : g.ineq) check_row(row, "inequality");
  for (const auto& row : g.eq) check_row(row, "equality");
  if (g.box_lo.size() != q || g.box_hi.size() != q) throw Error(ErrorCode::kFormat, "box dimension does not match parameters");

  std::vector<const VarBound*> bound_of(static_cast<std::size_t>(n0), nullptr);
  for (const auto& b : g.bounds) {
    if (b.var < 0 || b.var >= n0) throw Error(ErrorCode::kFormat, "bound on unknown variable " + std::to_string(b.var));
    if (bound_of[static_cast<std::size_t>(b.var)]) throw Error(ErrorCode::kFormat, "duplicate bound for variable " + std::to_string(b.var));
    if (b.lo_param && (b.lo_param->index < 0 || b.lo_param->index >= q)) throw Error(ErrorCode::kFormat, "bound parameter index out of range");
    bound_of[static_cast<std::size_t>(b.var)] = &b;
  }

  // variable substitution: x_orig = R x + r + T theta
  std::vector<ColumnOrigin> cols;
  std::vector<std::pair<Index, double>> colmap;  // (orig var, coefficient)
  Vector r = Vector::Zero(n0);
  Matrix T = Matrix::Zero(n0, q);
  struct UpperRow { Index col; double hi_minus_lo; Index pidx; double pscale; };
  std::vector<UpperRow> upper_rows;

  for (Index j = 0; j < n0; ++j) {
    const VarBound* b = bound_of[static_cast<std::size_t>(j)];
    const bool has_lo = b && (b->lo || b->lo_param);
    const bool has_hi = b && b->hi;
    if (!has_lo && !has_hi) {
      cols.push_back({ColumnKind::kPositive, j});
      colmap.emplace_back(j, 1.0);
      cols.push_back({ColumnKind::kNegative, j});
      colmap.emplace_back(j, -1.0);
    } else if (has_lo) {
      const double lo = b->lo.value_or(0.0);
      r(j) = lo;
      if (b->lo_param) T(j, b->lo_param->index) = b->lo_param->scale;
      if (has_hi && !b->lo_param && *b->hi == lo) continue;  // fixed: substituted out
      if (has_hi && !b->lo_param && *b->hi < lo) throw Error(ErrorCode::kFormat, "lower bound above upper bound");
      cols.push_back({ColumnKind::kShifted, j});
      colmap.emplace_back(j, 1.0);
      if (has_hi) {
        upper_rows.push_back({static_cast<Index>(cols.size()) - 1, *b->hi - lo,
                              b->lo_param ? b->lo_param->index : -1, b->lo_param ? b->lo_param->scale : 0.0});
      }
    } else {
      r(j) = *b->hi;
      cols.push_back({ColumnKind::kReflected, j});
      colmap.emplace_back(j, -1.0);
    }
  }
  const Index ndec = static_cast<Index>(cols.size());
  Matrix R = Matrix::Zero(n0, ndec);
  for (Index k = 0; k < ndec; ++k) R(colmap[static_cast<std::size_t>(k)].first, k) = colmap[static_cast<std::size_t>(k)].second;

  const Index m_eq = static_cast<Index>(g.eq.size());
  const Index m_in = static_cast<Index>(g.ineq.size());
  const Index m_ub = static_cast<Index>(upper_rows.size());
  const Index m = m_eq + m_in + m_ub;
  const Index n = ndec + m_in + m_ub;

  Matrix a = Matrix::Zero(m, n);
  Vector w = Vector::Zero(m);
  Matrix f = Matrix::Zero(m, q);
  auto put_row = [&](Index i, const ParamRow& row) {
    a.row(i).head(ndec) = row.a.transpose() * R;
    w(i) = row.w - row.a.dot(r);
    if (row.f.size() == q) f.row(i) = row.f.transpose();
    if (q > 0) f.row(i) -= row.a.transpose() * T;
  };
  Index i = 0;
  for (const auto& row : g.eq) put_row(i++, row);
  for (Index k = 0; k < m_in; ++k) {
    put_row(i, g.ineq[static_cast<std::size_t>(k)]);
    a(i, ndec + k) = 1.0;
    cols.push_back({ColumnKind::kIneqSlack, k});
    ++i;
  }
  for (Index k = 0; k < m_ub; ++k) {
    const auto& ub = upper_rows[static_cast<std::size_t>(k)];
    a(i, ub.col) = 1.0;
    a(i, ndec + m_in + k) = 1.0;
    w(i) = ub.hi_minus_lo;
    if (ub.pidx >= 0) f(i, ub.pidx) = -ub.pscale;
    cols.push_back({ColumnKind::kBoundSlack, cols[static_cast<std::size_t>(ub.col)].index});
    ++i;
  }

  StandardFormLP lp;
  const double sign = g.sense == Sense::kMax ? 1.0 : -1.0;
  Vector cstd = Vector::Zero(n);
  cstd.head(ndec) = sign * (R.transpose() * g.c);
  lp.A = SparseMatrix::from_dense(a);
  lp.w = w;
  lp.F = SparseMatrix::from_dense(f);
  lp.c = cstd;
  lp.R = Matrix::Zero(n0, n);
  lp.R.leftCols(ndec) = R;
  lp.r = r;
  lp.T = T;
  lp.objective_sign = sign;
  lp.objective_offset = g.c.dot(r);
  lp.objective_theta = T.transpose() * g.c;
  lp.columns = std::move(cols);
  lp.box_lo = g.box_lo;
  lp.box_hi = g.box_hi;
  return lp;
}

struct VertexSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  IndexList basis;
  Vector lambda;  // c + A'lambda + mu = 0
  Vector mu;
  double z = 0.0;  // c'x in the maximization sense
};

namespace detail {

inline VertexSolution from_simplex(const SimplexResult& s, const Vector& c) {
  VertexSolution v;
  v.status = s.status;
  if (s.status != LpStatus::kOptimal) return v;
  v.x = s.x;
  v.basis = s.basis;
  v.lambda = s.y;
  v.mu = s.d;
  v.z = c.dot(s.x);
  return v;
}

}  // namespace detail

/// Solves the standard-form problem at theta (maximization of c'x).
inline VertexSolution solve_lp(const StandardFormLP& lp, const Vector& theta) {
  const Vector b = lp.rhs(theta);
  return detail::from_simplex(simplex_solve(lp.A.dense(), b, -lp.c), lp.c);
}

/// Maps original-variable auxiliary costs into standard coordinates using the
/// same sign normalization as the primary objective.
inline Vector auxiliary_cost_to_standard(const StandardFormLP& lp, const Vector& d_orig) {
  if (d_orig.size() != lp.R.rows()) throw Error(ErrorCode::kFormat, "auxiliary cost length mismatch");
  return lp.objective_sign * (lp.R.transpose() * d_orig);
}

/// Each auxiliary cost (standard coordinates) is minimized over the optimal
/// set of all previous levels.
inline VertexSolution lexicographic_solve(const StandardFormLP& lp, const std::vector<Vector>& costs,
                                          const Vector& theta, const Tolerances& tol = default_tolerances()) {
  VertexSolution primary = solve_lp(lp, theta);
  if (costs.empty() || primary.status != LpStatus::kOptimal) return primary;

  const Index m = lp.m();
  const Index n = lp.n();
  Matrix dep(n, m + 1 + static_cast<Index>(costs.size()));
  dep.leftCols(m) = lp.A.dense().transpose();
  dep.col(m) = lp.c;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (costs[k].size() != n) throw Error(ErrorCode::kFormat, "auxiliary cost length mismatch");
    dep.col(m + 1 + static_cast<Index>(k)) = costs[k];
  }
  if (!check_full_column_rank(dep, tol.rank)) {
    throw Error(ErrorCode::kIllPosed, "auxiliary costs are not independent of the constraint rows");
  }

  Matrix a = lp.A.dense();
  Vector b = lp.rhs(theta);
  auto append = [&](const Vector& row, double value) {
    a.conservativeResize(a.rows() + 1, Eigen::NoChange);
    a.row(a.rows() - 1) = row.transpose();
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = value;
  };
  append(lp.c, primary.z);
  SimplexResult level;
  for (const auto& d : costs) {
    level = simplex_solve(a, b, d);
    if (level.status == LpStatus::kUnbounded) throw Error(ErrorCode::kUnboundedAuxiliary, "auxiliary level is unbounded");
    if (level.status != LpStatus::kOptimal) throw Error(ErrorCode::kSolverFailure, "lexicographic level lost feasibility");
    append(d, level.objective);
  }
  VertexSolution out = primary;
  out.x = level.x;
  out.basis = level.basis;
  out.z = lp.c.dot(out.x);
  // any primal optimum pairs with any dual optimum, so the primary duals stay valid
  (void)tol;
  return out;
}

enum class Multiplicity { kUnique, kMultiple };

/// Optimal face has dimension >= 1 iff some zero variable with zero reduced
/// cost can be made positive while staying optimal. Split free variables
/// always admit the trivial ray (x+ + t, x- + t), so they are left out of the
/// auxiliary objective; moves that only touch free variables are caught by a
/// rank test on the support columns instead.
inline Multiplicity multiplicity_check(const StandardFormLP& lp, const VertexSolution& sol, const Vector& theta,
                                       const Tolerances& tol = default_tolerances()) {
  if (sol.status != LpStatus::kOptimal) throw Error(ErrorCode::kSolverFailure, "multiplicity check needs an optimal solution");
  const Vector b = lp.rhs(theta);
  const double tz = tol.zero_threshold(b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  const double dual_scale = std::max(1.0, lp.c.cwiseAbs().maxCoeff());
  Matrix g(lp.m() + 1, lp.n());
  g.topRows(lp.m()) = lp.A.dense();
  g.row(lp.m()) = lp.c.transpose();

  Vector cost = Vector::Zero(lp.n());
  bool any = false;
  IndexList cols;
  const double dtol = tol.dual * dual_scale;
  for (Index j = 0; j < lp.n(); ++j) {
    const Index partner = lp.columns.empty() ? -1 : lp.split_partner(j);
    // a free pair: both halves move at no cost, so only the difference matters
    if (partner >= 0 && std::abs(sol.mu(j)) <= dtol && std::abs(sol.mu(partner)) <= dtol) {
      if (lp.columns[static_cast<std::size_t>(j)].kind == ColumnKind::kPositive) cols.push_back(j);
      continue;
    }
    if (sol.x(j) > tz) {
      cols.push_back(j);
    } else if (std::abs(sol.mu(j)) <= dtol) {
      cost(j) = -1.0;
      any = true;
    }
  }
  if (!cols.empty()) {
    Matrix sub(g.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = g.col(cols[k]);
    if (!check_full_column_rank(sub, tol.rank)) return Multiplicity::kMultiple;
  }
  if (!any) return Multiplicity::kUnique;
  Vector rhs(lp.m() + 1);
  rhs.head(lp.m()) = b;
  rhs(lp.m()) = sol.z;
  SimplexResult aux = simplex_solve(g, rhs, cost);
  if (aux.status == LpStatus::kUnbounded) return Multiplicity::kMultiple;
  if (aux.status != LpStatus::kOptimal) throw Error(ErrorCode::kSolverFailure, "multiplicity auxiliary LP infeasible");
  return -aux.objective > tz ? Multiplicity::kMultiple : Multiplicity::kUnique;
}

struct DegeneracyInfo {
  Index bnd = 0;
  Index dim = 0;
  Index sigma = 0;
  bool degenerate() const { return sigma > 0; }
};

inline DegeneracyInfo degeneracy_degree(Index bnd, Index dim, Index n) {
  if (dim < 0 || dim > n) throw Error(ErrorCode::kDomain, "face dimension out of range");
  return {bnd, dim, bnd + dim - n};
}

}  // namespace mplp
