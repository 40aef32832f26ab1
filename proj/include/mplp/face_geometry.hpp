#pragma once

// Polyhedra in H-form, Chebyshev centers, redundancy removal, optimal faces
// and Fourier-Motzkin projection.

#include "mplp/common.hpp"
#include "mplp/lp_engine.hpp"
#include "mplp/simplex.hpp"
#include "mplp/sparse_linalg.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <optional>

namespace mplp {

/// {theta : M theta <= t}.
struct HPolyhedron {
  Matrix M;
  Vector t;
  bool minimal = false;
  bool empty = false;

  HPolyhedron() = default;
  HPolyhedron(Matrix m, Vector rhs) : M(std::move(m)), t(std::move(rhs)) {
    if (M.rows() != t.size()) throw Error(ErrorCode::kFormat, "polyhedron: row count mismatch");
  }

  static HPolyhedron box(const Vector& lo, const Vector& hi) {
    const Index q = lo.size();
    Matrix m(2 * q, q);
    m << Matrix::Identity(q, q), -Matrix::Identity(q, q);
    Vector t(2 * q);
    t << hi, -lo;
    return HPolyhedron(m, t);
  }

  static HPolyhedron empty_set(Index dim) {
    HPolyhedron p(Matrix(0, dim), Vector(0));
    p.empty = true;
    p.minimal = true;
    return p;
  }

  Index dim() const { return M.cols(); }
  Index rows() const { return M.rows(); }

  bool contains(const Vector& x, double tol = 1e-9) const {
    if (empty) return false;
    if (M.rows() == 0) return true;
    return ((M * x - t).array() <= tol).all();
  }

  /// Largest violation max_i (M_i x - t_i), or -inf with no rows.
  double violation(const Vector& x) const {
    if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
    return (M * x - t).maxCoeff();
  }

  void append(const Matrix& rows, const Vector& rhs) {
    const Index k = M.rows();
    M.conservativeResize(k + rows.rows(), std::max(M.cols(), rows.cols()));
    M.bottomRows(rows.rows()) = rows;
    t.conservativeResize(k + rhs.size());
    t.tail(rhs.size()) = rhs;
    minimal = false;
  }

  void append_row(const Vector& row, double rhs) { append(row.transpose(), Vector::Constant(1, rhs)); }
};

inline HPolyhedron intersect(const HPolyhedron& a, const HPolyhedron& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kFormat, "polyhedron dimension mismatch");
  if (a.empty || b.empty) return HPolyhedron::empty_set(a.dim());
  HPolyhedron out = a;
  out.append(b.M, b.t);
  return out;
}

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};

/// Center and radius of the largest inscribed ball; nullopt when empty.
/// `radius_cap` keeps the LP bounded on unbounded sets.
inline std::optional<ChebyshevBall> chebyshev_center_region(const HPolyhedron& p, double radius_cap = 1e6) {
  const Index q = p.dim();
  if (p.empty) return std::nullopt;
  const Index k = p.rows();
  Matrix g(k + 2, q + 1);
  Vector h(k + 2);
  for (Index i = 0; i < k; ++i) {
    g.row(i).head(q) = p.M.row(i);
    g(i, q) = p.M.row(i).norm();
    h(i) = p.t(i);
  }
  g.row(k).setZero();
  g(k, q) = -1.0;
  h(k) = 0.0;
  g.row(k + 1).setZero();
  g(k + 1, q) = 1.0;
  h(k + 1) = radius_cap;
  Vector c = Vector::Zero(q + 1);
  c(q) = -1.0;
  InequalityLpResult r = solve_inequality_lp(c, g, h);
  if (r.status != LpStatus::kOptimal) return std::nullopt;
  ChebyshevBall ball;
  ball.center = r.z.head(q);
  ball.radius = std::max(0.0, r.z(q));
  // the LP dual tolerance allows tiny violations; reject sets that are empty in fact
  if (k > 0 && p.violation(ball.center) > 1e-7 * std::max(1.0, p.t.cwiseAbs().maxCoeff())) return std::nullopt;
  return ball;
}

/// max M_i theta over the rows `others` of p; nullopt when unbounded.
inline std::optional<double> max_row_over(const HPolyhedron& p, const Vector& dir, const IndexList& others) {
  Matrix g(static_cast<Index>(others.size()), p.dim());
  Vector h(static_cast<Index>(others.size()));
  for (std::size_t k = 0; k < others.size(); ++k) {
    g.row(static_cast<Index>(k)) = p.M.row(others[k]);
    h(static_cast<Index>(k)) = p.t(others[k]);
  }
  InequalityLpResult r = solve_inequality_lp(-dir, g, h);
  if (r.status == LpStatus::kUnbounded) return std::nullopt;
  if (r.status != LpStatus::kOptimal) return -std::numeric_limits<double>::infinity();
  return dir.dot(r.z);
}

/// Drops every row whose removal does not change the set. Rows are
/// normalized; of duplicated rows one copy survives.
inline HPolyhedron remove_redundant(const HPolyhedron& p, double zero_rel = default_tolerances().zero_rel) {
  const Index q = p.dim();
  if (p.empty) return HPolyhedron::empty_set(q);
  Matrix m(0, q);
  Vector t(0);
  HPolyhedron norm(m, t);
  for (Index i = 0; i < p.rows(); ++i) {
    const double nrm = p.M.row(i).norm();
    if (nrm <= 1e-12) {
      if (p.t(i) < -1e-9) return HPolyhedron::empty_set(q);
      continue;  // 0 <= t, always true
    }
    norm.append_row(p.M.row(i).transpose() / nrm, p.t(i) / nrm);
  }
  if (!chebyshev_center_region(norm)) return HPolyhedron::empty_set(q);
  const double tz = zero_rel * std::max(1.0, norm.rows() ? norm.t.cwiseAbs().maxCoeff() : 0.0);

  std::vector<char> keep(static_cast<std::size_t>(norm.rows()), 1);
  for (Index i = 0; i < norm.rows(); ++i) {
    IndexList others;
    for (Index j = 0; j < norm.rows(); ++j) {
      if (j != i && keep[static_cast<std::size_t>(j)]) others.push_back(j);
    }
    if (others.empty()) continue;
    auto best = max_row_over(norm, norm.M.row(i).transpose(), others);
    if (best && *best <= norm.t(i) + tz) keep[static_cast<std::size_t>(i)] = 0;
  }
  HPolyhedron out(Matrix(0, q), Vector(0));
  for (Index i = 0; i < norm.rows(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) out.append_row(norm.M.row(i).transpose(), norm.t(i));
  }
  out.minimal = true;
  return out;
}

/// Fourier-Motzkin elimination of every coordinate past `keep`, pruning
/// redundant rows after each step.
inline HPolyhedron project_polyhedron(const HPolyhedron& lifted, Index keep, Index row_cap = 20000) {
  if (keep < 0 || keep > lifted.dim()) throw Error(ErrorCode::kFormat, "projection: bad coordinate count");
  if (lifted.dim() == keep) return lifted;
  if (lifted.empty) return HPolyhedron::empty_set(keep);
  HPolyhedron cur = remove_redundant(lifted);
  if (cur.empty) return HPolyhedron::empty_set(keep);
  for (Index col = lifted.dim() - 1; col >= keep; --col) {
    IndexList pos, neg, zero;
    for (Index i = 0; i < cur.rows(); ++i) {
      const double a = cur.M(i, col);
      const double scale = cur.M.row(i).norm();
      if (a > 1e-12 * scale) pos.push_back(i);
      else if (a < -1e-12 * scale) neg.push_back(i);
      else zero.push_back(i);
    }
    const std::size_t count = zero.size() + pos.size() * neg.size();
    if (count > static_cast<std::size_t>(row_cap)) {
      throw Error(ErrorCode::kProjectionOverflow, "Fourier-Motzkin produced " + std::to_string(count) + " rows");
    }
    Matrix m(static_cast<Index>(count), col);
    Vector t(static_cast<Index>(count));
    Index r = 0;
    for (Index i : zero) {
      m.row(r) = cur.M.row(i).head(col);
      t(r++) = cur.t(i);
    }
    for (Index p : pos) {
      for (Index n : neg) {
        const double ap = cur.M(p, col);
        const double an = -cur.M(n, col);
        m.row(r) = an * cur.M.row(p).head(col) + ap * cur.M.row(n).head(col);
        t(r++) = an * cur.t(p) + ap * cur.t(n);
      }
    }
    cur = remove_redundant(HPolyhedron(m, t));
    if (cur.empty) return HPolyhedron::empty_set(keep);
  }
  return cur;
}

/// Splits the rows of {y : N y + h >= 0} into explicit and implicit ones.
/// `feasible` is any point of the set; rows with positive slack there are
/// explicit without further work.
struct RowSplit {
  IndexList explicit_rows;
  IndexList implicit_rows;
};

inline RowSplit find_implicit_inequalities(const Matrix& n, const Vector& h, const Vector& feasible, double tz) {
  RowSplit out;
  const Vector slack = n * feasible + h;
  // LP over {y : -N y <= h}
  for (Index i = 0; i < n.rows(); ++i) {
    if (slack(i) > tz) {
      out.explicit_rows.push_back(i);
      continue;
    }
    if (n.row(i).norm() <= 1e-12) {
      out.implicit_rows.push_back(i);
      continue;
    }
    InequalityLpResult r = solve_inequality_lp(-n.row(i).transpose(), -n, h);
    if (r.status == LpStatus::kInfeasible) throw Error(ErrorCode::kEmptyFace, "face is empty");
    if (r.status == LpStatus::kUnbounded || n.row(i).dot(r.z) + h(i) > tz) {
      out.explicit_rows.push_back(i);
    } else {
      out.implicit_rows.push_back(i);
    }
  }
  return out;
}

struct OptimalFace {
  Matrix G;       // (m+1) x n: A stacked on -c'
  Vector v;       // b stacked on -z*
  Matrix N;       // orthonormal basis of ker G
  Vector h;       // minimum-norm solution of G h = v
  IndexList explicit_rows;
  IndexList implicit_rows;
  Matrix N_ex, N_im;
  Vector h_ex, h_im;
  Matrix aleph;   // orthonormal basis of ker N_im
  Vector y_p;     // min-norm solution of N_im y = -h_im

  Index dimension() const { return aleph.cols(); }

  Vector point(const Vector& u) const { return N * (aleph * u + y_p) + h; }
};

namespace detail {

// min-norm least squares; CGLS from a zero start, checked against the SVD
inline Vector min_norm_least_squares(const Matrix& a, const Vector& b) {
  if (a.rows() == 0 || a.cols() == 0) return Vector::Zero(a.cols());
  Eigen::SparseMatrix<double> as = a.sparseView(1.0, 1e-14);
  Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * std::max<Index>(a.cols(), 10));
  cg.compute(as);
  Vector x = cg.solve(b);
  const Vector normal = a.transpose() * (a * x - b);
  if (cg.info() == Eigen::Success && normal.norm() <= 1e-10 * std::max(1.0, b.norm()) * std::max(1.0, a.norm())) return x;
  return pinv(a) * b;
}

}  // namespace detail

/// Optimal face at theta for a problem with optimum z* (maximization sense).
/// `vertex` is any optimal point, used as the starting feasible point.
inline OptimalFace build_optimal_face(const StandardFormLP& lp, const Vector& theta, double zstar, const Vector& vertex,
                                      const Tolerances& tol = default_tolerances()) {
  const Index m = lp.m();
  const Index n = lp.n();
  OptimalFace f;
  f.G.resize(m + 1, n);
  f.G.topRows(m) = lp.A.dense();
  f.G.row(m) = -lp.c.transpose();
  const Vector b = lp.rhs(theta);
  f.v.resize(m + 1);
  f.v.head(m) = b;
  f.v(m) = -zstar;
  Matrix ggt = f.G * f.G.transpose();
  Eigen::LDLT<Matrix> ldlt(ggt);
  const Vector dd = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || dd.minCoeff() <= tol.rank * dd.cwiseAbs().maxCoeff()) {
    throw Error(ErrorCode::kIllConditionedFace, "G G' is singular");
  }
  f.h = f.G.transpose() * ldlt.solve(f.v);
  f.N = nullspace_basis(f.G, tol.rank).basis;
  // N is orthonormal, so entries this small are rounding noise; left in, a
  // zero row would look like rank 1 to the relative rank test below
  f.N = f.N.unaryExpr([](double x) { return std::abs(x) < 1e-13 ? 0.0 : x; });
  const double tz = tol.zero_threshold(b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  const Vector y0 = f.N.transpose() * (vertex - f.h);
  RowSplit split = find_implicit_inequalities(f.N, f.h, y0, tz);
  f.explicit_rows = split.explicit_rows;
  f.implicit_rows = split.implicit_rows;
  const Index nn = f.N.cols();
  f.N_ex.resize(static_cast<Index>(f.explicit_rows.size()), nn);
  f.h_ex.resize(static_cast<Index>(f.explicit_rows.size()));
  for (std::size_t k = 0; k < f.explicit_rows.size(); ++k) {
    f.N_ex.row(static_cast<Index>(k)) = f.N.row(f.explicit_rows[k]);
    f.h_ex(static_cast<Index>(k)) = f.h(f.explicit_rows[k]);
  }
  f.N_im.resize(static_cast<Index>(f.implicit_rows.size()), nn);
  f.h_im.resize(static_cast<Index>(f.implicit_rows.size()));
  for (std::size_t k = 0; k < f.implicit_rows.size(); ++k) {
    f.N_im.row(static_cast<Index>(k)) = f.N.row(f.implicit_rows[k]);
    f.h_im(static_cast<Index>(k)) = f.h(f.implicit_rows[k]);
  }
  if (f.implicit_rows.empty()) {
    f.aleph = Matrix::Identity(nn, nn);
    f.y_p = Vector::Zero(nn);
  } else {
    f.y_p = -detail::min_norm_least_squares(f.N_im, f.h_im);
    f.aleph = nullspace_basis(f.N_im, tol.rank).basis;
  }
  return f;
}

struct FaceCenter {
  Vector x;
  double radius = 0.0;
};

/// Chebyshev center of the face in its own affine hull, mapped back to x.
/// Unbounded faces get their radius capped at `radius_cap`.
inline FaceCenter chebyshev_center_face(const OptimalFace& f, double radius_cap) {
  const Index nx = f.dimension();
  if (nx == 0) {
    FaceCenter c{f.point(Vector(0)), 0.0};
    if (c.x.size() && c.x.minCoeff() < -1e-7 * std::max(1.0, c.x.cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::kEmptyFace, "face point is infeasible");
    }
    return c;
  }
  // rows: -(N_ex aleph) u + |.| r <= N_ex y_p + h_ex
  const Matrix na = f.N_ex * f.aleph;
  const Vector rhs = f.N_ex * f.y_p + f.h_ex;
  const Index k = na.rows();
  Matrix g(k + 1, nx + 1);
  Vector h(k + 1);
  for (Index i = 0; i < k; ++i) {
    g.row(i).head(nx) = -na.row(i);
    g(i, nx) = na.row(i).norm();
    h(i) = rhs(i);
  }
  g.row(k).setZero();
  g(k, nx) = 1.0;
  h(k) = radius_cap;
  Vector c = Vector::Zero(nx + 1);
  c(nx) = -1.0;
  InequalityLpResult r = solve_inequality_lp(c, g, h);
  if (r.status != LpStatus::kOptimal) throw Error(ErrorCode::kEmptyFace, "face Chebyshev LP failed");
  return {f.point(r.z.head(nx)), r.z(nx)};
}

/// Radius of the largest (q-1)-ball on the hyperplane of row k of p that lies
/// in both p and other; positive iff the two sets share that facet.
inline double shared_facet_radius(const HPolyhedron& p, Index k, const HPolyhedron& other) {
  const Index q = p.dim();
  const Vector a = p.M.row(k).transpose();
  const double an = a.norm();
  if (an <= 1e-12) return 0.0;
  const Vector u = a / an;
  HPolyhedron both = intersect(p, other);
  Matrix g(both.rows() + 3, q + 1);
  Vector h(both.rows() + 3);
  for (Index i = 0; i < both.rows(); ++i) {
    const Vector row = both.M.row(i).transpose();
    g.row(i).head(q) = row.transpose();
    g(i, q) = i == k ? 0.0 : (row - row.dot(u) * u).norm();
    h(i) = both.t(i);
  }
  const Index e = both.rows();
  g.row(e).head(q) = a.transpose();
  g(e, q) = 0.0;
  h(e) = p.t(k);
  g.row(e + 1).head(q) = -a.transpose();
  g(e + 1, q) = 0.0;
  h(e + 1) = -p.t(k);
  g.row(e + 2).setZero();
  g(e + 2, q) = 1.0;
  h(e + 2) = 1e6;
  Vector c = Vector::Zero(q + 1);
  c(q) = -1.0;
  InequalityLpResult r = solve_inequality_lp(c, g, h);
  if (r.status != LpStatus::kOptimal) return 0.0;
  return std::max(0.0, r.z(q));
}

struct SharedFacet {
  Index row = -1;     // row of the first polyhedron
  double radius = 0.0;
};

/// First facet of p shared with other (radius above min_radius), if any.
inline std::optional<SharedFacet> shared_facet(const HPolyhedron& p, const HPolyhedron& other, double min_radius) {
  if (p.empty || other.empty) return std::nullopt;
  for (Index k = 0; k < p.rows(); ++k) {
    // the neighbour must lie on the far side of this row
    const double rad = shared_facet_radius(p, k, other);
    if (rad > min_radius) return SharedFacet{k, rad};
  }
  return std::nullopt;
}

}  // namespace mplp
