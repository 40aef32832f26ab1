#pragma once

// Critical-region construction for the four solution cases, multiplicity
// resolution and the recursive partition of the parameter box.

#include "mplp/common.hpp"
#include "mplp/face_geometry.hpp"
#include "mplp/lp_engine.hpp"
#include "mplp/sparse_linalg.hpp"

#include <atomic>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace mplp {

enum class CaseTag { kUniqueNondegenerate, kUniqueDegenerate, kMultipleNondegenerate, kMultipleDegenerate };
enum class Resolution { kNone, kLex, kEqCost, kQp };
enum class QpNorm { kDecision, kFull };

inline const char* to_string(CaseTag t) {
  switch (t) {
    case CaseTag::kUniqueNondegenerate: return "unique-nondegenerate";
    case CaseTag::kUniqueDegenerate: return "unique-degenerate";
    case CaseTag::kMultipleNondegenerate: return "multiple-nondegenerate";
    case CaseTag::kMultipleDegenerate: return "multiple-degenerate";
  }
  return "unknown";
}

inline const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::kNone: return "none";
    case Resolution::kLex: return "lex";
    case Resolution::kEqCost: return "eqcost";
    case Resolution::kQp: return "qp";
  }
  return "unknown";
}

inline CaseTag case_tag_from_string(const std::string& s) {
  if (s == "unique-nondegenerate") return CaseTag::kUniqueNondegenerate;
  if (s == "unique-degenerate") return CaseTag::kUniqueDegenerate;
  if (s == "multiple-nondegenerate") return CaseTag::kMultipleNondegenerate;
  if (s == "multiple-degenerate") return CaseTag::kMultipleDegenerate;
  throw Error(ErrorCode::kFormat, "unknown case tag '" + s + "'");
}

inline Resolution resolution_from_string(const std::string& s) {
  if (s == "none") return Resolution::kNone;
  if (s == "lex") return Resolution::kLex;
  if (s == "eqcost") return Resolution::kEqCost;
  if (s == "qp") return Resolution::kQp;
  throw Error(ErrorCode::kFormat, "unknown resolution '" + s + "'");
}

struct IndexPartition {
  IndexList J1, J0;
  IndexList J11, J10;  // second level, empty unless multiplicity is resolved by the QP
  Permutation P;

  Index n1() const { return static_cast<Index>(J1.size()); }
  Index n0() const { return static_cast<Index>(J0.size()); }
  bool two_level() const { return !J11.empty(); }
};

inline IndexPartition make_partition(const IndexList& j1, Index n) {
  IndexPartition p;
  p.P = permutation_from_partition(j1, n);
  p.J1 = j1;
  std::sort(p.J1.begin(), p.J1.end());
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Index j : j1) in[static_cast<std::size_t>(j)] = 1;
  for (Index j = 0; j < n; ++j) {
    if (!in[static_cast<std::size_t>(j)]) p.J0.push_back(j);
  }
  return p;
}

/// theta -> E theta + e
struct AffineMap {
  Matrix E;
  Vector e;

  Vector operator()(const Vector& theta) const { return E * theta + e; }
};

struct SolutionTriple {
  AffineMap primal;  // full standard-form x
  AffineMap lambda;  // particular (minimum-norm) equality dual
  Matrix Z;          // null-space directions of the equality dual
  AffineMap mu;      // bound duals with the null-space part set to zero
};

struct CriticalRegion {
  Index id = 0;
  HPolyhedron region;
  CaseTag tag = CaseTag::kUniqueNondegenerate;
  IndexPartition partition;
  SolutionTriple solution;
  IndexList zero_set;       // zero variables of the solution map
  IndexList optimal_active; // zero on the whole optimal face
  Resolution method = Resolution::kNone;
  std::string mode_key;
  Vector probe;
};

struct PartitionConfig {
  Resolution resolution = Resolution::kEqCost;
  std::vector<Vector> lex_costs;  // standard coordinates, minimized in order
  std::uint64_t seed = 0;
  double U = 1e6;
  QpNorm qp_norm = QpNorm::kDecision;
  Index workers = 1;
  Index max_pops = 50000;
  Tolerances tol = default_tolerances();
};

struct Partition {
  std::string fingerprint;
  std::vector<CriticalRegion> regions;
  std::vector<HPolyhedron> infeasible;
  std::vector<HPolyhedron> unresolved;
  PartitionConfig config;
  Vector eq_cost;  // the equivalent cost vector when resolution = eqcost
  HPolyhedron box;
  Index pops = 0;

  std::size_t merged_count() const {
    std::set<std::string> keys;
    for (const auto& r : regions) keys.insert(r.mode_key);
    return keys.size();
  }

  bool complete() const { return unresolved.empty(); }

  /// Ids of regions whose closure contains theta.
  IndexList locate(const Vector& theta, double tol = 1e-9) const {
    IndexList out;
    for (const auto& r : regions) {
      if (r.region.contains(theta, tol)) out.push_back(r.id);
    }
    return out;
  }
};

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h) {
  const Index dims[2] = {m.rows(), m.cols()};
  h = fnv1a(dims, sizeof(dims), h);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j) == 0.0 ? 0.0 : m(i, j);  // fold -0
      h = fnv1a(&v, sizeof(v), h);
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline double rhs_norm(const Vector& b) { return b.size() ? b.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

inline std::string problem_fingerprint(const StandardFormLP& lp) {
  std::uint64_t h = 1469598103934665603ULL;
  h = detail::hash_matrix(lp.A.dense(), h);
  h = detail::hash_matrix(lp.w, h);
  h = detail::hash_matrix(lp.F.dense(), h);
  h = detail::hash_matrix(lp.c, h);
  return detail::hex64(h);
}

/// Removes the common part of each split free-variable pair.
inline Vector canonical_point(const StandardFormLP& lp, const Vector& x) {
  Vector out = x;
  for (Index j = 0; j < lp.n() && !lp.columns.empty(); ++j) {
    if (lp.columns[static_cast<std::size_t>(j)].kind != ColumnKind::kPositive) continue;
    const Index p = lp.split_partner(j);
    if (p < 0) continue;
    const double common = std::min(out(j), out(p));
    out(j) -= common;
    out(p) -= common;
  }
  return out;
}

inline IndexList zero_indices(const Vector& x, double tz) {
  IndexList z;
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) <= tz) z.push_back(j);
  }
  return z;
}

inline IndexList support_indices(const Vector& x, double tz) {
  IndexList s;
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) > tz) s.push_back(j);
  }
  return s;
}

inline std::string mode_key_of(const IndexList& zeros) {
  std::ostringstream os;
  os << "z";
  for (std::size_t k = 0; k < zeros.size(); ++k) os << (k ? "," : ":") << zeros[k];
  return os.str();
}

struct Classification {
  Multiplicity multiplicity = Multiplicity::kUnique;
  CaseTag tag = CaseTag::kUniqueNondegenerate;
  IndexPartition partition;
  IndexList optimal_active;
  std::optional<OptimalFace> face;
  Vector face_center;  // relative-interior point of the optimal face
};

/// Decides uniqueness at theta0 and the first-level index partition.
inline Classification classify(const StandardFormLP& lp, const Vector& theta0, const VertexSolution& vertex,
                               const Tolerances& tol = default_tolerances()) {
  if (vertex.status != LpStatus::kOptimal) throw Error(ErrorCode::kSolverFailure, "classify needs an optimal vertex");
  const double tz = tol.zero_threshold(detail::rhs_norm(lp.rhs(theta0)));
  Classification cl;
  cl.multiplicity = multiplicity_check(lp, vertex, theta0, tol);
  if (cl.multiplicity == Multiplicity::kUnique) {
    cl.partition = make_partition(support_indices(vertex.x, tz), lp.n());
    cl.tag = cl.partition.n1() >= lp.m() ? CaseTag::kUniqueNondegenerate : CaseTag::kUniqueDegenerate;
    cl.optimal_active = zero_indices(canonical_point(lp, vertex.x), tz);
    cl.face_center = vertex.x;
    return cl;
  }
  cl.face = build_optimal_face(lp, theta0, vertex.z, vertex.x, tol);
  const double cap = 10.0 * std::max(1.0, vertex.x.cwiseAbs().maxCoeff());
  FaceCenter fc = chebyshev_center_face(*cl.face, cap);
  cl.face_center = fc.x;
  cl.partition = make_partition(support_indices(fc.x, tz), lp.n());
  cl.tag = CaseTag::kMultipleNondegenerate;
  cl.optimal_active = zero_indices(canonical_point(lp, fc.x), tz);
  return cl;
}

namespace detail {

inline Matrix columns_of(const Matrix& a, const IndexList& cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = a.col(cols[k]);
  return out;
}

// rows (I - A1 X)(w + F theta) = 0 as two-sided inequalities; rows that vanish identically are skipped
inline void append_consistency_rows(HPolyhedron& p, const Matrix& resid_op, const Vector& w, const Matrix& f,
                                    Index lifted_extra) {
  const Matrix rf = resid_op * f;
  const Vector rw = resid_op * w;
  const double scale = std::max(1.0, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
  for (Index i = 0; i < rf.rows(); ++i) {
    if (rf.row(i).norm() <= 1e-9 * std::max(1.0, f.norm()) && std::abs(rw(i)) <= 1e-9 * scale) continue;
    Vector row = Vector::Zero(f.cols() + lifted_extra);
    row.head(f.cols()) = rf.row(i).transpose();
    p.append_row(row, -rw(i));
    p.append_row(-row, rw(i));
  }
}

inline Vector scatter(const Vector& part, const IndexList& idx, Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = part(static_cast<Index>(k));
  return out;
}

inline Matrix scatter_rows(const Matrix& part, const IndexList& idx, Index n) {
  Matrix out = Matrix::Zero(n, part.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(idx[k]) = part.row(static_cast<Index>(k));
  return out;
}

}  // namespace detail

/// Unique solution (either case): x1 = (A1'A1)^-1 A1' b, region from primal
/// feasibility, plus the consistency rows when A1 is not square.
inline CriticalRegion build_cr_unique(const StandardFormLP& lp, const IndexPartition& part, const HPolyhedron& R,
                                      const Tolerances& tol = default_tolerances()) {
  const Index m = lp.m();
  const Index n = lp.n();
  const Index q = lp.q();
  const Matrix a = lp.A.dense();
  const Matrix f = lp.F.dense();
  const Matrix a1 = detail::columns_of(a, part.J1);
  const Matrix a0 = detail::columns_of(a, part.J0);
  if (!check_full_column_rank(a1, tol.rank)) throw Error(ErrorCode::kMisclassification, "nonzero columns are dependent");

  CriticalRegion cr;
  cr.partition = part;
  cr.tag = part.n1() >= m ? CaseTag::kUniqueNondegenerate : CaseTag::kUniqueDegenerate;

  Matrix L;  // x1 = L b
  if (part.n1() == 0) {
    L = Matrix(0, m);
  } else if (part.n1() == m) {
    Eigen::FullPivLU<Matrix> lu(a1);
    if (!lu.isInvertible()) throw Error(ErrorCode::kMisclassification, "square basis is singular");
    L = lu.inverse();
  } else {
    L = left_pinv(SparseMatrix::from_dense(a1));
  }
  const Vector c1 = detail::columns_of(lp.c.transpose(), part.J1).transpose();
  const Vector c0 = detail::columns_of(lp.c.transpose(), part.J0).transpose();
  Vector lambda_p = part.n1() == 0 ? Vector(Vector::Zero(m)) : min_norm_dual(SparseMatrix::from_dense(a1), c1);
  const Vector mu0 = -c0 - a0.transpose() * lambda_p;

  cr.solution.primal.E = detail::scatter_rows(L * f, part.J1, n);
  cr.solution.primal.e = detail::scatter(L * lp.w, part.J1, n);
  cr.solution.lambda.E = Matrix::Zero(m, q);
  cr.solution.lambda.e = lambda_p;
  cr.solution.Z = nullspace_basis(Matrix(a1.transpose()), tol.rank).basis;
  cr.solution.mu.E = Matrix::Zero(n, q);
  cr.solution.mu.e = detail::scatter(mu0, part.J0, n);

  HPolyhedron omega(-(L * f), L * lp.w);
  if (part.n1() < m) detail::append_consistency_rows(omega, Matrix::Identity(m, m) - a1 * L, lp.w, f, 0);
  cr.region = remove_redundant(intersect(omega, R), tol.zero_rel);
  return cr;
}

inline CriticalRegion build_cr_unique_nondegenerate(const StandardFormLP& lp, const IndexPartition& part,
                                                    const HPolyhedron& R, const Tolerances& tol = default_tolerances()) {
  if (part.n1() != lp.m()) throw Error(ErrorCode::kMisclassification, "nondegenerate case needs n1 = m");
  return build_cr_unique(lp, part, R, tol);
}

inline CriticalRegion build_cr_unique_degenerate(const StandardFormLP& lp, const IndexPartition& part,
                                                 const HPolyhedron& R, const Tolerances& tol = default_tolerances()) {
  if (part.n1() > lp.m()) throw Error(ErrorCode::kMisclassification, "degenerate case needs n1 <= m");
  return build_cr_unique(lp, part, R, tol);
}

inline Vector qp_weights(const StandardFormLP& lp, QpNorm norm) {
  Vector wts = Vector::Ones(lp.n());
  if (norm == QpNorm::kDecision) {
    for (Index j = 0; j < lp.n() && !lp.columns.empty(); ++j) {
      if (lp.columns[static_cast<std::size_t>(j)].is_slack()) wts(j) = 0.0;
    }
  }
  return wts;
}

namespace detail {

// [W A'; A 0]^+ restricted to the right-hand-side block: x = X b, lambda = Lam b
inline std::pair<Matrix, Matrix> qp_kkt_maps(const Matrix& a, const Vector& wts) {
  const Index m = a.rows();
  const Index k = a.cols();
  Matrix kkt = Matrix::Zero(k + m, k + m);
  kkt.topLeftCorner(k, k) = wts.asDiagonal();
  kkt.topRightCorner(k, m) = a.transpose();
  kkt.bottomLeftCorner(m, k) = a;
  const Matrix kp = pinv(kkt);
  return {kp.block(0, k, k, m), kp.block(k, k, m, m)};
}

}  // namespace detail

struct QpResolution {
  IndexPartition partition;  // J1/J0 with J11/J10 filled
  Vector x;                  // minimizer, full standard vector
};

/// Weighted minimum-norm point of {x : A x = b, x >= 0, x_J0 = 0} by a primal
/// active-set loop started at `start`, a relative-interior point of the face.
inline QpResolution resolve_multiplicity_qp(const StandardFormLP& lp, const IndexPartition& level1,
                                            const Vector& theta0, const Vector& start, QpNorm norm = QpNorm::kDecision,
                                            const Tolerances& tol = default_tolerances()) {
  const Vector b = lp.rhs(theta0);
  const double tz = tol.zero_threshold(detail::rhs_norm(b));
  const Matrix a = lp.A.dense();
  const Vector wall = qp_weights(lp, norm);
  const IndexList& j1 = level1.J1;
  const Index k = static_cast<Index>(j1.size());
  const Matrix a1 = detail::columns_of(a, j1);
  Vector wts(k);
  Vector x(k);
  for (Index i = 0; i < k; ++i) {
    wts(i) = wall(j1[static_cast<std::size_t>(i)]);
    x(i) = std::max(0.0, start(j1[static_cast<std::size_t>(i)]));
  }
  std::vector<char> fixed(static_cast<std::size_t>(k), 0);
  for (Index it = 0; it < 10 * (k + 1) + 100; ++it) {
    IndexList freeset;
    for (Index i = 0; i < k; ++i) {
      if (!fixed[static_cast<std::size_t>(i)]) freeset.push_back(i);
    }
    const Matrix af = detail::columns_of(a1, freeset);
    Vector wf(static_cast<Index>(freeset.size()));
    for (std::size_t t = 0; t < freeset.size(); ++t) wf(static_cast<Index>(t)) = wts(freeset[t]);
    auto [X, Lam] = detail::qp_kkt_maps(af, wf);
    const Vector xf = X * b;
    const Vector lam = Lam * b;
    Vector target = Vector::Zero(k);
    for (std::size_t t = 0; t < freeset.size(); ++t) target(freeset[t]) = xf(static_cast<Index>(t));
    const Vector p = target - x;
    if (p.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      // stationary on the working set: release the most negative multiplier
      Index worst = -1;
      double most = -tol.dual * std::max(1.0, lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0);
      for (Index i = 0; i < k; ++i) {
        if (!fixed[static_cast<std::size_t>(i)]) continue;
        const double mu = a1.col(i).dot(lam);
        if (mu < most) {
          most = mu;
          worst = i;
        }
      }
      if (worst < 0) break;
      fixed[static_cast<std::size_t>(worst)] = 0;
      continue;
    }
    double alpha = 1.0;
    Index block = -1;
    for (Index i = 0; i < k; ++i) {
      if (fixed[static_cast<std::size_t>(i)] || p(i) >= 0.0) continue;
      const double step = x(i) / -p(i);
      if (step < alpha) {
        alpha = step;
        block = i;
      }
    }
    x += alpha * p;
    if (block >= 0) {
      x(block) = 0.0;
      fixed[static_cast<std::size_t>(block)] = 1;
    }
  }
  QpResolution out;
  out.partition = level1;
  out.x = Vector::Zero(lp.n());
  for (Index i = 0; i < k; ++i) {
    const Index j = j1[static_cast<std::size_t>(i)];
    out.x(j) = std::max(0.0, x(i));
    if (x(i) > tz) out.partition.J11.push_back(j);
    else out.partition.J10.push_back(j);
  }
  return out;
}

/// Multiple-optima region from the two-level partition. Degenerate instances
/// (A11 without full row rank) are built over (theta, lambda_z) and projected.
inline CriticalRegion build_cr_multiple(const StandardFormLP& lp, const IndexPartition& part, const HPolyhedron& R,
                                        QpNorm norm = QpNorm::kDecision, const Tolerances& tol = default_tolerances()) {
  const Index m = lp.m();
  const Index n = lp.n();
  const Index q = lp.q();
  const Matrix a = lp.A.dense();
  const Matrix f = lp.F.dense();
  const Matrix a11 = detail::columns_of(a, part.J11);
  const Matrix a10 = detail::columns_of(a, part.J10);
  const Vector wall = qp_weights(lp, norm);
  Vector w11(static_cast<Index>(part.J11.size()));
  for (std::size_t k = 0; k < part.J11.size(); ++k) w11(static_cast<Index>(k)) = wall(part.J11[k]);

  auto [X, Lam] = detail::qp_kkt_maps(a11, w11);
  const Matrix Z = nullspace_basis(Matrix(a11.transpose()), tol.rank).basis;
  const Index nz = Z.cols();
  const bool degenerate = matrix_rank(a11, tol.rank) < m;

  CriticalRegion cr;
  cr.partition = part;
  cr.tag = degenerate ? CaseTag::kMultipleDegenerate : CaseTag::kMultipleNondegenerate;
  cr.solution.primal.E = detail::scatter_rows(X * f, part.J11, n);
  cr.solution.primal.e = detail::scatter(X * lp.w, part.J11, n);
  cr.solution.lambda.E = Lam * f;
  cr.solution.lambda.e = Lam * lp.w;
  cr.solution.Z = Z;
  cr.solution.mu.E = detail::scatter_rows(a10.transpose() * Lam * f, part.J10, n);
  cr.solution.mu.e = detail::scatter(a10.transpose() * Lam * lp.w, part.J10, n);

  // lifted rows over (theta, lambda_z)
  const Index k11 = static_cast<Index>(part.J11.size());
  const Index k10 = static_cast<Index>(part.J10.size());
  Matrix M = Matrix::Zero(k11 + k10, q + nz);
  Vector t(k11 + k10);
  M.topLeftCorner(k11, q) = -(X * f);
  t.head(k11) = X * lp.w;
  if (k10 > 0) {
    M.bottomLeftCorner(k10, q) = -(a10.transpose() * Lam * f);
    if (nz > 0) M.bottomRightCorner(k10, nz) = -(a10.transpose() * Z);
    t.tail(k10) = a10.transpose() * Lam * lp.w;
  }
  HPolyhedron lifted(M, t);
  if (degenerate) detail::append_consistency_rows(lifted, Matrix::Identity(m, m) - a11 * X, lp.w, f, nz);
  // keep the projection bounded to R in theta
  Matrix rl = Matrix::Zero(R.rows(), q + nz);
  rl.leftCols(q) = R.M;
  lifted.append(rl, R.t);
  HPolyhedron omega = nz > 0 ? project_polyhedron(lifted, q) : lifted;
  cr.region = remove_redundant(omega, tol.zero_rel);
  return cr;
}

/// Strategy I: piece i keeps rows 0..i-1 of omega and reverses row i.
inline std::vector<HPolyhedron> split_remainder(const HPolyhedron& R, const HPolyhedron& omega, double min_radius) {
  std::vector<HPolyhedron> out;
  HPolyhedron acc = R;
  for (Index i = 0; i < omega.rows(); ++i) {
    HPolyhedron piece = acc;
    piece.append_row(-omega.M.row(i).transpose(), -omega.t(i));
    auto ball = chebyshev_center_region(piece);
    if (ball && ball->radius >= min_radius) out.push_back(remove_redundant(piece));
    acc.append_row(omega.M.row(i).transpose(), omega.t(i));
  }
  return out;
}

struct EquivalentCost {
  Vector d;
  Vector d_center;
  double radius = 0.0;
  Matrix cone;  // rows of (G'Q - I) d <= 0
  int attempts = 0;
};

/// Random cost whose minimizer over the optimal face is unique.
inline EquivalentCost equivalent_cost_vector(const StandardFormLP& lp, const Vector& theta0, double U,
                                             std::uint64_t seed, const Tolerances& tol = default_tolerances()) {
  const Index m = lp.m();
  const Index n = lp.n();
  const Index mm = m + 1;
  Matrix G(mm, n);
  G.topRows(m) = lp.A.dense();
  G.row(m) = -lp.c.transpose();

  // bounds |lambda| <= U that matter: decided on the recession cone {G'lambda <= 0}
  IndexList kept;  // 0..mm-1 upper, mm..2mm-1 lower
  {
    Matrix g(n + 2 * mm, mm);
    Vector h(n + 2 * mm);
    g.topRows(n) = G.transpose();
    h.head(n).setZero();
    g.middleRows(n, mm) = Matrix::Identity(mm, mm);
    g.bottomRows(mm) = -Matrix::Identity(mm, mm);
    h.tail(2 * mm).setOnes();
    for (Index i = 0; i < 2 * mm; ++i) {
      Vector dir = Vector::Zero(mm);
      dir(i % mm) = i < mm ? 1.0 : -1.0;
      InequalityLpResult r = solve_inequality_lp(-dir, g, h);
      if (r.status == LpStatus::kOptimal && dir.dot(r.z) > 1e-9) kept.push_back(i);
    }
  }
  const Index s = static_cast<Index>(kept.size());
  Matrix Gp(mm, n + s);
  Gp.leftCols(n) = G;
  for (Index k = 0; k < s; ++k) {
    const Index i = kept[static_cast<std::size_t>(k)];
    Gp.col(n + k) = Vector::Zero(mm);
    Gp(i % mm, n + k) = i < mm ? 1.0 : -1.0;
  }
  Eigen::LDLT<Matrix> ldlt(Gp * Gp.transpose());
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::kEquivalentCostFailure, "G' G'^T is singular");
  const Matrix QW = ldlt.solve(Gp);
  const Matrix Q = QW.leftCols(n);

  EquivalentCost ec;
  ec.cone = G.transpose() * Q - Matrix::Identity(n, n);

  HPolyhedron dset(ec.cone, Vector::Zero(n));
  dset.append(HPolyhedron::box(Vector::Constant(n, -U), Vector::Constant(n, U)).M,
              HPolyhedron::box(Vector::Constant(n, -U), Vector::Constant(n, U)).t);
  auto ball = chebyshev_center_region(dset, 2 * U);
  if (!ball) throw Error(ErrorCode::kEquivalentCostFailure, "cone of desirable directions is empty");
  ec.d_center = ball->center / U;
  ec.radius = ball->radius / U;
  double amp = std::max(ball->radius / U, 1e-3 * ball->center.cwiseAbs().maxCoeff());
  if (amp <= 0.0) amp = 1e-3 * U;

  VertexSolution primary = solve_lp(lp, theta0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  StandardFormLP aux;
  if (primary.status == LpStatus::kOptimal) {
    Matrix a2(m + 1, n);
    a2.topRows(m) = lp.A.dense();
    a2.row(m) = lp.c.transpose();
    Vector w2(m + 1);
    w2.head(m) = lp.rhs(theta0);
    w2(m) = primary.z;
    aux = StandardFormLP::direct(a2, w2, Matrix::Zero(m + 1, 0), Vector::Zero(n));
    aux.columns = lp.columns;
  }
  for (int attempt = 1; attempt <= 5; ++attempt) {
    ec.attempts = attempt;
    Vector t(n);
    for (Index j = 0; j < n; ++j) t(j) = unif(rng);
    const Vector d = (ball->center + amp * t) / U;
    if ((ec.cone * d).maxCoeff() > 1e-8) continue;
    if (primary.status == LpStatus::kOptimal) {
      aux.c = -d;
      VertexSolution as = solve_lp(aux, Vector(0));
      if (as.status != LpStatus::kOptimal) continue;
      if (multiplicity_check(aux, as, Vector(0), tol) != Multiplicity::kUnique) continue;
    }
    ec.d = d;
    return ec;
  }
  throw Error(ErrorCode::kEquivalentCostFailure, "no draw gave a unique auxiliary optimum");
}

namespace detail {

struct RegionOutcome {
  enum Kind { kDropped, kRegion, kInfeasible, kUnresolved } kind = kDropped;
  CriticalRegion cr;
  std::vector<HPolyhedron> children;
  HPolyhedron hull;
};

// joint LP: exists theta in R and x >= 0 with A x - F theta = w
inline std::optional<Vector> feasible_parameter(const StandardFormLP& lp, const HPolyhedron& R) {
  const Index m = lp.m();
  const Index n = lp.n();
  const Index q = lp.q();
  const Index k = R.rows();
  // variables: x (n), theta+ (q), theta- (q), slack (k)
  Matrix a = Matrix::Zero(m + k, n + 2 * q + k);
  Vector b(m + k);
  a.topLeftCorner(m, n) = lp.A.dense();
  a.block(0, n, m, q) = -lp.F.dense();
  a.block(0, n + q, m, q) = lp.F.dense();
  b.head(m) = lp.w;
  a.block(m, n, k, q) = R.M;
  a.block(m, n + q, k, q) = -R.M;
  a.bottomRightCorner(k, k) = Matrix::Identity(k, k);
  b.tail(k) = R.t;
  SimplexResult r = simplex_solve(a, b, Vector::Zero(n + 2 * q + k));
  if (r.status != LpStatus::kOptimal) return std::nullopt;
  return Vector(r.x.segment(n, q) - r.x.segment(n + q, q));
}

// Farkas ray at an infeasible theta0: y with A'y <= 0 and y'(w + F theta0) > 0.
// Every theta with y'(w + F theta) > 0 is infeasible too.
inline std::optional<HPolyhedron> infeasibility_halfspace(const StandardFormLP& lp, const Vector& theta0) {
  const Index m = lp.m();
  const Vector b = lp.rhs(theta0);
  Matrix g(lp.n() + 1, m);
  g.topRows(lp.n()) = lp.A.transpose().dense();
  g.row(lp.n()) = b.transpose();
  Vector h = Vector::Zero(lp.n() + 1);
  h(lp.n()) = 1.0;
  InequalityLpResult r = solve_inequality_lp(-b, g, h);
  if (r.status != LpStatus::kOptimal || r.objective > -0.5) return std::nullopt;
  const Vector y = r.z;
  // closure of {theta : y'(w + F theta) > 0}
  Vector row = -lp.F.transpose_times(y);
  return HPolyhedron(row.transpose(), Vector::Constant(1, y.dot(lp.w)));
}

}  // namespace detail

class Partitioner {
 public:
  Partitioner(const StandardFormLP& lp, PartitionConfig config) : lp_(lp), cfg_(std::move(config)) {}

  Partition run(const HPolyhedron& R1) {
    Partition out;
    out.fingerprint = problem_fingerprint(lp_);
    out.config = cfg_;
    out.box = R1;
    auto ball = chebyshev_center_region(R1);
    if (!ball || ball->radius <= 0.0) throw Error(ErrorCode::kDomain, "degenerate parameter box");
    diameter_ = 0.0;
    {
      // bounding-box diagonal of R1 as its diameter
      Vector lo(R1.dim()), hi(R1.dim());
      for (Index i = 0; i < R1.dim(); ++i) {
        Vector dir = Vector::Zero(R1.dim());
        dir(i) = 1.0;
        IndexList all;
        for (Index r = 0; r < R1.rows(); ++r) all.push_back(r);
        auto up = max_row_over(R1, dir, all);
        auto dn = max_row_over(R1, -dir, all);
        if (!up || !dn) throw Error(ErrorCode::kDomain, "parameter region must be bounded");
        hi(i) = *up;
        lo(i) = -*dn;
      }
      diameter_ = (hi - lo).norm();
    }
    min_radius_ = 1e-7 * diameter_;
    if (cfg_.resolution == Resolution::kEqCost) {
      eq_ = equivalent_cost_vector(lp_, ball->center, cfg_.U, cfg_.seed, cfg_.tol);
      out.eq_cost = eq_.d;
    }

    std::vector<HPolyhedron> generation{R1};
    Index pops = 0;
    while (!generation.empty()) {
      if (pops + static_cast<Index>(generation.size()) > cfg_.max_pops) {
        for (auto& g : generation) out.unresolved.push_back(g);
        break;
      }
      pops += static_cast<Index>(generation.size());
      std::vector<detail::RegionOutcome> results(generation.size());
      const Index nw = std::max<Index>(1, std::min<Index>(cfg_.workers, static_cast<Index>(generation.size())));
      if (nw == 1) {
        for (std::size_t i = 0; i < generation.size(); ++i) results[i] = process(generation[i]);
      } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nw));
        for (Index wkr = 0; wkr < nw; ++wkr) {
          pool.emplace_back([&, wkr] {
            try {
              for (std::size_t i = next++; i < generation.size(); i = next++) results[i] = process(generation[i]);
            } catch (...) {
              errs[static_cast<std::size_t>(wkr)] = std::current_exception();
            }
          });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs) {
          if (e) std::rethrow_exception(e);
        }
      }
      std::vector<HPolyhedron> next_gen;
      for (auto& r : results) {
        switch (r.kind) {
          case detail::RegionOutcome::kRegion:
            r.cr.id = static_cast<Index>(out.regions.size());
            out.regions.push_back(std::move(r.cr));
            break;
          case detail::RegionOutcome::kInfeasible: out.infeasible.push_back(r.hull); break;
          case detail::RegionOutcome::kUnresolved: out.unresolved.push_back(r.hull); break;
          case detail::RegionOutcome::kDropped: break;
        }
        for (auto& c : r.children) next_gen.push_back(std::move(c));
      }
      generation = std::move(next_gen);
    }
    out.pops = pops;
    return out;
  }

 private:
  // CR for an optimal probe; nullopt if the probe sits on a lower-dimensional piece
  std::optional<CriticalRegion> region_at(const HPolyhedron& R, const Vector& theta, const VertexSolution& sol) {
    const Tolerances& tol = cfg_.tol;
    Classification cl = classify(lp_, theta, sol, tol);
    CriticalRegion cr;
    const double tz = tol.zero_threshold(detail::rhs_norm(lp_.rhs(theta)));
    if (cl.multiplicity == Multiplicity::kUnique || cfg_.resolution == Resolution::kNone) {
      IndexPartition part = make_partition(support_indices(sol.x, tz), lp_.n());
      cr = build_cr_unique(lp_, part, R, tol);
      cr.zero_set = zero_indices(canonical_point(lp_, sol.x), tz);
      cr.method = cl.multiplicity == Multiplicity::kUnique ? Resolution::kNone : cfg_.resolution;
      cr.mode_key = mode_key_of(cl.optimal_active);
    } else if (cfg_.resolution == Resolution::kLex || cfg_.resolution == Resolution::kEqCost) {
      std::vector<Vector> costs = cfg_.resolution == Resolution::kLex ? cfg_.lex_costs : std::vector<Vector>{eq_.d};
      VertexSolution lex = lexicographic_solve(lp_, costs, theta, tol);
      IndexPartition part = make_partition(support_indices(lex.x, tz), lp_.n());
      cr = build_cr_unique(lp_, part, R, tol);
      cr.zero_set = zero_indices(canonical_point(lp_, lex.x), tz);
      cr.method = cfg_.resolution;
      cr.mode_key = mode_key_of(cr.zero_set);
    } else {
      QpResolution qp = resolve_multiplicity_qp(lp_, cl.partition, theta, cl.face_center, cfg_.qp_norm, tol);
      cr = build_cr_multiple(lp_, qp.partition, R, cfg_.qp_norm, tol);
      cr.zero_set = zero_indices(canonical_point(lp_, qp.x), tz);
      cr.method = Resolution::kQp;
      cr.mode_key = mode_key_of(cr.zero_set);
    }
    cr.optimal_active = cl.optimal_active;
    cr.probe = theta;
    if (cl.multiplicity == Multiplicity::kUnique && cfg_.resolution != Resolution::kNone) {
      cr.mode_key = mode_key_of(cr.zero_set);
    }
    if (cr.region.empty) return std::nullopt;
    auto ball = chebyshev_center_region(cr.region);
    if (!ball || ball->radius < min_radius_) return std::nullopt;
    return cr;
  }

  detail::RegionOutcome process(const HPolyhedron& R) {
    detail::RegionOutcome res;
    res.hull = R;
    auto ball = chebyshev_center_region(R);
    if (!ball || ball->radius < min_radius_) return res;

    std::uint64_t h = cfg_.seed ^ 0x9e3779b97f4a7c15ULL;
    h = detail::hash_matrix(ball->center, h);
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto perturbed = [&] {
      Vector u(R.dim());
      for (Index i = 0; i < u.size(); ++i) u(i) = unif(rng);
      if (u.norm() > 0) u /= u.norm();
      return Vector(ball->center + 0.5 * ball->radius * unif(rng) * u);
    };

    int infeasible_hits = 0;
    int thin_hits = 0;
    Vector theta = ball->center;
    for (int attempt = 0; attempt < 16; ++attempt) {
      VertexSolution sol = solve_lp(lp_, theta);
      if (sol.status == LpStatus::kUnbounded) {
        res.kind = detail::RegionOutcome::kUnresolved;
        return res;
      }
      if (sol.status == LpStatus::kInfeasible) {
        if (auto half = detail::infeasibility_halfspace(lp_, theta)) {
          HPolyhedron omega = remove_redundant(intersect(R, *half));
          auto inner = chebyshev_center_region(omega);
          if (inner && inner->radius >= min_radius_) {
            res.kind = detail::RegionOutcome::kInfeasible;
            res.hull = omega;
            res.children = split_remainder(R, omega, min_radius_);
            return res;
          }
        }
        if (++infeasible_hits > 4) {
          auto feas = detail::feasible_parameter(lp_, R);
          if (!feas) {
            res.kind = detail::RegionOutcome::kInfeasible;
            return res;
          }
          theta = *feas;
          infeasible_hits = -100;  // only certify once
          continue;
        }
        theta = perturbed();
        continue;
      }
      std::optional<CriticalRegion> cr;
      try {
        cr = region_at(R, theta, sol);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMisclassification && e.code() != ErrorCode::kProjectionOverflow &&
            e.code() != ErrorCode::kIllConditionedFace && e.code() != ErrorCode::kEmptyFace) {
          throw;
        }
      }
      if (cr) {
        res.kind = detail::RegionOutcome::kRegion;
        res.children = split_remainder(R, cr->region, min_radius_);
        res.cr = std::move(*cr);
        return res;
      }
      if (++thin_hits > 8) break;
      theta = perturbed();
    }
    res.kind = detail::RegionOutcome::kUnresolved;
    return res;
  }

  const StandardFormLP& lp_;
  PartitionConfig cfg_;
  EquivalentCost eq_;
  double diameter_ = 0.0;
  double min_radius_ = 0.0;
};

inline Partition partition(const StandardFormLP& lp, const HPolyhedron& R1, const PartitionConfig& config) {
  Partitioner p(lp, config);
  return p.run(R1);
}

}  // namespace mplp
