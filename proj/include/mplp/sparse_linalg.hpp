#pragma once

// Sparse matrix kernel: storage, column permutations, pseudoinverse solves,
// null-space bases and rank tests.

#include "mplp/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <utility>

namespace mplp {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Coordinate-list interface over compressed-column storage.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::ColMajor>;

  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols) : data_(rows, cols) {}

  static SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& entries,
                                    double drop = default_tolerances().drop) {
    if (rows < 0 || cols < 0) throw Error(ErrorCode::kFormat, "negative matrix dimension");
    std::set<std::pair<Index, Index>> seen;
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(entries.size());
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
        throw Error(ErrorCode::kFormat, "triplet index out of range (" + std::to_string(t.row) +
                                            ", " + std::to_string(t.col) + ")");
      }
      if (!seen.emplace(t.row, t.col).second) {
        throw Error(ErrorCode::kFormat, "duplicate triplet (" + std::to_string(t.row) + ", " +
                                            std::to_string(t.col) + ")");
      }
      if (!std::isfinite(t.value)) throw Error(ErrorCode::kFormat, "non-finite matrix entry");
      if (std::abs(t.value) > drop) kept.emplace_back(t.row, t.col, t.value);
    }
    SparseMatrix m(rows, cols);
    m.data_.setFromTriplets(kept.begin(), kept.end());
    m.data_.makeCompressed();
    return m;
  }

  static SparseMatrix from_dense(const Matrix& dense, double drop = default_tolerances().drop) {
    SparseMatrix m(dense.rows(), dense.cols());
    m.data_ = dense.sparseView(1.0, drop);
    m.data_.makeCompressed();
    return m;
  }

  static SparseMatrix identity(Index n) {
    SparseMatrix m(n, n);
    m.data_.setIdentity();
    return m;
  }

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  Index nonzeros() const { return data_.nonZeros(); }

  const Storage& storage() const { return data_; }

  /// Entries in column-major order.
  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(data_.nonZeros()));
    for (Index k = 0; k < data_.outerSize(); ++k) {
      for (Storage::InnerIterator it(data_, k); it; ++it) out.push_back({it.row(), it.col(), it.value()});
    }
    return out;
  }

  double coeff(Index r, Index c) const { return data_.coeff(r, c); }

  Matrix dense() const { return Matrix(data_); }

  SparseMatrix transpose() const {
    SparseMatrix m(cols(), rows());
    m.data_ = data_.transpose();
    m.data_.makeCompressed();
    return m;
  }

  SparseMatrix select_columns(const IndexList& columns) const {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      for (Storage::InnerIterator it(data_, columns[k]); it; ++it) {
        entries.emplace_back(it.row(), static_cast<Index>(k), it.value());
      }
    }
    SparseMatrix m(rows(), static_cast<Index>(columns.size()));
    m.data_.setFromTriplets(entries.begin(), entries.end());
    m.data_.makeCompressed();
    return m;
  }

  Vector operator*(const Vector& x) const { return data_ * x; }
  Vector transpose_times(const Vector& y) const { return data_.transpose() * y; }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a.dense() - b.dense()).cwiseAbs().maxCoeff() == 0.0 || (a.rows() == 0 || a.cols() == 0);
  }

 private:
  Storage data_;
};

/// Column permutation placing a chosen index list first.
class Permutation {
 public:
  Permutation() = default;

  /// `forward[j]` is the new position of original column j; `inverse[k]` is
  /// the original column found at new position k.
  explicit Permutation(std::vector<Index> inverse) : inverse_(std::move(inverse)) {
    forward_.assign(inverse_.size(), -1);
    for (std::size_t k = 0; k < inverse_.size(); ++k) forward_[static_cast<std::size_t>(inverse_[k])] = static_cast<Index>(k);
  }

  Index size() const { return static_cast<Index>(inverse_.size()); }
  Index forward(Index j) const { return forward_[static_cast<std::size_t>(j)]; }
  Index inverse(Index k) const { return inverse_[static_cast<std::size_t>(k)]; }
  const std::vector<Index>& inverse_map() const { return inverse_; }

  /// P with P(l, k) = 1 iff l = inverse(k).
  Matrix matrix() const {
    Matrix p = Matrix::Zero(size(), size());
    for (Index k = 0; k < size(); ++k) p(inverse(k), k) = 1.0;
    return p;
  }

  /// A P: columns rearranged.
  SparseMatrix apply_columns(const SparseMatrix& a) const { return a.select_columns(inverse_); }

  /// P^T x: vector expressed in permuted coordinates.
  Vector to_permuted(const Vector& x) const {
    Vector out(size());
    for (Index k = 0; k < size(); ++k) out(k) = x(inverse(k));
    return out;
  }

  /// P x_bar: back to original coordinates.
  Vector from_permuted(const Vector& xbar) const {
    Vector out(size());
    for (Index k = 0; k < size(); ++k) out(inverse(k)) = xbar(k);
    return out;
  }

 private:
  std::vector<Index> forward_;
  std::vector<Index> inverse_;
};

inline Permutation permutation_from_partition(const IndexList& nonzero_indices, Index n) {
  std::vector<char> used(static_cast<std::size_t>(std::max<Index>(n, 0)), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index j : nonzero_indices) {
    if (j < 0 || j >= n) throw Error(ErrorCode::kInvalidPartition, "index " + std::to_string(j) + " out of range");
    if (used[static_cast<std::size_t>(j)]) throw Error(ErrorCode::kInvalidPartition, "duplicate index " + std::to_string(j));
    used[static_cast<std::size_t>(j)] = 1;
  }
  // ascending within each block, so equal sets give equal permutations
  for (Index j = 0; j < n; ++j) {
    if (used[static_cast<std::size_t>(j)]) order.push_back(j);
  }
  for (Index j = 0; j < n; ++j) {
    if (!used[static_cast<std::size_t>(j)]) order.push_back(j);
  }
  return Permutation(std::move(order));
}

struct NullspaceBasis {
  Index ambient = 0;
  Matrix basis;  // ambient x k, orthonormal columns

  Index size() const { return basis.cols(); }
  bool empty() const { return basis.cols() == 0; }
};

namespace detail {

/// Sparse LDL^T of a symmetric positive definite matrix with a pivot-based
/// rank check.
class SpdFactor {
 public:
  explicit SpdFactor(const SparseMatrix::Storage& spd, double rank_tol = default_tolerances().rank) {
    ldlt_.compute(spd);
    if (ldlt_.info() != Eigen::Success) throw Error(ErrorCode::kRankDeficient, "LDL factorization failed");
    const Vector d = ldlt_.vectorD();
    if (d.size() == 0) return;
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= rank_tol * dmax) {
      throw Error(ErrorCode::kRankDeficient, "normal matrix is singular to working precision");
    }
  }

  Vector solve(const Vector& rhs) const { return ldlt_.solve(rhs); }
  Matrix solve(const Matrix& rhs) const { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<SparseMatrix::Storage> ldlt_;
};

inline SparseMatrix::Storage normal_matrix(const SparseMatrix& a) {
  SparseMatrix::Storage ata = a.storage().transpose() * a.storage();
  ata.makeCompressed();
  return ata;
}

inline SparseMatrix::Storage gram_matrix(const SparseMatrix& a) {
  SparseMatrix::Storage aat = a.storage() * a.storage().transpose();
  aat.makeCompressed();
  return aat;
}

}  // namespace detail

/// Least-squares solution (A^T A)^{-1} A^T b for full-column-rank A.
inline Vector left_pinv_solve(const SparseMatrix& a1, const Vector& b) {
  if (a1.rows() < a1.cols()) throw Error(ErrorCode::kRankDeficient, "left pseudoinverse needs rows >= cols");
  if (b.size() != a1.rows()) throw Error(ErrorCode::kFormat, "rhs length mismatch");
  if (a1.cols() == 0) return Vector(0);
  detail::SpdFactor f(detail::normal_matrix(a1));
  return f.solve(Vector(a1.transpose_times(b)));
}

/// Dense (A^T A)^{-1} A^T.
inline Matrix left_pinv(const SparseMatrix& a1) {
  if (a1.rows() < a1.cols()) throw Error(ErrorCode::kRankDeficient, "left pseudoinverse needs rows >= cols");
  if (a1.cols() == 0) return Matrix(0, a1.rows());
  detail::SpdFactor f(detail::normal_matrix(a1));
  return f.solve(Matrix(a1.storage().transpose()));
}

/// Dense A^T (A A^T)^{-1} for full-row-rank A.
inline Matrix right_pinv(const SparseMatrix& a) {
  if (a.rows() > a.cols()) throw Error(ErrorCode::kRankDeficient, "right pseudoinverse needs cols >= rows");
  if (a.rows() == 0) return Matrix(a.cols(), 0);
  detail::SpdFactor f(detail::gram_matrix(a));
  Matrix inv_aat = f.solve(Matrix(Matrix::Identity(a.rows(), a.rows())));
  return Matrix(a.storage().transpose()) * inv_aat;
}

/// Minimum-norm solution of c1 + A1^T lambda = 0: -A1 (A1^T A1)^{-1} c1.
inline Vector min_norm_dual(const SparseMatrix& a1, const Vector& c1) {
  if (c1.size() != a1.cols()) throw Error(ErrorCode::kFormat, "cost length mismatch");
  if (a1.cols() == 0) return Vector::Zero(a1.rows());
  detail::SpdFactor f(detail::normal_matrix(a1));
  return -(a1 * f.solve(c1));
}

namespace detail {

inline Index numerical_rank(const Eigen::BDCSVD<Matrix>& svd, double rank_tol) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rank_tol * s(0)) ++r;
  }
  return r;
}

}  // namespace detail

inline Index matrix_rank(const Matrix& m, double rank_tol = default_tolerances().rank) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  return detail::numerical_rank(svd, rank_tol);
}

/// Orthonormal basis of ker(M) for a dense matrix.
inline NullspaceBasis nullspace_basis(const Matrix& m, double rank_tol = default_tolerances().rank) {
  NullspaceBasis out;
  out.ambient = m.cols();
  const Index n = m.cols();
  if (n == 0) {
    out.basis = Matrix(0, 0);
    return out;
  }
  if (m.rows() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    out.basis = Matrix::Identity(n, n);
    return out;
  }
  if (n <= 500) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Index r = detail::numerical_rank(svd, rank_tol);
    out.basis = svd.matrixV().rightCols(n - r);
    return out;
  }
  // Large: LU kernel, then orthonormalized.
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(rank_tol);
  Matrix kernel = lu.kernel();
  if (lu.rank() == n) {
    out.basis = Matrix(n, 0);
    return out;
  }
  Eigen::HouseholderQR<Matrix> qr(kernel);
  out.basis = qr.householderQ() * Matrix::Identity(n, kernel.cols());
  return out;
}

inline NullspaceBasis nullspace_basis(const SparseMatrix& m, double rank_tol = default_tolerances().rank) {
  return nullspace_basis(m.dense(), rank_tol);
}

inline bool check_full_column_rank(const Matrix& m, double rank_tol = default_tolerances().rank) {
  if (m.cols() == 0) return true;
  if (m.rows() < m.cols()) return false;
  return matrix_rank(m, rank_tol) == m.cols();
}

inline bool check_full_column_rank(const SparseMatrix& m, double rank_tol = default_tolerances().rank) {
  return check_full_column_rank(m.dense(), rank_tol);
}

/// Moore-Penrose pseudoinverse of an arbitrary dense matrix (SVD based).
inline Matrix pinv(const Matrix& m, double rank_tol = default_tolerances().rank) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index r = detail::numerical_rank(svd, rank_tol);
  const auto& s = svd.singularValues();
  Matrix out = Matrix::Zero(m.cols(), m.rows());
  for (Index i = 0; i < r; ++i) {
    out += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).transpose();
  }
  return out;
}

}  // namespace mplp
