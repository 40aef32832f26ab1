// Sparse algebra, simplex, LP standardization and polyhedral geometry.

#include "support.hpp"

#include <gtest/gtest.h>

using namespace mplp;
using namespace mplp::testing;

namespace {

Matrix mat(Index r, Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST(SparseMatrix, TripletsRejectBadInput) {
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), Error);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), Error);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 0, std::nan("")}}), Error);
  const SparseMatrix a = SparseMatrix::from_triplets(2, 3, {{0, 1, 2.0}, {1, 2, -1.0}, {1, 0, 1e-15}});
  EXPECT_EQ(a.triplets().size(), 2u);  // tiny entry dropped
  EXPECT_EQ(a.transpose().dense(), a.dense().transpose());
}

TEST(Permutation, PartitionPutsNonzerosFirst) {
  const Permutation p = permutation_from_partition({3, 1}, 5);
  EXPECT_EQ(p.inverse(0), 1);
  EXPECT_EQ(p.inverse(1), 3);
  const Vector x = vec({10, 11, 12, 13, 14});
  EXPECT_EQ(p.from_permuted(p.to_permuted(x)), x);
  EXPECT_EQ((p.matrix().transpose() * p.matrix()), Matrix::Identity(5, 5));
  EXPECT_THROW(permutation_from_partition({1, 1}, 3), Error);
  EXPECT_THROW(permutation_from_partition({4}, 3), Error);
}

TEST(Pseudoinverse, LeftInverseOfSquareAndTall) {
  const SparseMatrix sq = SparseMatrix::from_dense(mat(2, 2, {2, 1, 0, 1}));
  EXPECT_LT((left_pinv(sq) - sq.dense().inverse()).norm(), 1e-12);
  const SparseMatrix tall = SparseMatrix::from_dense(mat(3, 2, {1, 0, 0, 1, 1, 1}));
  const Matrix X = left_pinv(tall);
  EXPECT_LT((X * tall.dense() - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT((X - pinv(tall.dense())).norm(), 1e-12);
}

TEST(Pseudoinverse, RankDeficientIsReported) {
  const SparseMatrix a = SparseMatrix::from_dense(mat(3, 2, {1, 2, 2, 4, 3, 6}));
  EXPECT_THROW(left_pinv(a), Error);
  EXPECT_FALSE(check_full_column_rank(a));
  EXPECT_EQ(matrix_rank(a.dense()), 1);
}

TEST(Pseudoinverse, MinimumNormDual) {
  // c1 + A1' lambda = 0 with the smallest lambda
  const SparseMatrix a1 = SparseMatrix::from_dense(mat(3, 2, {1, 0, 0, 1, 1, 1}));
  const Vector c1 = vec({1, 2});
  const Vector lam = min_norm_dual(a1, c1);
  EXPECT_LT((c1 + a1.dense().transpose() * lam).norm(), 1e-12);
  EXPECT_LT((lam - (-pinv(a1.dense().transpose()) * c1)).norm(), 1e-12);
}

TEST(Nullspace, OrthonormalKernel) {
  const Matrix a = mat(2, 4, {1, 1, 0, 0, 0, 1, 1, 1});
  const NullspaceBasis z = nullspace_basis(a);
  EXPECT_EQ(z.size(), 2);
  EXPECT_LT((a * z.basis).norm(), 1e-12);
  EXPECT_LT((z.basis.transpose() * z.basis - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_EQ(nullspace_basis(Matrix::Identity(3, 3)).size(), 0);
}

TEST(Simplex, SolvesSmallLp) {
  // min -x1 - x2 s.t. x1 + 2x2 + s1 = 4, 3x1 + x2 + s2 = 6
  const Matrix a = mat(2, 4, {1, 2, 1, 0, 3, 1, 0, 1});
  const SimplexResult r = simplex_solve(a, vec({4, 6}), vec({-1, -1, 0, 0}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
  EXPECT_NEAR(r.objective, -2.8, 1e-12);
  EXPECT_GE(r.d.minCoeff(), -1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  EXPECT_EQ(simplex_solve(mat(1, 2, {1, 1}), vec({-1}), vec({0, 0})).status, LpStatus::kInfeasible);
  EXPECT_EQ(simplex_solve(mat(1, 2, {1, -1}), vec({1}), vec({-1, 0})).status, LpStatus::kUnbounded);
}

TEST(Simplex, RedundantRowsAreTolerated) {
  const Matrix a = mat(3, 3, {1, 1, 1, 1, 1, 1, 1, 0, 0});
  const SimplexResult r = simplex_solve(a, vec({2, 2, 1}), vec({0, 1, 2}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x(1), 1.0, 1e-12);
}

TEST(InequalityLp, PrimalFromDual) {
  // min -z1 - z2 s.t. z1 <= 1, z2 <= 2
  const InequalityLpResult r = solve_inequality_lp(vec({-1, -1}), Matrix::Identity(2, 2), vec({1, 2}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.z(0), 1.0, 1e-12);
  EXPECT_NEAR(r.z(1), 2.0, 1e-12);
  EXPECT_EQ(solve_inequality_lp(vec({-1}), mat(1, 1, {-1}), vec({0})).status, LpStatus::kUnbounded);
  EXPECT_EQ(solve_inequality_lp(vec({0}), mat(2, 1, {1, -1}), vec({0, -1})).status, LpStatus::kInfeasible);
}

TEST(StandardForm, Dimensions) {
  const StandardFormLP two = load_standard("twovar.json");
  EXPECT_EQ(two.m(), 5);
  EXPECT_EQ(two.n(), 9);  // two free variables split, five slacks
  const StandardFormLP three = load_standard("threevar.json");
  EXPECT_EQ(three.m(), 9);
  EXPECT_EQ(three.n(), 15);
}

TEST(StandardForm, RecoveryRoundTrip) {
  GeneralLP g;
  g.sense = Sense::kMin;
  g.c = vec({1, -1, 2});
  g.q = 1;
  ParamRow row;
  row.a = vec({1, 1, 1});
  row.w = 4;
  row.f = vec({1});
  g.ineq.push_back(row);
  g.eq.push_back({vec({1, -1, 0}), 0.5, vec({0})});
  g.bounds.push_back({0, 1.0, 3.0, std::nullopt});
  g.bounds.push_back({1, std::nullopt, 2.0, std::nullopt});
  g.bounds.push_back({2, 0.0, std::nullopt, ParamLink{0, -1.0}});
  g.box_lo = vec({0});
  g.box_hi = vec({1});
  const StandardFormLP lp = to_standard_form(g);
  const Vector th = vec({0.3});
  const VertexSolution s = solve_lp(lp, th);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  const Vector x = lp.recover(s.x, th);
  EXPECT_LE(x.sum(), 4.3 + 1e-9);
  EXPECT_NEAR(x(0) - x(1), 0.5, 1e-9);
  EXPECT_GE(x(0), 1.0 - 1e-9);
  EXPECT_LE(x(0), 3.0 + 1e-9);
  EXPECT_LE(x(1), 2.0 + 1e-9);
  EXPECT_GE(x(2), -0.3 - 1e-9);
  EXPECT_NEAR(lp.original_objective(s.z, th), g.c.dot(x), 1e-9);
}

TEST(StandardForm, RejectsMalformedInput) {
  GeneralLP g;
  g.c = vec({1, 1});
  g.q = 1;
  g.ineq.push_back({vec({1}), 1.0, vec({0})});
  g.box_lo = vec({0});
  g.box_hi = vec({1});
  EXPECT_THROW(to_standard_form(g), Error);
  g.ineq[0].a = vec({1, 1});
  g.bounds.push_back({5, 0.0, std::nullopt, std::nullopt});
  EXPECT_THROW(to_standard_form(g), Error);
}

TEST(Lexicographic, AuxiliaryCostPicksVertex) {
  const StandardFormLP lp = load_standard("twovar.json");
  const Vector th = vec({0.25, 0.75});
  const Vector x1 = lp.recover(lexicographic_solve(lp, {auxiliary_cost_to_standard(lp, vec({1, -1}))}, th).x, th);
  EXPECT_NEAR(x1(0), 1.5, 1e-9);
  EXPECT_NEAR(x1(1), 1.25, 1e-9);
  const Vector x2 = lp.recover(lexicographic_solve(lp, {auxiliary_cost_to_standard(lp, vec({-1, 1}))}, th).x, th);
  EXPECT_NEAR(x2(0), 1.0, 1e-9);
  EXPECT_NEAR(x2(1), 1.75, 1e-9);
}

TEST(Multiplicity, UniqueAndMultiple) {
  const StandardFormLP lp = load_standard("twovar.json");
  const Vector a = vec({0.25, 0.0}), b = vec({0.25, 0.75});
  EXPECT_EQ(multiplicity_check(lp, solve_lp(lp, a), a), Multiplicity::kUnique);
  EXPECT_EQ(multiplicity_check(lp, solve_lp(lp, b), b), Multiplicity::kMultiple);
}

TEST(Degeneracy, Degree) {
  EXPECT_EQ(degeneracy_degree(7, 1, 6).sigma, 2);
  EXPECT_FALSE(degeneracy_degree(5, 1, 6).degenerate());
  EXPECT_THROW(degeneracy_degree(1, 7, 6), Error);
}

TEST(Polyhedron, ChebyshevCenterOfBox) {
  const auto ball = chebyshev_center_region(HPolyhedron::box(vec({0, 0}), vec({2, 1})));
  ASSERT_TRUE(ball);
  EXPECT_NEAR(ball->radius, 0.5, 1e-9);
  EXPECT_NEAR(ball->center(1), 0.5, 1e-9);
  HPolyhedron empty = HPolyhedron::box(vec({0}), vec({1}));
  empty.append_row(vec({1}), -1.0);
  EXPECT_FALSE(chebyshev_center_region(empty));
}

TEST(Polyhedron, RedundancyRemoval) {
  HPolyhedron p = HPolyhedron::box(vec({0, 0}), vec({1, 1}));
  p.append_row(vec({1, 1}), 3.0);   // redundant
  p.append_row(vec({2, 0}), 2.0);   // duplicate of x <= 1
  const HPolyhedron r = remove_redundant(p);
  EXPECT_EQ(r.rows(), 4);
  EXPECT_TRUE(r.minimal);
}

TEST(Polyhedron, ProjectionOfSimplex) {
  // {x, y, z >= 0, x + y + z <= 1} projects to the triangle x, y >= 0, x + y <= 1
  HPolyhedron p(mat(4, 3, {-1, 0, 0, 0, -1, 0, 0, 0, -1, 1, 1, 1}), vec({0, 0, 0, 1}));
  const HPolyhedron q = project_polyhedron(p, 2);
  EXPECT_EQ(q.rows(), 3);
  EXPECT_TRUE(q.contains(vec({0.5, 0.5})));
  EXPECT_FALSE(q.contains(vec({0.6, 0.6})));
  EXPECT_THROW(project_polyhedron(p, 1, 1), Error);
}

TEST(Polyhedron, SharedFacet) {
  const HPolyhedron left = HPolyhedron::box(vec({0, 0}), vec({1, 1}));
  const HPolyhedron right = HPolyhedron::box(vec({1, 0}), vec({2, 1}));
  const HPolyhedron corner = HPolyhedron::box(vec({1, 1}), vec({2, 2}));
  const auto f = shared_facet(left, right, 1e-9);
  ASSERT_TRUE(f);
  EXPECT_NEAR(f->radius, 0.5, 1e-9);
  EXPECT_FALSE(shared_facet(left, corner, 1e-9));
}

TEST(ImplicitRows, DetectsForcedEqualities) {
  // y >= 0 and -y >= 0 force y = 0; y2 >= -1 is explicit
  const Matrix n = mat(3, 2, {1, 0, -1, 0, 0, 1});
  const RowSplit s = find_implicit_inequalities(n, vec({0, 0, 1}), vec({0, 0}), 1e-9);
  EXPECT_EQ(s.implicit_rows.size(), 2u);
  EXPECT_EQ(s.explicit_rows.size(), 1u);
}

TEST(OptimalFace, SegmentCenter) {
  // max x1 + x2 s.t. x1 + x2 + s = 1 + theta: the face is the segment between (1+theta, 0) and (0, 1+theta)
  const StandardFormLP lp = StandardFormLP::direct(mat(1, 3, {1, 1, 1}), vec({1}), mat(1, 1, {1}), vec({1, 1, 0}));
  const Vector th = vec({0.5});
  const VertexSolution v = solve_lp(lp, th);
  ASSERT_EQ(multiplicity_check(lp, v, th), Multiplicity::kMultiple);
  const OptimalFace f = build_optimal_face(lp, th, v.z, v.x);
  EXPECT_EQ(f.dimension(), 1);
  const FaceCenter c = chebyshev_center_face(f, 10.0);
  EXPECT_NEAR(c.x(0), 0.75, 1e-7);
  EXPECT_NEAR(c.x(1), 0.75, 1e-7);
  EXPECT_NEAR(c.x(2), 0.0, 1e-7);
}
