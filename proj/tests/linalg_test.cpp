#include "descfact/linalg.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support/oracles.h"

namespace descfact {
namespace {

using testing::det_roots;
using testing::finite_only;
using testing::lyap_residual;
using testing::orthogonality_error;
using testing::random_matrix;
using testing::random_orthogonal;
using testing::relative_multiset_distance;
using testing::Rng;

constexpr double kEps = std::numeric_limits<double>::epsilon();

Matrix improper_pencil_E() {
  Matrix E = Matrix::Zero(5, 5);
  E(0, 1) = 1.0;
  E(1, 2) = 1.0;
  E(3, 3) = 1.0;
  E(4, 4) = 1.0;
  return E;
}

TEST(ColumnCompress, PermutationCase) {
  Matrix E{{1.0, 0.0}, {0.0, 0.0}};
  const auto cc = column_compress(E, 4 * kEps);
  EXPECT_EQ(cc.rank, 1);
  const Matrix EZ = E * cc.Z1;
  EXPECT_LE(EZ.col(0).norm(), 1e-15);
  EXPECT_NEAR(std::abs(EZ(0, 1)), 1.0, 1e-15);
  EXPECT_LE(orthogonality_error(cc.Z1), 20 * kEps);
}

TEST(ColumnCompress, FullRankIdentity) {
  const auto cc = column_compress(Matrix::Identity(3, 3), 3 * kEps);
  EXPECT_EQ(cc.rank, 3);
  EXPECT_LE(orthogonality_error(cc.Z1), 30 * kEps);
}

TEST(ColumnCompress, ZeroMatrix) {
  const auto cc = column_compress(Matrix::Zero(3, 3), 3 * kEps);
  EXPECT_EQ(cc.rank, 0);
}

TEST(ColumnCompress, RankFourDescriptorMatrix) {
  const Matrix E = improper_pencil_E();
  const auto cc = column_compress(E, 5 * kEps);
  // Independent SVD rank: four unit singular values, one zero.
  Eigen::JacobiSVD<Matrix> svd(E);
  int oracle = 0;
  for (int i = 0; i < 5; ++i) oracle += svd.singularValues()(i) > 1e-12;
  EXPECT_EQ(oracle, 4);
  EXPECT_EQ(cc.rank, 4);
  EXPECT_LE((E * cc.Z1).col(0).norm(), 1e-15);
}

TEST(ColumnCompress, MixedRandomRankDeficient) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 7;
    const int r = trial % 7;
    Matrix E = random_matrix(rng, n, r) * random_matrix(rng, r, n);
    const auto cc = column_compress(E, n * kEps);
    EXPECT_EQ(cc.rank, r);
    EXPECT_LE((E * cc.Z1).leftCols(n - r).norm(), 1e-13 * E.norm() + 1e-300);
  }
}

TEST(Grsf, DiagonalPair) {
  Matrix A{{1.0, 0.0}, {0.0, 2.0}};
  const SchurPair p = grsf(A, Matrix::Identity(2, 2));
  std::vector<Complex> ev;
  for (int i = 0; i < 2; ++i) ev.push_back(p.S(i, i) / p.T(i, i));
  EXPECT_LE(relative_multiset_distance(ev, {1.0, 2.0}), 1e-14);
}

TEST(Grsf, RotationHasOneComplexBlock) {
  Matrix A{{0.0, 1.0}, {-1.0, 0.0}};
  const SchurPair p = grsf(A, Matrix::Identity(2, 2));
  ASSERT_EQ(p.block_sizes.size(), 1u);
  EXPECT_EQ(p.block_sizes[0], 2);
  const BlockEigen ev = block_eigenvalues(p.S, p.T, 0, 2);
  EXPECT_LE(relative_multiset_distance(ev.values,
                                       {Complex(0, 1), Complex(0, -1)}),
            1e-14);
}

TEST(Grsf, RandomPairMatchesDeterminantRoots) {
  Rng rng(8);
  const Matrix A = random_matrix(rng, 8, 8);
  const Matrix E = random_matrix(rng, 8, 8);
  const SchurPair p = grsf(A, E);
  EXPECT_LE(orthogonality_error(p.Q), 80 * kEps);
  EXPECT_LE(orthogonality_error(p.Z), 80 * kEps);
  EXPECT_LE((p.Q * A * p.Z - p.S).norm(), 1e-13 * A.norm());
  EXPECT_LE((p.Q * E * p.Z - p.T).norm(), 1e-13 * E.norm());
  std::vector<Complex> ev;
  int pos = 0;
  for (int s : p.block_sizes) {
    for (const Complex& c : block_eigenvalues(p.S, p.T, pos, s).values)
      ev.push_back(c);
    pos += s;
  }
  EXPECT_LE(relative_multiset_distance(ev, det_roots(A, E)), 1e-8);
}

TEST(ReorderBlocks, OneByOneSwap) {
  SchurPair p;
  p.S = Matrix{{2.0, 0.0}, {0.0, -1.0}};
  p.T = Matrix::Identity(2, 2);
  p.Q = Matrix::Identity(2, 2);
  p.Z = Matrix::Identity(2, 2);
  p.block_sizes = {1, 1};
  const SchurPair r = reorder_blocks(
      p, [](const BlockEigen& b) { return b.values[0].real() < 0.0; });
  EXPECT_NEAR(r.S(0, 0) / r.T(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(r.S(1, 1) / r.T(1, 1), 2.0, 1e-14);
}

TEST(ReorderBlocks, RestoresZeroDiagonal) {
  SchurPair p;
  p.S = Matrix{{1.0, 0.5}, {0.0, 3.0}};
  p.T = Matrix{{0.0, 0.7}, {0.0, 1.0}};
  p.Q = Matrix::Identity(2, 2);
  p.Z = Matrix::Identity(2, 2);
  p.block_sizes = {1, 1};
  const SchurPair r =
      reorder_blocks(p, [](const BlockEigen& b) { return !b.infinite; });
  EXPECT_NE(r.T(0, 0), 0.0);
  EXPECT_EQ(r.T(1, 1), 0.0);
  EXPECT_LE((r.Q * p.S * r.Z - r.S).norm(), 1e-14 * 4);
}

TEST(ReorderBlocks, RandomMovePreservesEigenvalues) {
  Rng rng(6);
  const Matrix A = random_matrix(rng, 6, 6);
  const Matrix E = random_matrix(rng, 6, 6);
  SchurPair p = grsf(A, E);
  const std::vector<Complex> before = det_roots(A, E);
  const auto starts = p.block_starts();
  Matrix S = p.S, T = p.T;
  const WindowTransform wt = move_block(S, T, 1, starts.back(), 1);
  const Matrix Q = Matrix::Identity(6, 6);
  Matrix Qf = Q, Zf = Q;
  Qf.bottomRightCorner(5, 5) = wt.Q;
  Zf.bottomRightCorner(5, 5) = wt.Z;
  EXPECT_LE((Qf * p.S * Zf - S).norm(), 1e-13 * A.norm());
  std::vector<Complex> after;
  for (const Complex& c : det_roots(S, T)) after.push_back(c);
  EXPECT_LE(relative_multiset_distance(after, before), 1e-10);
}

TEST(FiniteInfiniteSplit, DiagonalPencil) {
  const Matrix A = Matrix::Identity(2, 2);
  Matrix E = Matrix::Zero(2, 2);
  E(1, 1) = 1.0;
  const InfiniteSplit s = finite_infinite_split(A, E, 2 * kEps);
  EXPECT_EQ(s.n_finite, 1);
  EXPECT_EQ(s.n_infinite, 1);
  EXPECT_NEAR(s.A(0, 0) / s.E(0, 0), 1.0, 1e-15);
  EXPECT_EQ(s.E(1, 1), 0.0);
}

TEST(FiniteInfiniteSplit, NilpotentShift) {
  const Matrix A = Matrix::Identity(3, 3);
  Matrix E = Matrix::Zero(3, 3);
  E(0, 1) = 1.0;
  E(1, 2) = 1.0;
  const InfiniteSplit s = finite_infinite_split(A, E, 3 * kEps);
  EXPECT_EQ(s.n_finite, 0);
  EXPECT_EQ(s.n_infinite, 3);
  EXPECT_LE((s.Q2 * A * s.Z2 - s.A).norm(), 1e-14);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(s.E(i, i), 0.0);
  EXPECT_EQ(Matrix(s.E.triangularView<Eigen::StrictlyLower>()).norm(), 0.0);
}

TEST(FiniteInfiniteSplit, RandomMixedPencil) {
  Rng rng(21);
  // Two finite eigenvalues, a length-2 nilpotent chain and a simple infinite.
  const int n = 5;
  Matrix A = Matrix::Identity(n, n);
  Matrix E = Matrix::Zero(n, n);
  A(0, 0) = 0.5;
  A(1, 1) = -3.0;
  E(0, 0) = 1.0;
  E(1, 1) = 1.0;
  E(2, 3) = 1.0;
  A.triangularView<Eigen::StrictlyUpper>() =
      random_matrix(rng, n, n).triangularView<Eigen::StrictlyUpper>();
  const Matrix U = random_orthogonal(rng, n);
  const Matrix V = random_orthogonal(rng, n);
  const Matrix Am = U * A * V;
  const Matrix Em = U * E * V;
  const InfiniteSplit s = finite_infinite_split(Am, Em, n * kEps);
  EXPECT_EQ(s.n_finite, 2);
  EXPECT_EQ(s.n_infinite, 3);
  EXPECT_LE((s.Q2 * Am * s.Z2 - s.A).norm(), 1e-13 * Am.norm());
  EXPECT_LE((s.Q2 * Em * s.Z2 - s.E).norm(), 1e-13 * Em.norm());
  EXPECT_LE(relative_multiset_distance(
                finite_only(det_roots(s.A.topLeftCorner(2, 2),
                                      s.E.topLeftCorner(2, 2))),
                {0.5, -3.0}),
            1e-10);
  for (int i = 2; i < n; ++i) EXPECT_EQ(s.E(i, i), 0.0);
}

TEST(Pertranspose, Definition) {
  Matrix M{{1.0, 2.0}, {3.0, 4.0}};
  Matrix expected{{4.0, 2.0}, {3.0, 1.0}};
  EXPECT_EQ(pertranspose(M), expected);
}

TEST(Pertranspose, UpperStaysUpperAndInvolution) {
  Rng rng(5);
  Matrix M = random_matrix(rng, 5, 5);
  Matrix U = M.triangularView<Eigen::Upper>();
  const Matrix PU = pertranspose(U);
  EXPECT_EQ(Matrix(PU.triangularView<Eigen::StrictlyLower>()).norm(), 0.0);
  EXPECT_EQ(pertranspose(pertranspose(M)), M);
}

TEST(SqrtLyapunov, ScalarContinuous) {
  const Matrix S = sqrt_lyapunov(Matrix::Constant(1, 1, 1.0),
                                 Matrix::Constant(1, 1, 1.0),
                                 Matrix::Constant(1, 1, 1.0),
                                 Domain::kContinuous);
  EXPECT_NEAR(S(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SqrtLyapunov, ScalarDiscrete) {
  const Matrix S = sqrt_lyapunov(Matrix::Constant(1, 1, 2.0),
                                 Matrix::Constant(1, 1, 1.0),
                                 Matrix::Constant(1, 1, 1.0),
                                 Domain::kDiscrete);
  EXPECT_NEAR(S(0, 0), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(SqrtLyapunov, RandomAntistableBlocks) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    for (Domain d : {Domain::kContinuous, Domain::kDiscrete}) {
      // Complex pair (or real pair) outside the stability domain.
      const double re = d == Domain::kContinuous ? 0.2 + trial * 0.1 : 0.0;
      const double shift = d == Domain::kContinuous ? 0.0 : 1.3 + 0.05 * trial;
      Matrix core{{re + shift, 1.0 + trial * 0.1},
                  {-(0.5 + 0.01 * trial), re + shift}};
      const Matrix E = random_matrix(rng, 2, 2) + 3.0 * Matrix::Identity(2, 2);
      const Matrix A = E * core;
      const Matrix B = random_matrix(rng, 2, 1 + trial % 3);
      const Matrix S = sqrt_lyapunov(A, E, B, d);
      EXPECT_EQ(S(1, 0), 0.0);
      EXPECT_GE(S(0, 0), 0.0);
      EXPECT_GE(S(1, 1), 0.0);
      EXPECT_LE(lyap_residual(A, E, B, S, d), 1e-12) << trial;
      Eigen::SelfAdjointEigenSolver<Matrix> es(S * S.transpose());
      EXPECT_GT(es.eigenvalues()(0), 0.0);
    }
  }
}

TEST(SqrtLyapunov, BoundaryEigenvalueRaises) {
  Matrix A{{0.0, 1.0}, {-1.0, 0.0}};
  try {
    sqrt_lyapunov(A, Matrix::Identity(2, 2), Matrix::Ones(2, 1),
                  Domain::kContinuous);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundaryEigenvalue);
  }
}

TEST(CholeskyUpdate, Scalar) {
  const Matrix R = cholesky_update(Matrix::Identity(1, 1),
                                   Matrix::Constant(1, 1, std::sqrt(3.0)));
  EXPECT_NEAR(R(0, 0), 2.0, 1e-15);
}

TEST(CholeskyUpdate, ZeroUpdate) {
  Matrix R{{2.0, 1.0}, {0.0, 3.0}};
  EXPECT_EQ(cholesky_update(R, Matrix::Zero(1, 2)), R);
}

TEST(CholeskyUpdate, RandomRankTwo) {
  Rng rng(3);
  Matrix R = random_matrix(rng, 4, 4).triangularView<Eigen::Upper>();
  for (int i = 0; i < 4; ++i) R(i, i) = std::abs(R(i, i)) + 0.5;
  const Matrix X = random_matrix(rng, 2, 4);
  const Matrix Rp = cholesky_update(R, X);
  const Matrix target = R.transpose() * R + X.transpose() * X;
  EXPECT_LE((Rp.transpose() * Rp - target).norm(), 1e-13 * target.norm());
  for (int i = 0; i < 4; ++i) EXPECT_GT(Rp(i, i), 0.0);
  EXPECT_EQ(Matrix(Rp.triangularView<Eigen::StrictlyLower>()).norm(), 0.0);
}

TEST(UpperFactor, ReproducesGram) {
  Rng rng(9);
  const Matrix M = random_matrix(rng, 2, 5);
  const Matrix R = upper_factor(M);
  EXPECT_EQ(R(1, 0), 0.0);
  EXPECT_LE((R * R.transpose() - M * M.transpose()).norm(), 1e-14 * 10);
}

}  // namespace
}  // namespace descfact
