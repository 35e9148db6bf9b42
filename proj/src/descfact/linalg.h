#pragma once

#include <functional>
#include <vector>

#include "descfact/core.h"

namespace descfact {

/// Generalized real Schur pair: S = Q A Z, T = Q E Z.
struct SchurPair {
  Matrix S;
  Matrix T;
  Matrix Q;
  Matrix Z;
  std::vector<int> block_sizes;

  int size() const { return static_cast<int>(S.rows()); }
  std::vector<int> block_starts() const;
};

/// Eigenvalues of a 1x1 or 2x2 diagonal block. `infinite` is set for a 1x1
/// block with a zero T entry.
struct BlockEigen {
  std::vector<Complex> values;
  bool infinite = false;
};

BlockEigen block_eigenvalues(const Matrix& S, const Matrix& T, int start,
                             int size);

/// Block sizes read from the subdiagonal of S on rows [lo, hi).
std::vector<int> quasi_blocks(const Matrix& S, int lo, int hi);

struct ColumnCompression {
  Matrix Z1;
  int rank = 0;
};

/// E Z1 = [0 | E2] with E2 of full column rank. Rank threshold is
/// rank_tol * scale; scale defaults to |E|_F.
ColumnCompression column_compress(const Matrix& E, double rank_tol,
                                  double scale = -1.0);

SchurPair grsf(const Matrix& A, const Matrix& E);

using BlockSelector = std::function<bool(const BlockEigen&)>;

/// Moves the selected blocks to the leading positions, keeping the relative
/// order within each group.
SchurPair reorder_blocks(SchurPair pair, const BlockSelector& selector);

/// Orthogonal factors of a block move inside the trailing window [lo, n).
struct WindowTransform {
  int lo = 0;
  Matrix Q;
  Matrix Z;
};

/// Moves the diagonal block starting at `from` so that it starts at `to`,
/// both inside [lo, n). A and E are updated in place, including the columns
/// above the window. Zero T diagonals of 1x1 blocks are restored exactly.
WindowTransform move_block(Matrix& A, Matrix& E, int lo, int from, int to);

struct InfiniteSplit {
  Matrix Q2;
  Matrix Z2;
  Matrix A;
  Matrix E;
  int n_finite = 0;
  int n_infinite = 0;
};

InfiniteSplit finite_infinite_split(const Matrix& A22, const Matrix& E22,
                                    double rank_tol, double a_scale = -1.0,
                                    double e_scale = -1.0);

/// Leading infinite deflation of (A, E) in place: repeats column compression
/// of E and QR of the compressed A columns. Returns the number of infinite
/// eigenvalues moved to the front. `max_levels` < 0 means until E is
/// nonsingular.
struct StaircaseResult {
  Matrix Q;
  Matrix Z;
  int n_infinite = 0;
  std::vector<int> levels;
};

StaircaseResult leading_infinite_staircase(Matrix& A, Matrix& E,
                                           double rank_tol, double a_scale,
                                           double e_scale,
                                           int max_levels = -1);

Matrix pertranspose(const Matrix& M);

Matrix sqrt_lyapunov(const Matrix& A22, const Matrix& E22, const Matrix& B2,
                     Domain domain);

Matrix cholesky_update(const Matrix& R, const Matrix& X);

/// Upper triangular R with R R^T = M M^T (M has k rows), nonnegative diagonal.
Matrix upper_factor(const Matrix& M);

/// Generalized eigenvalues of (A, E); infinite ones are returned as
/// (inf, 0).
std::vector<Complex> generalized_eigenvalues(const Matrix& A, const Matrix& E);

}  // namespace descfact
