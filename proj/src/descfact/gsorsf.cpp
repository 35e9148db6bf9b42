#include "descfact/gsorsf.h"

namespace descfact {

bool block_is_good(const RegionSpec& region, const BlockEigen& block,
                   double boundary_tol) {
  if (block.infinite) return false;
  for (const Complex& v : block.values) {
    if (!region.is_good(v, boundary_tol)) return false;
  }
  return true;
}

namespace {

void apply_rows(Matrix& A, Matrix& E, Matrix& Q, int lo, const Matrix& Qs) {
  const int k = static_cast<int>(Qs.rows());
  A.middleRows(lo, k) = Qs * A.middleRows(lo, k);
  E.middleRows(lo, k) = Qs * E.middleRows(lo, k);
  Q.middleRows(lo, k) = Qs * Q.middleRows(lo, k);
}

void apply_cols(Matrix& A, Matrix& E, Matrix& Z, int lo, const Matrix& Zs) {
  const int k = static_cast<int>(Zs.rows());
  A.middleCols(lo, k) = A.middleCols(lo, k) * Zs;
  E.middleCols(lo, k) = E.middleCols(lo, k) * Zs;
  Z.middleCols(lo, k) = Z.middleCols(lo, k) * Zs;
}

}  // namespace

OrderedGRSF gsorsf(const DescriptorSystem& sys, const RegionSpec& region,
                   const Tolerances& tol) {
  const int n = sys.order();
  OrderedGRSF out;
  out.A = sys.A;
  out.E = sys.dense_E();
  out.Q = Matrix::Identity(n, n);
  out.Z = Matrix::Identity(n, n);
  const double a_scale = sys.A.norm();
  const double e_scale = out.E.norm();

  int lead = 0;
  int n_f = n;
  if (!sys.e_identity) {
    // Steps 1-2: compress E, triangularize the compressed A columns.
    const StaircaseResult first = leading_infinite_staircase(
        out.A, out.E, tol.rank_tol, a_scale, e_scale, 1);
    out.Q = first.Q;
    out.Z = first.Z;
    lead = first.n_infinite;

    // Step 3: separate higher-order infinite eigenvalues of the trailing part.
    const int r = n - lead;
    const InfiniteSplit split = finite_infinite_split(
        out.A.bottomRightCorner(r, r), out.E.bottomRightCorner(r, r),
        tol.rank_tol, a_scale, e_scale);
    apply_rows(out.A, out.E, out.Q, lead, split.Q2);
    apply_cols(out.A, out.E, out.Z, lead, split.Z2);
    out.A.bottomRightCorner(r, r) = split.A;
    out.E.bottomRightCorner(r, r) = split.E;
    n_f = split.n_finite;
    out.n_b_inf = split.n_infinite;
  }
  out.n_inf_simple = lead;

  // Step 4: GRSF of the finite part with good blocks leading.
  const SchurPair raw =
      grsf(out.A.block(lead, lead, n_f, n_f), out.E.block(lead, lead, n_f, n_f));
  const SchurPair pair = reorder_blocks(raw, [&](const BlockEigen& b) {
    return block_is_good(region, b, tol.boundary_tol);
  });
  apply_rows(out.A, out.E, out.Q, lead, pair.Q);
  apply_cols(out.A, out.E, out.Z, lead, pair.Z);
  out.A.block(lead, lead, n_f, n_f) = pair.S;
  out.E.block(lead, lead, n_f, n_f) = pair.T;
  int pos = 0;
  for (int s : pair.block_sizes) {
    if (!block_is_good(region, block_eigenvalues(pair.S, pair.T, pos, s),
                       tol.boundary_tol)) {
      break;
    }
    pos += s;
  }
  out.n_g = pos;
  out.n_b_f = n_f - pos;

  // Step 5: exact structural zeros.
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      out.E(i, j) = 0.0;
      const bool in_finite_sub = j >= lead && j < lead + n_f - 1 &&
                                 i == j + 1 && pair.S(j - lead + 1, j - lead) != 0.0;
      if (!in_finite_sub) out.A(i, j) = 0.0;
    }
  }
  out.E.leftCols(lead).setZero();
  for (int i = n - out.n_b_inf; i < n; ++i) out.E(i, i) = 0.0;
  return out;
}

}  // namespace descfact
