#include "descfact/postproc.h"

#include "descfact/grcfid.h"
#include "descfact/linalg.h"

namespace descfact {

StackedFactorRealization eliminate_nondynamic(
    const StackedFactorRealization& st) {
  const int k = st.n_nondynamic;
  if (k == 0) return st;
  const int n = st.order();
  const int r = n - k;
  const Matrix Ainf = st.A.topLeftCorner(k, k);
  const Matrix A12 = st.A.topRightCorner(k, r);
  const Matrix E12 = st.E.topRightCorner(k, r);
  const Matrix A22 = st.A.bottomRightCorner(r, r);
  const Matrix E22 = st.E.bottomRightCorner(r, r);
  const Matrix B1 = st.B.topRows(k);
  const Matrix B2 = st.B.bottomRows(r);

  Eigen::PartialPivLU<Matrix> lu_e(E22);
  if (r > 0 && !(lu_e.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularBlock,
                "eliminate_nondynamic: trailing E block is singular");
  }
  Matrix X = A12;
  Matrix Y = B1;
  if (r > 0) {
    X -= E12 * lu_e.solve(A22);
    Y -= E12 * lu_e.solve(B2);
  }
  const auto tri = Ainf.triangularView<Eigen::Upper>();
  const Matrix AX = tri.solve(X);
  const Matrix AY = tri.solve(Y);

  StackedFactorRealization out = st;
  out.A = A22;
  out.E = E22;
  out.B = B2;
  out.CN = st.CN.rightCols(r) - st.CN.leftCols(k) * AX;
  out.DN = st.DN - st.CN.leftCols(k) * AY;
  out.CM = st.CM.rightCols(r) - st.CM.leftCols(k) * AX;
  out.DM = st.DM - st.CM.leftCols(k) * AY;
  out.n_nondynamic = 0;
  return out;
}

DescriptorSystem minimal_denominator(const StackedFactorRealization& st,
                                     const Tolerances& tol) {
  const int n = st.order();
  const double thr = tol.rank_tol * st.CM.norm();
  int j = 0;
  while (j < n && st.CM.col(j).norm() <= thr) ++j;
  DescriptorSystem out;
  out.A = st.A.bottomRightCorner(n - j, n - j);
  out.E = st.E.bottomRightCorner(n - j, n - j);
  out.B = st.B.bottomRows(n - j);
  out.C = st.CM.rightCols(n - j);
  out.D = st.DM;
  out.domain = st.domain;
  return out;
}

DescriptorSystem LeftFactorRealization::numerator() const {
  DescriptorSystem sys;
  sys.A = A;
  sys.E = E;
  sys.B = BN;
  sys.C = C;
  sys.D = DN;
  sys.domain = domain;
  return sys;
}

DescriptorSystem LeftFactorRealization::denominator() const {
  DescriptorSystem sys;
  sys.A = A;
  sys.E = E;
  sys.B = BM;
  sys.C = C;
  sys.D = DM;
  sys.domain = domain;
  return sys;
}

DescriptorSystem minimal_denominator(const LeftFactorRealization& st,
                                     const Tolerances& tol) {
  const int n = st.order();
  const double thr = tol.rank_tol * st.BM.norm();
  int j = n;
  while (j > 0 && st.BM.row(j - 1).norm() <= thr) --j;
  DescriptorSystem out;
  out.A = st.A.topLeftCorner(j, j);
  out.E = st.E.topLeftCorner(j, j);
  out.B = st.BM.topRows(j);
  out.C = st.C.leftCols(j);
  out.D = st.DM;
  out.domain = st.domain;
  return out;
}

DescriptorSystem dual_system(const DescriptorSystem& sys) {
  DescriptorSystem d;
  d.A = sys.A.transpose();
  d.E = sys.e_identity ? Matrix() : Matrix(sys.E.transpose());
  d.e_identity = sys.e_identity;
  d.B = sys.C.transpose();
  d.C = sys.B.transpose();
  d.D = sys.D.transpose();
  d.domain = sys.domain;
  return d;
}

LeftFactorizationResult to_left_factorization(const DescriptorSystem& sys,
                                              FactorMethod method,
                                              const RegionSpec& region,
                                              const Tolerances& tol,
                                              const FactorOptions& options,
                                              bool eliminate) {
  const DescriptorSystem dual = dual_system(validate_system(sys));
  FactorizationResult right = method == FactorMethod::kInnerDenominator
                                  ? grcfid(dual, tol, options)
                                  : grcf(dual, region, tol, options);
  const StackedFactorRealization st =
      eliminate ? eliminate_nondynamic(right.factors) : right.factors;

  LeftFactorizationResult out;
  out.log = std::move(right.log);
  LeftFactorRealization& lf = out.factors;
  const int n = st.order();
  const Matrix P = Matrix::Identity(n, n).colwise().reverse();
  lf.A = pertranspose(st.A);
  lf.E = pertranspose(st.E);
  lf.BN = P * st.CN.transpose();
  lf.BM = P * st.CM.transpose();
  lf.C = st.B.transpose() * P;
  lf.DN = st.DN.transpose();
  lf.DM = st.DM.transpose();
  lf.domain = st.domain;
  lf.n_nondynamic = st.n_nondynamic;
  lf.denominator_degree = st.denominator_degree;
  return out;
}

}  // namespace descfact
