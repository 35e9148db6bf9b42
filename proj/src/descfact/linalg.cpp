#include "descfact/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <type_traits>

#include <lapacke.h>

namespace descfact {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Upper triangular R with R R^* = M M^*, via QR of the row-reversed adjoint.
template <typename Mat>
Mat upper_factor_impl(const Mat& M) {
  const Eigen::Index k = M.rows();
  Mat padded = M;
  if (padded.cols() < k) {
    padded.conservativeResize(k, k);
    padded.rightCols(k - M.cols()).setZero();
  }
  Mat X = padded.colwise().reverse().adjoint();
  Eigen::HouseholderQR<Mat> qr(X);
  Mat Rx = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  Mat R = Rx.adjoint().colwise().reverse().rowwise().reverse();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto d = R(j, j);
    const double mag = std::abs(d);
    if (mag == 0.0) continue;
    if constexpr (std::is_same_v<typename Mat::Scalar, double>) {
      if (d < 0.0) R.col(j) *= -1.0;
    } else {
      R.col(j) *= std::conj(d / mag);
    }
  }
  return R;
}

void check_lapack(lapack_int info, const char* routine) {
  if (info < 0) {
    std::ostringstream os;
    os << routine << ": illegal argument " << -info;
    throw std::logic_error(os.str());
  }
}

double smallest_singular_value(const Matrix& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Zeros everything below the quasi-triangular block structure.
void clear_below_blocks(Matrix& S, const std::vector<int>& sizes) {
  const Eigen::Index n = S.rows();
  for (Eigen::Index j = 0; j + 2 < n; ++j) {
    for (Eigen::Index i = j + 2; i < n; ++i) S(i, j) = 0.0;
  }
  int pos = 0;
  for (int s : sizes) {
    if (s == 1 && pos + 1 < n) S(pos + 1, pos) = 0.0;
    pos += s;
  }
}

}  // namespace

std::vector<int> SchurPair::block_starts() const {
  std::vector<int> starts;
  int pos = 0;
  for (int s : block_sizes) {
    starts.push_back(pos);
    pos += s;
  }
  return starts;
}

std::vector<int> quasi_blocks(const Matrix& S, int lo, int hi) {
  std::vector<int> sizes;
  int i = lo;
  while (i < hi) {
    if (i + 1 < hi && S(i + 1, i) != 0.0) {
      sizes.push_back(2);
      i += 2;
    } else {
      sizes.push_back(1);
      i += 1;
    }
  }
  return sizes;
}

BlockEigen block_eigenvalues(const Matrix& S, const Matrix& T, int start,
                             int size) {
  BlockEigen out;
  if (size == 1) {
    const double t = T(start, start);
    if (t == 0.0) {
      out.infinite = true;
      out.values.push_back(
          Complex(std::numeric_limits<double>::infinity(), 0.0));
    } else {
      out.values.push_back(Complex(S(start, start) / t, 0.0));
    }
    return out;
  }
  const Eigen::Matrix2d s = S.block(start, start, 2, 2);
  Eigen::Matrix2d t = T.block(start, start, 2, 2);
  t(1, 0) = 0.0;
  const Eigen::Matrix2d m = t.triangularView<Eigen::Upper>().solve(s);
  const double half_tr = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double diff = 0.5 * (m(0, 0) - m(1, 1));
  const double disc = diff * diff + m(0, 1) * m(1, 0);
  if (disc < 0.0) {
    const double im = std::sqrt(-disc);
    out.values = {Complex(half_tr, im), Complex(half_tr, -im)};
  } else {
    const double root = std::sqrt(disc);
    const double r1 = half_tr + std::copysign(root, half_tr);
    const double r2 = r1 != 0.0 ? det / r1 : half_tr - root;
    out.values = {Complex(r1, 0.0), Complex(r2, 0.0)};
  }
  return out;
}

ColumnCompression column_compress(const Matrix& E, double rank_tol,
                                  double scale) {
  const Eigen::Index n = E.rows();
  if (E.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "column_compress: E not square");
  }
  ColumnCompression out;
  out.Z1 = Matrix::Identity(n, n);
  if (n == 0) return out;
  if (scale < 0.0) scale = E.norm();
  const double thr = rank_tol * scale;
  if (scale == 0.0) return out;

  Eigen::ColPivHouseholderQR<Matrix> qr(E.transpose());
  Matrix Qm = qr.householderQ();
  Matrix R = qr.matrixR().triangularView<Eigen::Upper>();
  int r = 0;
  while (r < n && std::abs(R(r, r)) > thr) ++r;

  // SVD confirmation on the candidate boundary block.
  const int r0 = std::max(0, r - 1);
  const Eigen::Index tail = n - r0;
  Eigen::JacobiSVD<Matrix> svd(R.bottomRightCorner(tail, tail),
                               Eigen::ComputeFullU);
  int c = 0;
  const auto& sv = svd.singularValues();
  while (c < sv.size() && sv(c) > thr) ++c;
  out.rank = r0 + c;
  Qm.rightCols(tail) = Qm.rightCols(tail) * svd.matrixU();

  const int rank = out.rank;
  out.Z1.leftCols(n - rank) = Qm.rightCols(n - rank);
  out.Z1.rightCols(rank) = Qm.leftCols(rank);
  return out;
}

SchurPair grsf(const Matrix& A, const Matrix& E) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  SchurPair pair;
  pair.S = A;
  pair.T = E;
  pair.Q = Matrix::Identity(n, n);
  pair.Z = Matrix::Identity(n, n);
  if (n == 0) return pair;

  std::vector<double> alphar(n), alphai(n), beta(n);
  Matrix vsl(n, n), vsr(n, n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgges(
      LAPACK_COL_MAJOR, 'V', 'V', 'N', nullptr, n, pair.S.data(), n,
      pair.T.data(), n, &sdim, alphar.data(), alphai.data(), beta.data(),
      vsl.data(), n, vsr.data(), n);
  check_lapack(info, "dgges");
  if (info > 0) {
    throw Error(ErrorCode::kIterationFailure, "QZ iteration did not converge");
  }
  pair.Q = vsl.transpose();
  pair.Z = vsr;
  for (lapack_int j = 0; j < n;) {
    if (alphai[j] != 0.0 && j + 1 < n) {
      pair.block_sizes.push_back(2);
      j += 2;
    } else {
      if (j + 1 < n) pair.S(j + 1, j) = 0.0;
      pair.block_sizes.push_back(1);
      j += 1;
    }
  }
  clear_below_blocks(pair.S, pair.block_sizes);
  pair.T.triangularView<Eigen::StrictlyLower>().setZero();
  return pair;
}

namespace {

// Moves the block starting at `from` to `to` (0-based, inside S) with
// dtgexc, accumulating into Ql and Zl (S_old = Ql S_new Zl^T on entry
// Ql = Zl = I). Restores exact zeros below the blocks and on the T diagonal
// of infinite 1x1 blocks.
void move_in_place(Matrix& S, Matrix& T, Matrix& Ql, Matrix& Zl, int from,
                   int to) {
  const int w = static_cast<int>(S.rows());
  std::vector<int> sizes = quasi_blocks(S, 0, w);
  std::vector<bool> inf;
  int pos = 0;
  int moved = -1;
  for (size_t b = 0; b < sizes.size(); ++b) {
    inf.push_back(sizes[b] == 1 && T(pos, pos) == 0.0);
    if (pos == from) moved = static_cast<int>(b);
    pos += sizes[b];
  }
  if (moved < 0) {
    throw std::logic_error("move_block: 'from' is not a block start");
  }
  std::vector<int> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  order.erase(order.begin() + moved);
  {
    int acc = 0;
    size_t ins = 0;
    while (ins < order.size() && acc < to) {
      acc += sizes[order[ins]];
      ++ins;
    }
    order.insert(order.begin() + static_cast<long>(ins), moved);
  }

  lapack_int ifst = from + 1;
  lapack_int ilst = to + 1;
  const lapack_int info = LAPACKE_dtgexc(
      LAPACK_COL_MAJOR, 1, 1, w, S.data(), w, T.data(), w, Ql.data(),
      static_cast<lapack_int>(Ql.outerStride()), Zl.data(),
      static_cast<lapack_int>(Zl.outerStride()), &ifst, &ilst);
  check_lapack(info, "dtgexc");
  if (info > 0) {
    throw Error(ErrorCode::kSwapIllConditioned,
                "block swap rejected: eigenvalues too close");
  }

  std::vector<int> new_sizes;
  for (int b : order) new_sizes.push_back(sizes[b]);
  clear_below_blocks(S, new_sizes);
  T.triangularView<Eigen::StrictlyLower>().setZero();
  pos = 0;
  for (int b : order) {
    if (inf[b]) T(pos, pos) = 0.0;
    pos += sizes[b];
  }
}

}  // namespace

WindowTransform move_block(Matrix& A, Matrix& E, int lo, int from, int to) {
  const int n = static_cast<int>(A.rows());
  const int w = n - lo;
  WindowTransform out;
  out.lo = lo;
  out.Q = Matrix::Identity(w, w);
  out.Z = Matrix::Identity(w, w);
  if (from == to || w <= 1) return out;

  Matrix S = A.bottomRightCorner(w, w);
  Matrix T = E.bottomRightCorner(w, w);
  Matrix Ql = Matrix::Identity(w, w);
  Matrix Zl = Matrix::Identity(w, w);
  move_in_place(S, T, Ql, Zl, from - lo, to - lo);
  A.bottomRightCorner(w, w) = S;
  E.bottomRightCorner(w, w) = T;
  if (lo > 0) {
    A.topRightCorner(lo, w) = A.topRightCorner(lo, w) * Zl;
    E.topRightCorner(lo, w) = E.topRightCorner(lo, w) * Zl;
  }
  out.Q = Ql.transpose();
  out.Z = Zl;
  return out;
}

SchurPair reorder_blocks(SchurPair pair, const BlockSelector& selector) {
  int next = 0;
  int pos = 0;
  const std::vector<int> sizes = pair.block_sizes;
  // dtgexc accumulates into the LAPACK-convention left factor Q^T.
  Matrix Ql = pair.Q.transpose();
  for (int s : sizes) {
    const BlockEigen ev = block_eigenvalues(pair.S, pair.T, pos, s);
    if (selector(ev)) {
      if (pos != next) move_in_place(pair.S, pair.T, Ql, pair.Z, pos, next);
      next += s;
    }
    pos += s;
  }
  pair.Q = Ql.transpose();
  pair.block_sizes = quasi_blocks(pair.S, 0, pair.size());
  return pair;
}

StaircaseResult leading_infinite_staircase(Matrix& A, Matrix& E,
                                           double rank_tol, double a_scale,
                                           double e_scale, int max_levels) {
  const int n = static_cast<int>(A.rows());
  StaircaseResult out;
  out.Q = Matrix::Identity(n, n);
  out.Z = Matrix::Identity(n, n);
  int off = 0;
  while (off < n &&
         (max_levels < 0 || static_cast<int>(out.levels.size()) < max_levels)) {
    const int m = n - off;
    const ColumnCompression cc =
        column_compress(E.bottomRightCorner(m, m), rank_tol, e_scale);
    const int kz = m - cc.rank;
    if (kz == 0) break;
    A.rightCols(m) = A.rightCols(m) * cc.Z1;
    E.rightCols(m) = E.rightCols(m) * cc.Z1;
    out.Z.rightCols(m) = out.Z.rightCols(m) * cc.Z1;
    E.block(off, off, m, kz).setZero();

    const Matrix A1 = A.block(off, off, m, kz);
    if (smallest_singular_value(A1) <= rank_tol * a_scale) {
      throw Error(ErrorCode::kSingularPencil,
                  "pencil is singular: det(A - lambda E) vanishes identically");
    }
    Eigen::HouseholderQR<Matrix> qr(A1);
    const Matrix Q1 = Matrix(qr.householderQ()).transpose();
    A.bottomRows(m) = Q1 * A.bottomRows(m);
    E.bottomRows(m) = Q1 * E.bottomRows(m);
    out.Q.bottomRows(m) = Q1 * out.Q.bottomRows(m);
    A.block(off, off, m, kz).triangularView<Eigen::StrictlyLower>().setZero();
    E.block(off, 0, m, off).setZero();
    A.block(off, 0, m, off).setZero();
    out.levels.push_back(kz);
    off += kz;
  }
  out.n_infinite = off;
  return out;
}

InfiniteSplit finite_infinite_split(const Matrix& A22, const Matrix& E22,
                                    double rank_tol, double a_scale,
                                    double e_scale) {
  const int n = static_cast<int>(A22.rows());
  if (a_scale < 0.0) a_scale = A22.norm();
  if (e_scale < 0.0) e_scale = E22.norm();
  Matrix At = A22.transpose();
  Matrix Et = E22.transpose();
  const StaircaseResult st =
      leading_infinite_staircase(At, Et, rank_tol, a_scale, e_scale);
  InfiniteSplit out;
  out.n_infinite = st.n_infinite;
  out.n_finite = n - st.n_infinite;
  out.A = pertranspose(At);
  out.E = pertranspose(Et);
  const Matrix P = Matrix::Identity(n, n).colwise().reverse();
  out.Q2 = P * st.Z.transpose();
  out.Z2 = st.Q.transpose() * P;
  return out;
}

Matrix pertranspose(const Matrix& M) {
  return M.transpose().reverse();
}

Matrix upper_factor(const Matrix& M) { return upper_factor_impl(M); }

Matrix sqrt_lyapunov(const Matrix& A22, const Matrix& E22, const Matrix& B2,
                     Domain domain) {
  const Eigen::Index k = A22.rows();
  if (k < 1 || k > 2 || A22.cols() != k || E22.rows() != k ||
      E22.cols() != k || B2.rows() != k) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sqrt_lyapunov: block must be 1x1 or 2x2");
  }
  // Reduce to a standard equation: continuous Ab Y + Y Ab^T = Bb Bb^T with
  // Ab = E^-1 A, discrete Y - At Y At^T = Bt Bt^T with At = A^-1 E.
  Matrix Abar;
  Matrix Bbar;
  if (domain == Domain::kContinuous) {
    Eigen::PartialPivLU<Matrix> lu(E22);
    Abar = lu.solve(A22);
    Bbar = lu.solve(B2);
  } else {
    Eigen::PartialPivLU<Matrix> lu(A22);
    Abar = lu.solve(E22);
    Bbar = lu.solve(B2);
  }
  if (!Abar.allFinite() || !Bbar.allFinite()) {
    throw Error(ErrorCode::kBoundaryEigenvalue,
                "sqrt_lyapunov: singular block pencil");
  }

  // Complex Schur form Abar = U T U^*.
  ComplexMatrix U = ComplexMatrix::Identity(k, k);
  ComplexMatrix Tc = Abar.cast<Complex>();
  if (k == 2) {
    const double half_tr = 0.5 * (Abar(0, 0) + Abar(1, 1));
    const double diff = 0.5 * (Abar(0, 0) - Abar(1, 1));
    const Complex disc(diff * diff + Abar(0, 1) * Abar(1, 0), 0.0);
    const Complex lambda = half_tr + std::sqrt(disc);
    Eigen::Vector2cd v1(Abar(0, 1), lambda - Abar(0, 0));
    Eigen::Vector2cd v2(lambda - Abar(1, 1), Abar(1, 0));
    Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
    if (v.norm() == 0.0) v = Eigen::Vector2cd(1.0, 0.0);
    v.normalize();
    U.col(0) = v;
    U(0, 1) = -std::conj(v(1));
    U(1, 1) = std::conj(v(0));
    Tc = U.adjoint() * Abar.cast<Complex>() * U;
    Tc(1, 0) = 0.0;
  }
  const ComplexMatrix Cc = U.adjoint() * Bbar.cast<Complex>();
  const ComplexMatrix R = upper_factor_impl<ComplexMatrix>(Cc);

  ComplexMatrix Sc = ComplexMatrix::Zero(k, k);
  auto fail = [] {
    throw Error(ErrorCode::kBoundaryEigenvalue,
                "sqrt_lyapunov: eigenvalue on or across the stability boundary");
  };
  auto guard = [&](double den, Complex t) {
    if (!(den > 16.0 * kEps * (1.0 + std::norm(t)))) fail();
  };
  if (domain == Domain::kContinuous) {
    const Complex t22 = Tc(k - 1, k - 1);
    guard(2.0 * t22.real(), t22);
    const double s22 = std::abs(R(k - 1, k - 1)) / std::sqrt(2.0 * t22.real());
    Sc(k - 1, k - 1) = s22;
    if (k == 2) {
      const Complex t11 = Tc(0, 0);
      const Complex t12 = Tc(0, 1);
      guard(2.0 * t11.real(), t11);
      const Complex beta = s22 > 0.0 ? R(1, 1) / s22 : Complex(0.0);
      const Complex s12 =
          (R(0, 1) * std::conj(beta) - t12 * s22) / (t11 + std::conj(t22));
      const double s11sq =
          (std::norm(R(0, 0)) + std::norm(R(0, 1) - beta * s12)) /
          (2.0 * t11.real());
      Sc(0, 1) = s12;
      Sc(0, 0) = std::sqrt(s11sq);
    }
  } else {
    const Complex t22 = Tc(k - 1, k - 1);
    guard(1.0 - std::norm(t22), t22);
    const double s22 =
        std::abs(R(k - 1, k - 1)) / std::sqrt(1.0 - std::norm(t22));
    Sc(k - 1, k - 1) = s22;
    if (k == 2) {
      const Complex t11 = Tc(0, 0);
      const Complex t12 = Tc(0, 1);
      guard(1.0 - std::norm(t11), t11);
      const Complex beta = s22 > 0.0 ? R(1, 1) / s22 : Complex(0.0);
      const Complex s12 = (R(0, 1) * std::conj(beta) +
                           t12 * std::conj(t22) * s22) /
                          (1.0 - t11 * std::conj(t22));
      const Complex x = t11 * s12 + t12 * s22;
      const Complex u = beta * x - t22 * R(0, 1);
      const double s11sq =
          (std::norm(R(0, 0)) + std::norm(u)) / (1.0 - std::norm(t11));
      Sc(0, 1) = s12;
      Sc(0, 0) = std::sqrt(s11sq);
    }
  }
  const ComplexMatrix M = U * Sc;
  Matrix stacked(k, 2 * k);
  stacked << M.real(), M.imag();
  return upper_factor_impl<Matrix>(stacked);
}

Matrix cholesky_update(const Matrix& R, const Matrix& X) {
  Matrix out = R;
  const Eigen::Index m = R.rows();
  for (Eigen::Index row = 0; row < X.rows(); ++row) {
    Vector x = X.row(row).transpose();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double r = std::hypot(out(j, j), x(j));
      if (r == 0.0) continue;
      const double c = out(j, j) / r;
      const double s = x(j) / r;
      out(j, j) = r;
      for (Eigen::Index l = j + 1; l < m; ++l) {
        const double t = c * out(j, l) + s * x(l);
        x(l) = -s * out(j, l) + c * x(l);
        out(j, l) = t;
      }
    }
  }
  return out;
}

std::vector<Complex> generalized_eigenvalues(const Matrix& A,
                                             const Matrix& E) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  std::vector<Complex> out;
  if (n == 0) return out;
  Matrix a = A;
  Matrix b = E;
  std::vector<double> alphar(n), alphai(n), beta(n);
  const lapack_int info =
      LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, b.data(), n,
                    alphar.data(), alphai.data(), beta.data(), nullptr, 1,
                    nullptr, 1);
  check_lapack(info, "dggev");
  if (info > 0) {
    throw Error(ErrorCode::kIterationFailure, "QZ iteration did not converge");
  }
  const double ratio = (1.0 + A.norm()) / (1.0 + E.norm());
  for (lapack_int j = 0; j < n; ++j) {
    const double mag = std::hypot(alphar[j], alphai[j]);
    if (std::abs(beta[j]) * ratio <= 1e3 * kEps * mag || beta[j] == 0.0) {
      out.emplace_back(std::numeric_limits<double>::infinity(), 0.0);
    } else {
      out.emplace_back(alphar[j] / beta[j], alphai[j] / beta[j]);
    }
  }
  return out;
}

}  // namespace descfact
