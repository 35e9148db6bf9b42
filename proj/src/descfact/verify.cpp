#include "descfact/verify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "descfact/gsorsf.h"
#include "descfact/linalg.h"

namespace descfact {

ComplexMatrix eval_tfm(const DescriptorSystem& sys, Complex lambda) {
  const ComplexMatrix D = sys.D.cast<Complex>();
  if (sys.order() == 0) return D;
  const ComplexMatrix P =
      lambda * sys.dense_E().cast<Complex>() - sys.A.cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(P);
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (pivot == 0.0 || !(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularAtPoint,
                "evaluation point is a pole of the realization");
  }
  const ComplexMatrix X = lu.solve(sys.B.cast<Complex>());
  const ComplexMatrix G = sys.C.cast<Complex>() * X + D;
  if (!G.allFinite()) {
    throw Error(ErrorCode::kSingularAtPoint,
                "evaluation point is a pole of the realization");
  }
  return G;
}

std::vector<Complex> finite_eigenvalues(const DescriptorSystem& sys) {
  std::vector<Complex> out;
  for (const Complex& c : generalized_eigenvalues(sys.A, sys.dense_E())) {
    if (std::isfinite(c.real())) out.push_back(c);
  }
  return out;
}

namespace {

// Rank deficiency of the n x (n + w) matrix [P, X].
int rank_deficiency(const ComplexMatrix& P, const ComplexMatrix& X,
                    double scale) {
  ComplexMatrix M(P.rows(), P.cols() + X.cols());
  M << P, X;
  Eigen::BDCSVD<ComplexMatrix> svd(M);
  const auto& s = svd.singularValues();
  const double thr = 1e-8 * std::max(scale, 1e-300);
  int deficient = 0;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (i >= s.size() || s(i) <= thr) ++deficient;
  }
  return deficient;
}

}  // namespace

PoleReport pole_report(const DescriptorSystem& input, const RegionSpec& region,
                       const Tolerances& tol) {
  const DescriptorSystem sys = validate_system(input);
  const OrderedGRSF g = gsorsf(sys, region, tol);
  PoleReport rep;
  rep.nondynamic = g.n_inf_simple;
  rep.infinite_multiplicity = g.n_b_inf;

  // Finite eigenvalues from the ordered form.
  std::vector<Complex> eigs;
  const int lo = g.n_inf_simple;
  const int nf = g.n_g + g.n_b_f;
  int pos = lo;
  for (int s : quasi_blocks(g.A, lo, lo + nf)) {
    for (const Complex& c : block_eigenvalues(g.A, g.E, pos, s).values)
      eigs.push_back(c);
    pos += s;
  }
  const Matrix E = sys.dense_E();
  const double scale = sys.A.norm() + E.norm() + sys.B.norm() + sys.C.norm();
  // Cluster nearly equal eigenvalues and classify each cluster.
  std::vector<bool> done(eigs.size(), false);
  for (size_t i = 0; i < eigs.size(); ++i) {
    if (done[i]) continue;
    std::vector<size_t> cluster;
    for (size_t j = i; j < eigs.size(); ++j) {
      if (!done[j] &&
          std::abs(eigs[j] - eigs[i]) <= 1e-6 * (1.0 + std::abs(eigs[i]))) {
        cluster.push_back(j);
        done[j] = true;
      }
    }
    Complex mean = 0.0;
    for (size_t j : cluster) mean += eigs[j];
    mean /= double(cluster.size());
    const ComplexMatrix P = sys.A.cast<Complex>() - mean * E.cast<Complex>();
    const double pscale = scale * (1.0 + std::abs(mean));
    const int uc = rank_deficiency(P, sys.B.cast<Complex>(), pscale);
    const int uo = rank_deficiency(P.transpose(),
                                   sys.C.transpose().cast<Complex>(), pscale);
    const int mult = static_cast<int>(cluster.size());
    for (int t = 0; t < mult; ++t) {
      PoleInfo info;
      info.value = eigs[cluster[t]];
      info.controllable = t < mult - uc;
      info.observable = t < mult - uo;
      info.bad = !region.is_good(info.value, tol.boundary_tol);
      if (info.bad && info.controllable) ++rep.n_b;
      rep.finite.push_back(info);
    }
  }

  // Controllable higher-order infinite eigenvalues: Krylov rank of
  // (A_inf^{-1} E_inf, A_inf^{-1} B_inf) on the trailing block.
  const int ni = g.n_b_inf;
  if (ni > 0) {
    const Matrix Ai = g.A.bottomRightCorner(ni, ni);
    const Matrix Ei = g.E.bottomRightCorner(ni, ni);
    const Matrix Bi = (g.Q * sys.B).bottomRows(ni);
    Eigen::PartialPivLU<Matrix> lu(Ai);
    const Matrix N = lu.solve(Ei);
    Matrix block = lu.solve(Bi);
    Matrix K(ni, 0);
    for (int it = 0; it < ni; ++it) {
      K.conservativeResize(ni, K.cols() + block.cols());
      K.rightCols(block.cols()) = block;
      block = N * block;
    }
    Eigen::JacobiSVD<Matrix> svd(K);
    const auto& s = svd.singularValues();
    const double thr = 1e-8 * std::max(s.size() ? s(0) : 0.0, 1e-300);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > thr;
    rep.infinite_controllable = rank;
    rep.n_b += rank;
  }
  return rep;
}

std::vector<Complex> probe_points(Domain domain, double scale, int count,
                                  std::uint64_t seed,
                                  const std::vector<Complex>& avoid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double reach = 2.0 * (1.0 + scale);
  const double radii[3] = {0.5, 1.5, 3.0};
  std::vector<Complex> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 100000) {
    Complex l;
    if (domain == Domain::kContinuous) {
      l = Complex(reach * unit(rng), reach * unit(rng));
    } else {
      l = std::polar(radii[out.size() % 3], angle(rng));
    }
    ++attempts;
    bool ok = true;
    for (const Complex& p : avoid) {
      if (std::abs(l - p) <= 1e-3 * (1.0 + std::abs(p))) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(l);
  }
  return out;
}

std::vector<Complex> pencil_poles(const Matrix& A, const Matrix& E) {
  const Eigen::Index n = A.rows();
  bool quasi = true;
  for (Eigen::Index j = 0; j < n && quasi; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if (E(i, j) != 0.0 || (i > j + 1 && A(i, j) != 0.0)) {
        quasi = false;
        break;
      }
    }
    if (j + 2 < n && A(j + 1, j) != 0.0 && A(j + 2, j + 1) != 0.0) quasi = false;
  }
  std::vector<Complex> out;
  if (quasi) {
    int pos = 0;
    for (int s : quasi_blocks(A, 0, static_cast<int>(n))) {
      const BlockEigen b = block_eigenvalues(A, E, pos, s);
      if (!b.infinite) out.insert(out.end(), b.values.begin(), b.values.end());
      pos += s;
    }
    return out;
  }
  for (const Complex& c : generalized_eigenvalues(A, E)) {
    if (std::isfinite(c.real())) out.push_back(c);
  }
  return out;
}

namespace {

double max_abs(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& c : v) s = std::max(s, std::abs(c));
  return s;
}

ComplexMatrix stack_values(const ComplexMatrix& N, const ComplexMatrix& M,
                           bool left) {
  if (left) {
    ComplexMatrix out(N.rows(), N.cols() + M.cols());
    out << N, M;
    return out;
  }
  ComplexMatrix out(N.rows() + M.rows(), N.cols());
  out << N, M;
  return out;
}

}  // namespace

RcfReport check_factors(const DescriptorSystem& G, const DescriptorSystem& N,
                        const DescriptorSystem& M, bool left,
                        const RegionSpec& region, const Tolerances& tol,
                        int samples) {
  RcfReport rep;
  PoleReport pr;
  bool have_report = true;
  try {
    pr = pole_report(G, region, tol);
  } catch (const Error&) {
    have_report = false;
  }
  std::vector<Complex> g_poles;
  if (have_report) {
    for (const PoleInfo& p : pr.finite) g_poles.push_back(p.value);
  } else {
    g_poles = finite_eigenvalues(G);
  }
  std::vector<Complex> f_poles = pencil_poles(N.A, N.dense_E());
  const std::vector<Complex> m_poles = pencil_poles(M.A, M.dense_E());
  for (const Complex& p : f_poles) {
    if (!region.is_good(p, tol.boundary_tol)) rep.region_violations.push_back(p);
  }
  for (const Complex& p : m_poles) {
    if (!region.is_good(p, tol.boundary_tol)) rep.region_violations.push_back(p);
  }
  // Denominator order: dynamic part of the M pencil.
  rep.denominator_order = static_cast<int>(m_poles.size());

  std::vector<Complex> avoid = g_poles;
  avoid.insert(avoid.end(), f_poles.begin(), f_poles.end());
  avoid.insert(avoid.end(), m_poles.begin(), m_poles.end());
  const double scale = max_abs(avoid);
  std::vector<Complex> pts =
      probe_points(G.domain, scale, 4 * samples, tol.seed, avoid);
  int used = 0;
  for (const Complex& l : pts) {
    if (used >= samples) break;
    ComplexMatrix gv, nv, mv;
    try {
      gv = eval_tfm(G, l);
      nv = eval_tfm(N, l);
      mv = eval_tfm(M, l);
    } catch (const Error&) {
      continue;
    }
    Eigen::PartialPivLU<ComplexMatrix> lu(mv);
    if (!(lu.rcond() > 1e-10)) continue;
    ComplexMatrix rec;
    if (left) {
      rec = lu.solve(nv);
    } else {
      rec = Eigen::PartialPivLU<ComplexMatrix>(mv.transpose())
                .solve(nv.transpose())
                .transpose();
    }
    const double err = (gv - rec).norm() / (1.0 + gv.norm());
    rep.reconstruction_error = std::max(rep.reconstruction_error, err);
    ++used;
  }

  // Coprimeness at controllable and observable bad poles of G.
  if (!have_report) {
    rep.coprime_ratio = 0.0;
  } else {
    for (const PoleInfo& p : pr.finite) {
      if (!p.bad || !p.controllable || !p.observable) continue;
      ComplexMatrix nv, mv;
      try {
        nv = eval_tfm(N, p.value);
        mv = eval_tfm(M, p.value);
      } catch (const Error&) {
        continue;
      }
      const ComplexMatrix st = stack_values(nv, mv, left);
      Eigen::JacobiSVD<ComplexMatrix> svd(st);
      const auto& s = svd.singularValues();
      const double ratio = s(s.size() - 1) / std::max(s(0), 1e-300);
      rep.coprime_ratio = std::min(rep.coprime_ratio, ratio);
    }
  }
  rep.passed = rep.reconstruction_error <= tol.eval_tol &&
               rep.region_violations.empty() && rep.coprime_ratio >= 1e-8 &&
               used > 0;
  return rep;
}

RcfReport check_rcf(const DescriptorSystem& G,
                    const StackedFactorRealization& factors,
                    const RegionSpec& region, const Tolerances& tol,
                    int samples) {
  return check_factors(G, factors.numerator(), factors.denominator(), false,
                       region, tol, samples);
}

double check_inner(const DescriptorSystem& M, int samples) {
  if (M.outputs() != M.inputs()) {
    throw Error(ErrorCode::kDimensionMismatch, "check_inner: M must be square");
  }
  const double scale = 1.0 + max_abs(finite_eigenvalues(M));
  const ComplexMatrix I = ComplexMatrix::Identity(M.inputs(), M.inputs());
  auto point = [&](double u) {
    if (M.domain == Domain::kContinuous) {
      return Complex(0.0, scale * std::tan(0.5 * std::numbers::pi * u));
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * u);
  };
  double worst = 0.0;
  for (int j = 0; j < samples; ++j) {
    // Shift the sample slightly when it hits a pole.
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double u = (j + 0.5 + 0.1 * attempt) / samples;
      try {
        const ComplexMatrix v = eval_tfm(M, point(u));
        worst = std::max(worst, (v.adjoint() * v - I).norm());
        break;
      } catch (const Error&) {
      }
    }
  }
  return worst;
}

std::vector<Complex> unobservable_eigenvalues(const DescriptorSystem& sys,
                                              double rel_tol) {
  const int n = sys.order();
  if (n == 0) return {};
  Eigen::PartialPivLU<Matrix> lu(sys.dense_E());
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularBlock,
                "unobservable_eigenvalues: E must be invertible");
  }
  const Matrix F = lu.solve(sys.A);
  Matrix O(0, n);
  Matrix row = sys.C;
  for (int i = 0; i < n; ++i) {
    O.conservativeResize(O.rows() + row.rows(), n);
    O.bottomRows(row.rows()) = row;
    row = row * F;
  }
  Eigen::JacobiSVD<Matrix> svd(O, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thr = rel_tol * std::max(s.size() ? s(0) : 0.0, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > thr;
  const int k = n - rank;
  if (k == 0) return {};
  const Matrix Nb = svd.matrixV().rightCols(k);
  const Matrix R = Nb.transpose() * F * Nb;
  Eigen::EigenSolver<Matrix> es(R, false);
  std::vector<Complex> out;
  for (int i = 0; i < k; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

}  // namespace descfact
