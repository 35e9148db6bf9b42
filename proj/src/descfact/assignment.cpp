#include "descfact/assignment.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "descfact/linalg.h"

namespace descfact {

namespace {

bool is_real(Complex c) { return c.imag() == 0.0; }

// Stabilize-mode choice for a block.
std::vector<Complex> stabilize_targets(const RegionSpec& region,
                                       BlockKind kind,
                                       const std::vector<Complex>& eigs) {
  const double a = region.alpha();
  if (kind != BlockKind::kPair) return {Complex(a, 0.0)};
  Complex upper = eigs[0].imag() >= eigs[1].imag() ? eigs[0] : eigs[1];
  if (upper.imag() == 0.0) return {Complex(a, 0.0), Complex(a, 0.0)};
  if (region.domain() == Domain::kContinuous) {
    return {Complex(a, upper.imag()), Complex(a, -upper.imag())};
  }
  const Complex scaled = a * upper / std::abs(upper);
  return {scaled, std::conj(scaled)};
}

double distance_to_block(Complex g, const std::vector<Complex>& eigs) {
  double best = std::numeric_limits<double>::infinity();
  for (const Complex& e : eigs) best = std::min(best, std::abs(g - e));
  return best;
}

void erase_one(std::vector<Complex>& v, Complex value) {
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (*it == value) {
      v.erase(it);
      return;
    }
  }
}

// Index of the conjugate partner of v[i], or -1.
int partner(const std::vector<Complex>& v, size_t i) {
  const Complex target = std::conj(v[i]);
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < v.size(); ++j) {
    if (j == i) continue;
    const double d = std::abs(v[j] - target);
    if (d < dist) {
      dist = d;
      best = static_cast<int>(j);
    }
  }
  if (best >= 0 && dist <= 1e-12 * (1.0 + std::abs(v[i]))) return best;
  return -1;
}

}  // namespace

PoleSelection select_poles(const RegionSpec& region, BlockKind kind,
                           const std::vector<Complex>& block_eigs,
                           const std::vector<Complex>& remaining) {
  PoleSelection out;
  out.remaining = remaining;
  if (region.mode() != RegionMode::kAssign) {
    out.targets = stabilize_targets(region, kind, block_eigs);
    return out;
  }
  std::vector<Complex>& pool = out.remaining;
  if (kind == BlockKind::kInfinite) {
    int best = -1;
    double key = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (!is_real(pool[i])) continue;
      const double k = region.domain() == Domain::kContinuous
                           ? pool[i].real()
                           : std::abs(pool[i]);
      if (k > key) {
        key = k;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      out.targets = stabilize_targets(region, kind, block_eigs);
    } else {
      out.targets = {pool[best]};
      pool.erase(pool.begin() + best);
    }
    return out;
  }
  if (kind == BlockKind::kReal) {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (!is_real(pool[i])) continue;
      const double d = distance_to_block(pool[i], block_eigs);
      if (d < dist) {
        dist = d;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      out.targets = stabilize_targets(region, kind, block_eigs);
    } else {
      out.targets = {pool[best]};
      pool.erase(pool.begin() + best);
    }
    return out;
  }
  // Pair: nearest complex pair, else nearest reals, else stabilize choice.
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pool.size(); ++i) {
    if (!(pool[i].imag() > 0.0) || partner(pool, i) < 0) continue;
    const double d = distance_to_block(pool[i], block_eigs);
    if (d < dist) {
      dist = d;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0) {
    const Complex g = pool[best];
    const Complex gc = pool[partner(pool, best)];
    out.targets = {g, gc};
    erase_one(pool, g);
    erase_one(pool, gc);
    return out;
  }
  for (int pick = 0; pick < 2; ++pick) {
    int bi = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (!is_real(pool[i])) continue;
      const double d = distance_to_block(pool[i], block_eigs);
      if (d < bd) {
        bd = d;
        bi = static_cast<int>(i);
      }
    }
    if (bi < 0) break;
    out.targets.push_back(pool[bi]);
    pool.erase(pool.begin() + bi);
  }
  if (out.targets.empty()) {
    out.targets = stabilize_targets(region, kind, block_eigs);
  } else if (out.targets.size() == 1) {
    out.targets.push_back(Complex(region.alpha(), 0.0));
  }
  return out;
}

AssignmentResult assign_real_1x1(const BlockProblem& block, double gamma) {
  const Matrix& B2 = block.B2;
  const double sigma2 = B2.squaredNorm();
  const double rhs = block.E22(0, 0) * gamma - block.A22(0, 0);
  AssignmentResult out;
  out.F2 = B2.transpose() * (rhs / sigma2);
  out.W = Matrix::Identity(B2.cols(), B2.cols());
  out.gamma = {Complex(gamma, 0.0)};
  out.gain_norm = out.F2.norm();
  return out;
}

AssignmentResult assign_infinite_1x1(const BlockProblem& block, double gamma,
                                     double eta) {
  const Matrix& B2 = block.B2;
  const double sigma = B2.norm();
  const Vector v1 = B2.row(0).transpose() / sigma;
  AssignmentResult out;
  out.F2 = -v1 * (block.A22(0, 0) / sigma);
  out.W = Matrix::Identity(B2.cols(), B2.cols()) - v1 * v1.transpose();
  out.gamma = {Complex(gamma, 0.0)};
  out.eta = eta;
  out.gain_norm = out.F2.norm();
  return out;
}

ThetaObjective::ThetaObjective(const BlockProblem& block, Complex g1,
                               Complex g2)
    : sum_((g1 + g2).real()), product_((g1 * g2).real()) {
  Eigen::JacobiSVD<Matrix> svd(block.B2, Eigen::ComputeFullU |
                                             Eigen::ComputeFullV);
  const Vector s = svd.singularValues().head(2);
  const Matrix Ut = svd.matrixU().transpose();
  const Matrix sinv = s.cwiseInverse().asDiagonal();
  K_ = sinv * Ut * block.E22;
  L_ = sinv * Ut * block.A22;
  V1_ = svd.matrixV().leftCols(2);
  natural_scale_ = block.E22.fullPivLu().solve(block.A22).norm();
}

Matrix ThetaObjective::theta(double t1, double t2) const {
  Matrix th(2, 2);
  th(0, 0) = t1;
  th(0, 1) = t2;
  th(1, 1) = sum_ - t1;
  th(1, 0) = (t1 * (sum_ - t1) - product_) / t2;
  return th;
}

double ThetaObjective::operator()(double t1, double t2) const {
  if (t2 == 0.0 || !std::isfinite(t1) || !std::isfinite(t2)) {
    return std::numeric_limits<double>::infinity();
  }
  return (K_ * theta(t1, t2) - L_).squaredNorm();
}

Matrix ThetaObjective::gain(double t1, double t2) const {
  return V1_ * (K_ * theta(t1, t2) - L_);
}

namespace {

// Nelder-Mead on a 2-D function with a fixed evaluation budget.
std::array<double, 2> nelder_mead(
    const std::function<double(const std::array<double, 2>&)>& f,
    std::array<double, 2> x0, std::array<double, 2> step, int budget) {
  std::array<std::array<double, 2>, 3> x = {
      x0, {x0[0] + step[0], x0[1]}, {x0[0], x0[1] + step[1]}};
  std::array<double, 3> fx;
  for (int i = 0; i < 3; ++i) fx[i] = f(x[i]);
  int evals = 3;
  auto point = [](const std::array<double, 2>& a, const std::array<double, 2>& b,
                  double t) {
    return std::array<double, 2>{a[0] + t * (b[0] - a[0]),
                                 a[1] + t * (b[1] - a[1])};
  };
  while (evals < budget) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int lo = idx[0], mid = idx[1], hi = idx[2];
    const double spread = std::abs(fx[hi] - fx[lo]);
    const double size = std::max(std::abs(x[hi][0] - x[lo][0]) + std::abs(x[mid][0] - x[lo][0]),
                                 std::abs(x[hi][1] - x[lo][1]) + std::abs(x[mid][1] - x[lo][1]));
    if (spread <= 1e-30 && size <= 1e-15) break;
    const std::array<double, 2> centroid = {0.5 * (x[lo][0] + x[mid][0]),
                                            0.5 * (x[lo][1] + x[mid][1])};
    const auto xr = point(centroid, x[hi], -1.0);
    const double fr = f(xr);
    ++evals;
    if (fr < fx[lo]) {
      const auto xe = point(centroid, x[hi], -2.0);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        x[hi] = xe;
        fx[hi] = fe;
      } else {
        x[hi] = xr;
        fx[hi] = fr;
      }
    } else if (fr < fx[mid]) {
      x[hi] = xr;
      fx[hi] = fr;
    } else {
      const bool outside = fr < fx[hi];
      const auto xc = point(centroid, outside ? xr : x[hi], 0.5);
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fx[hi])) {
        x[hi] = xc;
        fx[hi] = fc;
      } else {
        for (int i : {mid, hi}) {
          x[i] = point(x[lo], x[i], 0.5);
          fx[i] = f(x[i]);
          ++evals;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (fx[i] < fx[best]) best = i;
  return x[best];
}

}  // namespace

std::array<double, 2> minimize_theta(const ThetaObjective& f, Complex g1) {
  const double c1 = 0.5 * f.sum();
  const double t0 = std::max(std::abs(g1.imag()), 0.1 * (1.0 + std::abs(g1)));
  const double reach = std::max(t0, f.natural_scale() + std::abs(g1));
  std::vector<double> offsets = {0.0};
  std::vector<double> t2_values;
  for (int i = 0; i < 10; ++i) {
    const double w = reach * std::pow(10.0, -3.0 + 4.0 * i / 9.0);
    offsets.push_back(w);
    offsets.push_back(-w);
    t2_values.push_back(-w);
  }
  for (int i = 0; i < 11; ++i) {
    t2_values.push_back(reach * std::pow(10.0, -3.0 + 4.0 * i / 10.0));
  }
  // Best grid point per sign of theta2; each seeds a local refinement in
  // (theta1, log|theta2|) with half of the evaluation budget.
  std::array<double, 2> best = {std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity()};
  std::array<std::array<double, 2>, 2> arg = {{{c1, -t0}, {c1, t0}}};
  for (double o : offsets) {
    for (double t2 : t2_values) {
      const double v = f(c1 + o, t2);
      const int side = t2 > 0.0 ? 1 : 0;
      if (v < best[side]) {
        best[side] = v;
        arg[side] = {c1 + o, t2};
      }
    }
  }
  std::array<double, 2> result = best[1] <= best[0] ? arg[1] : arg[0];
  double result_value = std::min(best[0], best[1]);
  for (int side = 0; side < 2; ++side) {
    if (!std::isfinite(best[side])) continue;
    const double sign = side == 1 ? 1.0 : -1.0;
    auto g = [&](const std::array<double, 2>& x) {
      return f(x[0], sign * std::exp(x[1]));
    };
    const std::array<double, 2> x =
        nelder_mead(g, {arg[side][0], std::log(std::abs(arg[side][1]))},
                    {0.05 * reach, 0.2}, 100);
    const std::array<double, 2> refined = {x[0], sign * std::exp(x[1])};
    const double v = f(refined[0], refined[1]);
    if (v < result_value) {
      result_value = v;
      result = refined;
    }
  }
  return result;
}

AssignmentResult assign_pair_full(const BlockProblem& block, Complex g1,
                                  Complex g2) {
  const ThetaObjective f(block, g1, g2);
  const auto t = minimize_theta(f, g1.imag() >= g2.imag() ? g1 : g2);
  AssignmentResult out;
  out.F2 = f.gain(t[0], t[1]);
  out.W = Matrix::Identity(block.B2.cols(), block.B2.cols());
  out.gamma = {g1, g2};
  out.gain_norm = out.F2.norm();
  return out;
}

int pair_input_rank(const Matrix& B2) {
  Eigen::JacobiSVD<Matrix> svd(B2);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  if (s.size() < 2) return 1;
  return s(1) > 1e-8 * s(0) ? 2 : 1;
}

std::variant<AssignmentResult, DeflationRequest> assign_pair_rank1(
    const BlockProblem& block, Complex g1, Complex g2, double tol) {
  Eigen::PartialPivLU<Matrix> lu(block.E22);
  const Matrix EB = lu.solve(block.B2);
  Eigen::JacobiSVD<Matrix> svd(EB, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double sigma = svd.singularValues()(0);
  const Matrix U = svd.matrixU();
  const Vector v1 = svd.matrixV().col(0);
  const Matrix alpha = U.transpose() * lu.solve(block.A22) * U;
  if (std::abs(alpha(1, 0)) <= tol * std::max(alpha.norm(), 1e-300)) {
    // Left factor from B2's singular vectors, right factor from the RQ
    // decomposition of U_l E22.
    Eigen::JacobiSVD<Matrix> bsvd(block.B2, Eigen::ComputeFullU);
    DeflationRequest req;
    req.U = bsvd.matrixU().transpose();
    const Matrix M = req.U * block.E22;
    const double m0 = M(1, 0), m1 = M(1, 1);
    const double r = std::hypot(m0, m1);
    req.V = Matrix::Identity(2, 2);
    if (r > 0.0) {
      req.V << m1 / r, m0 / r, -m0 / r, m1 / r;
    }
    return req;
  }
  const double a11 = alpha(0, 0), a12 = alpha(0, 1), a21 = alpha(1, 0),
               a22 = alpha(1, 1);
  const double s = (g1 + g2).real();
  const double p = (g1 * g2).real();
  const double phi1 = (s - a11 - a22) / sigma;
  const double phi2 = (a22 / a21) * phi1 + (a11 * a22 - a12 * a21 - p) / (a21 * sigma);
  AssignmentResult out;
  Matrix phi(1, 2);
  phi << phi1, phi2;
  out.F2 = v1 * phi * U.transpose();
  out.W = Matrix::Identity(block.B2.cols(), block.B2.cols());
  out.gamma = {g1, g2};
  out.gain_norm = out.F2.norm();
  return out;
}

namespace {

std::vector<Complex> block_spectrum(const BlockProblem& block) {
  const int k = block.k();
  if (k == 1) return {Complex(block.A22(0, 0) / block.E22(0, 0), 0.0)};
  Eigen::Matrix<double, 2, 2> t = block.E22;
  const Eigen::Matrix2d m = t.partialPivLu().solve(Eigen::Matrix2d(block.A22));
  Eigen::EigenSolver<Eigen::Matrix2d> es(m, false);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace

AssignmentResult inner_gain_continuous(const BlockProblem& block) {
  const Matrix S =
      sqrt_lyapunov(block.A22, block.E22, block.B2, Domain::kContinuous);
  const Matrix EB = block.E22.partialPivLu().solve(block.B2);
  const Matrix X = S.triangularView<Eigen::Upper>().solve(EB);
  const Matrix Y = S.transpose().triangularView<Eigen::Lower>().solve(X);
  AssignmentResult out;
  out.F2 = -Y.transpose();
  out.W = Matrix::Identity(block.B2.cols(), block.B2.cols());
  for (const Complex& l : block_spectrum(block)) out.gamma.push_back(-std::conj(l));
  out.gain_norm = out.F2.norm();
  return out;
}

AssignmentResult inner_gain_discrete(const BlockProblem& block) {
  const Matrix S =
      sqrt_lyapunov(block.A22, block.E22, block.B2, Domain::kDiscrete);
  const Matrix AB = block.A22.partialPivLu().solve(block.B2);
  const Matrix Xa = S.triangularView<Eigen::Upper>().solve(AB);
  const Matrix Ya = S.transpose().triangularView<Eigen::Lower>().solve(Xa);
  const Matrix EB = block.E22.partialPivLu().solve(block.B2);
  const Matrix X = S.triangularView<Eigen::Upper>().solve(EB);
  const Eigen::Index m = block.B2.cols();
  const Matrix R = cholesky_update(Matrix::Identity(m, m), X);
  AssignmentResult out;
  out.F2 = -Ya.transpose();
  out.W = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
  for (const Complex& l : block_spectrum(block)) out.gamma.push_back(1.0 / std::conj(l));
  out.gain_norm = out.F2.norm();
  return out;
}

AssignmentResult inner_gain_infinite_discrete(const BlockProblem& block) {
  return assign_infinite_1x1(block, 0.0, -block.A22(0, 0));
}

}  // namespace descfact
