#include "descfact/core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace descfact {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::kInvalidRegion: return "InvalidRegion";
    case ErrorCode::kSingularPencil: return "SingularPencil";
    case ErrorCode::kIterationFailure: return "IterationFailure";
    case ErrorCode::kSwapIllConditioned: return "SwapIllConditioned";
    case ErrorCode::kBoundaryEigenvalue: return "BoundaryEigenvalue";
    case ErrorCode::kSingularBlock: return "SingularBlock";
    case ErrorCode::kSingularAtPoint: return "SingularAtPoint";
    case ErrorCode::kGainLimitExceeded: return "GainLimitExceeded";
    case ErrorCode::kNoSolution: return "NoSolution";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

Matrix DescriptorSystem::dense_E() const {
  if (e_identity) return Matrix::Identity(A.rows(), A.rows());
  return E;
}

namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << m.rows() << "x" << m.cols() << ", expected "
       << rows << "x" << cols;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFiniteEntry,
                std::string(name) + " has a non-finite entry");
  }
}

}  // namespace

DescriptorSystem validate_system(const DescriptorSystem& sys) {
  const auto n = sys.A.rows();
  const auto m = sys.B.cols();
  const auto p = sys.C.rows();
  require_shape(sys.A, n, n, "A");
  if (!sys.e_identity) require_shape(sys.E, n, n, "E");
  require_shape(sys.B, n, m, "B");
  require_shape(sys.C, p, n, "C");
  require_shape(sys.D, p, m, "D");
  return sys;
}

RegionSpec::RegionSpec(Domain domain, RegionMode mode, double alpha,
                       std::vector<Complex> poles)
    : domain_(domain), mode_(mode), alpha_(alpha), poles_(std::move(poles)) {}

RegionSpec RegionSpec::stabilize(Domain domain, double alpha) {
  if (!std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidRegion, "stability degree is not finite");
  }
  if (domain == Domain::kContinuous && !(alpha < 0.0)) {
    throw Error(ErrorCode::kInvalidRegion,
                "continuous-time stability degree must be negative");
  }
  if (domain == Domain::kDiscrete && !(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidRegion,
                "discrete-time stability degree must lie in [0, 1)");
  }
  return RegionSpec(domain, RegionMode::kStabilize, alpha, {});
}

RegionSpec RegionSpec::assign(Domain domain, double alpha,
                              std::vector<Complex> poles) {
  RegionSpec region = stabilize(domain, alpha);
  for (const Complex& g : poles) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()) ||
        !region.is_good(g, 0.0)) {
      std::ostringstream os;
      os << "desired pole " << g.real() << (g.imag() < 0 ? "" : "+")
         << g.imag() << "i lies outside the good region";
      throw Error(ErrorCode::kInvalidRegion, os.str());
    }
  }
  // Conjugate symmetry: every non-real pole must have its mirror image with
  // the same multiplicity.
  std::vector<bool> used(poles.size(), false);
  const double tol = 1e-12;
  for (size_t i = 0; i < poles.size(); ++i) {
    if (used[i] || poles[i].imag() == 0.0) continue;
    used[i] = true;
    bool found = false;
    for (size_t j = 0; j < poles.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(poles[j] - std::conj(poles[i])) <=
          tol * (1.0 + std::abs(poles[i]))) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::kInvalidRegion,
                  "desired pole set is not closed under conjugation");
    }
  }
  region.mode_ = RegionMode::kAssign;
  region.poles_ = std::move(poles);
  return region;
}

RegionSpec RegionSpec::inner(Domain domain) {
  return RegionSpec(domain, RegionMode::kInner,
                    domain == Domain::kContinuous ? 0.0 : 1.0, {});
}

bool RegionSpec::is_good(Complex lambda, double boundary_tol) const {
  if (mode_ == RegionMode::kInner) {
    if (domain_ == Domain::kContinuous) {
      return lambda.real() < -boundary_tol * (1.0 + std::abs(lambda));
    }
    return std::abs(lambda) < 1.0 - boundary_tol;
  }
  if (domain_ == Domain::kContinuous) {
    return lambda.real() <= alpha_ + boundary_tol;
  }
  return std::abs(lambda) <= alpha_ + boundary_tol;
}

bool RegionSpec::on_stability_boundary(Complex lambda,
                                       double boundary_tol) const {
  if (domain_ == Domain::kContinuous) {
    return std::abs(lambda.real()) <= boundary_tol * (1.0 + std::abs(lambda));
  }
  return std::abs(std::abs(lambda) - 1.0) <= boundary_tol;
}

Tolerances Tolerances::defaults_for(const DescriptorSystem& sys) {
  Tolerances tol;
  const double eps = std::numeric_limits<double>::epsilon();
  const int dim = std::max({sys.order(), sys.inputs(), sys.outputs(), 1});
  tol.rank_tol = dim * eps;
  const double e_norm = sys.e_identity ? std::sqrt(double(sys.order()))
                                       : sys.E.norm();
  tol.boundary_tol = 1e-10 * (1.0 + sys.A.norm() + e_norm);
  return tol;
}

void Tolerances::validate() const {
  if (!(rank_tol > 0.0) || !(boundary_tol > 0.0) || !(gain_kappa > 0.0) ||
      !(eval_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidRegion,
                "tolerances must be strictly positive");
  }
}

DescriptorSystem StackedFactorRealization::numerator() const {
  DescriptorSystem sys;
  sys.A = A;
  sys.E = E;
  sys.B = B;
  sys.C = CN;
  sys.D = DN;
  sys.domain = domain;
  return sys;
}

DescriptorSystem StackedFactorRealization::denominator() const {
  DescriptorSystem sys;
  sys.A = A;
  sys.E = E;
  sys.B = B;
  sys.C = CM;
  sys.D = DM;
  sys.domain = domain;
  return sys;
}

}  // namespace descfact
