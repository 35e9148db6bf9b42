#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace descfact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

enum class Domain { kContinuous, kDiscrete };

enum class ErrorCode {
  kDimensionMismatch,
  kNonFiniteEntry,
  kInvalidRegion,
  kSingularPencil,
  kIterationFailure,
  kSwapIllConditioned,
  kBoundaryEigenvalue,
  kSingularBlock,
  kSingularAtPoint,
  kGainLimitExceeded,
  kNoSolution,
};

const char* to_string(ErrorCode code);

/// Exception carrying one of the library error codes. All failures of the
/// numerical routines are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Descriptor realization (A - lambda E, B, C, D) of G(lambda) =
/// C (lambda E - A)^{-1} B + D. When `e_identity` is set, `E` is ignored and
/// treated as the identity of order n.
struct DescriptorSystem {
  Matrix A;
  Matrix E;
  Matrix B;
  Matrix C;
  Matrix D;
  bool e_identity = false;
  Domain domain = Domain::kContinuous;

  int order() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }

  /// E as a dense matrix (identity when the marker is set).
  Matrix dense_E() const;
};

/// Checks dimensions and finiteness. Returns the system unchanged on success.
DescriptorSystem validate_system(const DescriptorSystem& sys);

enum class RegionMode { kStabilize, kAssign, kInner };

/// Partition of the complex plane into good (C_g) and bad (C_b) parts.
///
/// Stabilize/assign modes use the stability degree alpha: C_g = {Re s <= alpha}
/// for continuous time and {|z| <= alpha} for discrete time; the membership
/// test is closed with a `boundary_tol` margin. The inner mode fixes C_g to the
/// open stability domain. Infinity always belongs to C_b.
class RegionSpec {
 public:
  static RegionSpec stabilize(Domain domain, double alpha);
  static RegionSpec assign(Domain domain, double alpha,
                           std::vector<Complex> poles);
  static RegionSpec inner(Domain domain);

  Domain domain() const { return domain_; }
  RegionMode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  const std::vector<Complex>& poles() const { return poles_; }

  bool is_good(Complex lambda, double boundary_tol) const;
  /// True when lambda lies within boundary_tol of the stability boundary
  /// (imaginary axis or unit circle).
  bool on_stability_boundary(Complex lambda, double boundary_tol) const;

 private:
  RegionSpec(Domain domain, RegionMode mode, double alpha,
             std::vector<Complex> poles);

  Domain domain_;
  RegionMode mode_;
  double alpha_;
  std::vector<Complex> poles_;
};

struct Tolerances {
  double rank_tol = 0.0;
  double boundary_tol = 0.0;
  double gain_kappa = 100.0;
  double eval_tol = 1e-7;
  std::uint64_t seed = 0;

  /// rank_tol = max(n,m,p) eps, boundary_tol = 1e-10 (1 + |A|_F + |E|_F).
  static Tolerances defaults_for(const DescriptorSystem& sys);
  void validate() const;
};

/// Shared-state realization of the stacked factors [N; M].
struct StackedFactorRealization {
  Matrix A;
  Matrix E;
  Matrix B;
  Matrix CN;
  Matrix DN;
  Matrix CM;
  Matrix DM;
  Domain domain = Domain::kContinuous;
  // Leading simple infinite eigenvalues (non-dynamic modes).
  int n_nondynamic = 0;
  // Number of dislocated (controllable bad) eigenvalues.
  int denominator_degree = 0;

  int order() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(CN.rows()); }

  DescriptorSystem numerator() const;
  DescriptorSystem denominator() const;
};

/// Trailing k x k subproblem (k = 1 or 2) of the dislocation recursion.
struct BlockProblem {
  Matrix A22;
  Matrix E22;
  Matrix B2;

  int k() const { return static_cast<int>(A22.rows()); }
};

struct AssignmentResult {
  Matrix F2;
  Matrix W;
  std::vector<Complex> gamma;
  double eta = 1.0;
  double gain_norm = 0.0;
};

inline bool is_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace descfact
