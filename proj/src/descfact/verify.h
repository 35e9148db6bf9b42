#pragma once

#include <cstdint>
#include <vector>

#include "descfact/core.h"

namespace descfact {

/// G(lambda) = C (lambda E - A)^{-1} B + D by one complex LU solve.
ComplexMatrix eval_tfm(const DescriptorSystem& sys, Complex lambda);

struct PoleInfo {
  Complex value;
  bool controllable = true;
  bool observable = true;
  bool bad = false;
};

struct PoleReport {
  std::vector<PoleInfo> finite;
  // Higher-order infinite eigenvalues (infinite poles with multiplicity).
  int infinite_multiplicity = 0;
  int infinite_controllable = 0;
  // Simple infinite eigenvalues (non-dynamic modes).
  int nondynamic = 0;
  int n_b = 0;
};

PoleReport pole_report(const DescriptorSystem& sys, const RegionSpec& region,
                       const Tolerances& tol);

/// Finite generalized eigenvalues of the system pencil.
std::vector<Complex> finite_eigenvalues(const DescriptorSystem& sys);

struct RcfReport {
  double reconstruction_error = 0.0;
  std::vector<Complex> region_violations;
  // min over controllable and observable bad poles of G of
  // sigma_min / sigma_max of the stacked factor value; 1 when there are none.
  double coprime_ratio = 1.0;
  double innerness_error = -1.0;
  int denominator_order = 0;
  bool passed = false;
};

/// Deterministic pole-avoiding probe points.
std::vector<Complex> probe_points(Domain domain, double scale, int count,
                                  std::uint64_t seed,
                                  const std::vector<Complex>& avoid);

/// Checks G = N M^{-1} (right) or G = M^{-1} N (left) for separately given
/// factor realizations.
RcfReport check_factors(const DescriptorSystem& G, const DescriptorSystem& N,
                        const DescriptorSystem& M, bool left,
                        const RegionSpec& region, const Tolerances& tol,
                        int samples);

RcfReport check_rcf(const DescriptorSystem& G,
                    const StackedFactorRealization& factors,
                    const RegionSpec& region, const Tolerances& tol,
                    int samples);

/// max |M(l)^H M(l) - I|_F over boundary samples l = i w or e^{i t}.
double check_inner(const DescriptorSystem& M, int samples);

/// Factor poles: diagonal of a quasi-triangular pencil, otherwise QZ.
/// Simple infinite eigenvalues are skipped.
std::vector<Complex> pencil_poles(const Matrix& A, const Matrix& E);

/// Eigenvalues of the unobservable part of a system with invertible E.
std::vector<Complex> unobservable_eigenvalues(const DescriptorSystem& sys,
                                              double rel_tol = 1e-9);

}  // namespace descfact
