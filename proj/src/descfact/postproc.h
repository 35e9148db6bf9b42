#pragma once

#include "descfact/core.h"
#include "descfact/grcf.h"

namespace descfact {

/// Residualizes the leading simple infinite eigenvalues.
StackedFactorRealization eliminate_nondynamic(
    const StackedFactorRealization& state);

/// Trailing part of the stacked realization seen by C_M = [0 C_M2].
DescriptorSystem minimal_denominator(const StackedFactorRealization& state,
                                     const Tolerances& tol);

/// Shared-state realization of [N M] for a left factorization
/// G = M^{-1} N: N = (A, E, BN, C, DN), M = (A, E, BM, C, DM).
struct LeftFactorRealization {
  Matrix A;
  Matrix E;
  Matrix BN;
  Matrix BM;
  Matrix C;
  Matrix DN;
  Matrix DM;
  Domain domain = Domain::kContinuous;
  int n_nondynamic = 0;
  int denominator_degree = 0;

  int order() const { return static_cast<int>(A.rows()); }
  DescriptorSystem numerator() const;
  DescriptorSystem denominator() const;
};

DescriptorSystem minimal_denominator(const LeftFactorRealization& state,
                                     const Tolerances& tol);

enum class FactorMethod { kPoleAssignment, kInnerDenominator };

struct LeftFactorizationResult {
  LeftFactorRealization factors;
  DislocationLog log;
};

/// Transposed system (A^T - lambda E^T, C^T, B^T, D^T).
DescriptorSystem dual_system(const DescriptorSystem& sys);

/// Left factorization through the dual right factorization and
/// pertransposition. `region` is ignored for the inner-denominator method.
LeftFactorizationResult to_left_factorization(const DescriptorSystem& sys,
                                              FactorMethod method,
                                              const RegionSpec& region,
                                              const Tolerances& tol,
                                              const FactorOptions& options = {},
                                              bool eliminate = true);

}  // namespace descfact
