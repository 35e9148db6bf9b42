#pragma once

#include "descfact/core.h"
#include "descfact/linalg.h"

namespace descfact {

/// Specially ordered GRSF: Q (A - lambda E) Z with block order
/// [simple infinite | good finite | bad finite | higher-order infinite].
struct OrderedGRSF {
  Matrix Q;
  Matrix Z;
  Matrix A;
  Matrix E;
  int n_inf_simple = 0;
  int n_g = 0;
  int n_b_f = 0;
  int n_b_inf = 0;

  int size() const { return static_cast<int>(A.rows()); }
};

/// Region test of a finite diagonal block: good iff all its eigenvalues are.
bool block_is_good(const RegionSpec& region, const BlockEigen& block,
                   double boundary_tol);

OrderedGRSF gsorsf(const DescriptorSystem& sys, const RegionSpec& region,
                   const Tolerances& tol);

}  // namespace descfact
