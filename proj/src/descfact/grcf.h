#pragma once

#include <vector>

#include "descfact/assignment.h"
#include "descfact/core.h"

namespace descfact {

enum class StepKind { kFinite, kInfinite };

struct StepRecord {
  int k = 1;
  StepKind kind = StepKind::kFinite;
  std::vector<Complex> poles;
  double gain_norm = 0.0;
  bool deflated = false;
  bool gain_warning = false;
  // Poles replaced later by a 2x2 re-assignment of two infinite steps.
  bool reassigned = false;
};

struct DislocationLog {
  std::vector<StepRecord> steps;

  /// Assigned poles over all non-deflated steps.
  int assigned_count() const;
  bool any_gain_warning() const;
};

struct FactorOptions {
  bool strict_gain = false;
};

struct FactorizationResult {
  StackedFactorRealization factors;
  DislocationLog log;
};

FactorizationResult grcf(const DescriptorSystem& sys, const RegionSpec& region,
                         const Tolerances& tol, const FactorOptions& options = {});

/// Removes the trailing k states (uncontrollable block).
StackedFactorRealization deflate_uncontrollable(StackedFactorRealization state,
                                                int k);

/// Finite step: A += B [0 F2], B <- B W, C += D [0 F2], D <- D W.
StackedFactorRealization update_finite(StackedFactorRealization state,
                                       const Matrix& F2, const Matrix& W);

/// Infinite step: trailing 1x1 pencil replaced by (gamma, eta).
StackedFactorRealization update_infinite(StackedFactorRealization state,
                                         const Matrix& F2, const Matrix& W,
                                         double gamma, double eta);

}  // namespace descfact
