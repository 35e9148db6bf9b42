#pragma once

#include <variant>
#include <vector>

#include "descfact/assignment.h"
#include "descfact/grcf.h"

namespace descfact::detail {

/// Per-block choice of the elementary factor; implemented by the pole
/// assignment and the inner-denominator variants.
class DislocationStrategy {
 public:
  virtual ~DislocationStrategy() = default;

  virtual AssignmentResult infinite(const BlockProblem& block) = 0;

  virtual std::variant<AssignmentResult, DeflationRequest> finite(
      const BlockProblem& block, const std::vector<Complex>& eigs,
      BlockKind kind) = 0;

  /// Whether a real 1x1 block may be joined with the preceding real 1x1 block
  /// so that a complex target pair can be used.
  virtual bool adjoin_reals() const { return false; }
  /// Whether the last infinite() call fell back to the stability degree.
  virtual bool infinite_fallback() const { return false; }
  virtual bool has_pair_for_reassign() const { return false; }
  virtual std::vector<Complex> take_pair_for_reassign() { return {}; }
  virtual void restore_pair(const std::vector<Complex>&) {}
};

FactorizationResult dislocate(const DescriptorSystem& sys,
                              const RegionSpec& region, const Tolerances& tol,
                              const FactorOptions& options,
                              DislocationStrategy& strategy);

/// Absolute threshold below which a trailing B2 block is treated as zero.
double controllability_threshold(const Tolerances& tol,
                                 const DescriptorSystem& sys);

}  // namespace descfact::detail
