#include "descfact/grcfid.h"

#include "descfact/engine.h"

namespace descfact {

namespace {

class InnerStrategy : public detail::DislocationStrategy {
 public:
  InnerStrategy(const RegionSpec& region, double boundary_tol)
      : region_(region), boundary_tol_(boundary_tol) {}

  AssignmentResult infinite(const BlockProblem& block) override {
    if (region_.domain() == Domain::kContinuous) {
      throw Error(ErrorCode::kNoSolution,
                  "no solution exists: controllable higher-order infinite "
                  "eigenvalue in a continuous-time system");
    }
    return inner_gain_infinite_discrete(block);
  }

  std::variant<AssignmentResult, DeflationRequest> finite(
      const BlockProblem& block, const std::vector<Complex>& eigs,
      BlockKind) override {
    for (const Complex& l : eigs) {
      if (region_.on_stability_boundary(l, boundary_tol_)) {
        throw Error(ErrorCode::kNoSolution,
                    "no solution exists: controllable eigenvalue on the "
                    "stability boundary");
      }
    }
    try {
      if (region_.domain() == Domain::kContinuous) {
        return inner_gain_continuous(block);
      }
      return inner_gain_discrete(block);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBoundaryEigenvalue) {
        throw Error(ErrorCode::kNoSolution,
                    std::string("no solution exists: ") + e.what());
      }
      throw;
    }
  }

 private:
  const RegionSpec& region_;
  double boundary_tol_;
};

}  // namespace

FactorizationResult grcfid(const DescriptorSystem& sys, const Tolerances& tol,
                           const FactorOptions& options) {
  const RegionSpec region = RegionSpec::inner(sys.domain);
  InnerStrategy strategy(region, tol.boundary_tol);
  return detail::dislocate(sys, region, tol, options, strategy);
}

}  // namespace descfact
