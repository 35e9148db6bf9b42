#pragma once

#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "descfact/core.h"

namespace descfact {

enum class BlockKind { kReal, kPair, kInfinite };

struct PoleSelection {
  std::vector<Complex> targets;
  double eta = 1.0;
  std::vector<Complex> remaining;
};

/// Chooses the target poles for one trailing block. `block_eigs` holds the
/// block's eigenvalues (ignored for infinite blocks).
PoleSelection select_poles(const RegionSpec& region, BlockKind kind,
                           const std::vector<Complex>& block_eigs,
                           const std::vector<Complex>& remaining);

/// Orthogonal split exposing an uncontrollable trailing 1x1 block of a 2x2
/// problem: rows are transformed by U, columns by V.
struct DeflationRequest {
  Matrix U;
  Matrix V;
};

AssignmentResult assign_real_1x1(const BlockProblem& block, double gamma);

AssignmentResult assign_infinite_1x1(const BlockProblem& block, double gamma,
                                     double eta);

/// Squared Frobenius norm of F2 as a function of (theta1, theta2) for a
/// rank-2 B2 and a real-coefficient target pair.
class ThetaObjective {
 public:
  ThetaObjective(const BlockProblem& block, Complex g1, Complex g2);

  double operator()(double theta1, double theta2) const;
  Matrix theta(double theta1, double theta2) const;
  Matrix gain(double theta1, double theta2) const;

  double sum() const { return sum_; }
  double product() const { return product_; }
  /// Norm of E22^{-1} A22, the Theta at which F2 vanishes.
  double natural_scale() const { return natural_scale_; }

 private:
  Matrix K_;
  Matrix L_;
  Matrix V1_;
  double sum_;
  double product_;
  double natural_scale_;
};

/// Minimizer of the ThetaObjective: 21x21 log-spaced grid, then Nelder-Mead
/// from the best grid point of each sign of theta2.
std::array<double, 2> minimize_theta(const ThetaObjective& f, Complex g1);

AssignmentResult assign_pair_full(const BlockProblem& block, Complex g1,
                                  Complex g2);

std::variant<AssignmentResult, DeflationRequest> assign_pair_rank1(
    const BlockProblem& block, Complex g1, Complex g2, double tol);

/// Numerical rank of a 2 x m B2 block used to pick the pair formula.
int pair_input_rank(const Matrix& B2);

AssignmentResult inner_gain_continuous(const BlockProblem& block);
AssignmentResult inner_gain_discrete(const BlockProblem& block);
AssignmentResult inner_gain_infinite_discrete(const BlockProblem& block);

}  // namespace descfact
