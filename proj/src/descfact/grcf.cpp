#include "descfact/grcf.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "descfact/engine.h"
#include "descfact/gsorsf.h"
#include "descfact/linalg.h"

namespace descfact {

int DislocationLog::assigned_count() const {
  int count = 0;
  for (const StepRecord& s : steps) {
    if (!s.deflated) count += static_cast<int>(s.poles.size());
  }
  return count;
}

bool DislocationLog::any_gain_warning() const {
  for (const StepRecord& s : steps)
    if (s.gain_warning) return true;
  return false;
}

StackedFactorRealization deflate_uncontrollable(StackedFactorRealization st,
                                                int k) {
  const int n = st.order() - k;
  st.A.conservativeResize(n, n);
  st.E.conservativeResize(n, n);
  st.B.conservativeResize(n, Eigen::NoChange);
  st.CN.conservativeResize(Eigen::NoChange, n);
  st.CM.conservativeResize(Eigen::NoChange, n);
  return st;
}

StackedFactorRealization update_finite(StackedFactorRealization st,
                                       const Matrix& F2, const Matrix& W) {
  const Eigen::Index k = F2.cols();
  st.A.rightCols(k) += st.B * F2;
  st.B = st.B * W;
  st.CN.rightCols(k) += st.DN * F2;
  st.CM.rightCols(k) += st.DM * F2;
  st.DN = st.DN * W;
  st.DM = st.DM * W;
  return st;
}

StackedFactorRealization update_infinite(StackedFactorRealization st,
                                         const Matrix& F2, const Matrix& W,
                                         double gamma, double eta) {
  const int n = st.order();
  st.A.col(n - 1).head(n - 1) += st.B.topRows(n - 1) * F2;
  st.A(n - 1, n - 1) = gamma;
  st.E(n - 1, n - 1) = eta;
  st.B.topRows(n - 1) = st.B.topRows(n - 1) * W;
  st.CN.col(n - 1) += st.DN * F2;
  st.CM.col(n - 1) += st.DM * F2;
  st.DN = st.DN * W;
  st.DM = st.DM * W;
  return st;
}

namespace detail {

double controllability_threshold(const Tolerances& tol,
                                 const DescriptorSystem& sys) {
  const double pencil = sys.A.norm() + sys.dense_E().norm() + sys.B.norm();
  return std::max(1e3 * tol.rank_tol * sys.B.norm(), 1e-8 * pencil);
}

namespace {

constexpr double kRank1Tol = 1e-10;

void apply_left(StackedFactorRealization& st, int lo, const Matrix& Q) {
  const Eigen::Index w = Q.rows();
  st.A.middleRows(lo, w) = Q * st.A.middleRows(lo, w);
  st.E.middleRows(lo, w) = Q * st.E.middleRows(lo, w);
  st.B.middleRows(lo, w) = Q * st.B.middleRows(lo, w);
}

void apply_right(StackedFactorRealization& st, int lo, const Matrix& Z) {
  const Eigen::Index w = Z.rows();
  st.A.middleCols(lo, w) = st.A.middleCols(lo, w) * Z;
  st.E.middleCols(lo, w) = st.E.middleCols(lo, w) * Z;
  st.CN.middleCols(lo, w) = st.CN.middleCols(lo, w) * Z;
  st.CM.middleCols(lo, w) = st.CM.middleCols(lo, w) * Z;
}

// Moves the block at `from` to `to` inside the window [lo, n) and carries the
// transformation over to B and the output matrices.
void move(StackedFactorRealization& st, int lo, int from, int to) {
  const WindowTransform wt = move_block(st.A, st.E, lo, from, to);
  const Eigen::Index w = wt.Q.rows();
  st.B.middleRows(lo, w) = wt.Q * st.B.middleRows(lo, w);
  st.CN.middleCols(lo, w) = st.CN.middleCols(lo, w) * wt.Z;
  st.CM.middleCols(lo, w) = st.CM.middleCols(lo, w) * wt.Z;
}

// Brings a trailing 2x2 block to standard GRSF form (splitting real pairs).
void standardize_pair(StackedFactorRealization& st) {
  const int n = st.order();
  const int lo = n - 2;
  const SchurPair p =
      grsf(st.A.block(lo, lo, 2, 2), st.E.block(lo, lo, 2, 2));
  apply_left(st, lo, p.Q);
  apply_right(st, lo, p.Z);
  st.A.block(lo, lo, 2, 2) = p.S;
  st.E.block(lo, lo, 2, 2) = p.T;
}

// Moves every block of the trailing range [lo, n) to the front of the bad
// part, starting at q. Returns the new q.
int settle(StackedFactorRealization& st, int q, int lo) {
  const int n = st.order();
  const std::vector<int> sizes = quasi_blocks(st.A, lo, n);
  int from = lo;
  for (int s : sizes) {
    if (from != q) move(st, q, from, q);
    q += s;
    from += s;
  }
  return q;
}

void check_gain(StepRecord& rec, double limit, const FactorOptions& options) {
  if (rec.gain_norm > limit) {
    rec.gain_warning = true;
    if (options.strict_gain) {
      std::ostringstream os;
      os << "feedback gain " << rec.gain_norm << " exceeds limit " << limit;
      throw Error(ErrorCode::kGainLimitExceeded, os.str());
    }
  }
}

BlockProblem trailing(const StackedFactorRealization& st, int k) {
  return BlockProblem{st.A.bottomRightCorner(k, k), st.E.bottomRightCorner(k, k),
                      st.B.bottomRows(k)};
}

// Applies a DeflationRequest to the trailing 2x2 block and drops the exposed
// uncontrollable state.
void apply_deflation(StackedFactorRealization& st, const DeflationRequest& req) {
  const int n = st.order();
  apply_left(st, n - 2, req.U);
  apply_right(st, n - 2, req.V);
  st.A(n - 1, n - 2) = 0.0;
  st.E(n - 1, n - 2) = 0.0;
  st = deflate_uncontrollable(std::move(st), 1);
}

// Row sign of a trailing infinite block, fixed so that the largest entry of
// its input row is negative.
void normalize_infinite_row(StackedFactorRealization& st) {
  const int n = st.order();
  Eigen::Index j = 0;
  st.B.row(n - 1).cwiseAbs().maxCoeff(&j);
  if (st.B(n - 1, j) > 0.0) {
    st.A.row(n - 1) *= -1.0;
    st.B.row(n - 1) *= -1.0;
  }
}

}  // namespace

FactorizationResult dislocate(const DescriptorSystem& input,
                              const RegionSpec& region, const Tolerances& tol,
                              const FactorOptions& options,
                              DislocationStrategy& strategy) {
  const DescriptorSystem sys = validate_system(input);
  tol.validate();
  const OrderedGRSF g = gsorsf(sys, region, tol);
  const int m = sys.inputs();

  FactorizationResult result;
  StackedFactorRealization& st = result.factors;
  st.A = g.A;
  st.E = g.E;
  st.B = g.Q * sys.B;
  st.CN = sys.C * g.Z;
  st.DN = sys.D;
  st.CM = Matrix::Zero(m, g.size());
  st.DM = Matrix::Identity(m, m);
  st.domain = sys.domain;
  st.n_nondynamic = g.n_inf_simple;

  const double b_norm = sys.B.norm();
  const double gain_limit = b_norm > 0.0
                                ? tol.gain_kappa * sys.A.norm() / b_norm
                                : std::numeric_limits<double>::infinity();
  const double ctrl = controllability_threshold(tol, sys);
  std::vector<StepRecord>& log = result.log.steps;

  int q = g.n_inf_simple + g.n_g;
  int pending = -1;  // log index of an infinite fallback block sitting at q-1
  while (st.order() > q) {
    const int n = st.order();
    int k = (n - 2 >= q && st.A(n - 1, n - 2) != 0.0) ? 2 : 1;
    StepRecord rec;
    rec.k = k;
    if (st.B.bottomRows(k).norm() <= ctrl) {
      rec.deflated = true;
      rec.kind = (k == 1 && st.E(n - 1, n - 1) == 0.0) ? StepKind::kInfinite
                                                      : StepKind::kFinite;
      st = deflate_uncontrollable(std::move(st), k);
      log.push_back(rec);
      pending = -1;
      continue;
    }
    const bool infinite = k == 1 && st.E(n - 1, n - 1) == 0.0;

    if (infinite) {
      rec.kind = StepKind::kInfinite;
      normalize_infinite_row(st);
      const AssignmentResult res = strategy.infinite(trailing(st, 1));
      rec.gain_norm = res.gain_norm;
      rec.poles = {res.gamma[0] / res.eta};
      check_gain(rec, gain_limit, options);
      st = update_infinite(std::move(st), res.F2, res.W, res.gamma[0].real(),
                           res.eta);
      const bool fallback = strategy.infinite_fallback();
      if (fallback && pending >= 0 && strategy.has_pair_for_reassign()) {
        // Bring the previous fallback block next to the new one and assign a
        // complex pair to both.
        move(st, q - 1, q - 1, n - 1);
        --q;
        const BlockProblem bp = trailing(st, 2);
        const std::vector<Complex> pair = strategy.take_pair_for_reassign();
        std::variant<AssignmentResult, DeflationRequest> out;
        if (pair_input_rank(bp.B2) == 2) {
          out = assign_pair_full(bp, pair[0], pair[1]);
        } else {
          out = assign_pair_rank1(bp, pair[0], pair[1], kRank1Tol);
        }
        if (const auto* pr = std::get_if<AssignmentResult>(&out)) {
          StepRecord& prev = log[pending];
          prev.poles = {pair[0]};
          prev.reassigned = true;
          rec.poles = {pair[1]};
          rec.reassigned = true;
          rec.gain_norm = std::max(rec.gain_norm, pr->gain_norm);
          check_gain(rec, gain_limit, options);
          st = update_finite(std::move(st), pr->F2, pr->W);
          standardize_pair(st);
        } else {
          strategy.restore_pair(pair);
        }
        q = settle(st, q, n - 2);
        log.push_back(rec);
        pending = -1;
        continue;
      }
      q = settle(st, q, n - 1);
      log.push_back(rec);
      pending = fallback ? static_cast<int>(log.size()) - 1 : -1;
      continue;
    }
    pending = -1;

    // Finite block, possibly adjoined with a preceding real 1x1 block.
    if (k == 1 && n - 2 >= q && st.E(n - 2, n - 2) != 0.0 &&
        (n - 2 == q || st.A(n - 2, n - 3) == 0.0) && strategy.adjoin_reals()) {
      k = 2;
      rec.k = 2;
    }
    rec.kind = StepKind::kFinite;
    std::vector<Complex> eigs;
    BlockKind kind = BlockKind::kReal;
    if (k == 2 && st.A(n - 1, n - 2) == 0.0) {
      eigs = {Complex(st.A(n - 2, n - 2) / st.E(n - 2, n - 2), 0.0),
              Complex(st.A(n - 1, n - 1) / st.E(n - 1, n - 1), 0.0)};
      kind = BlockKind::kPair;
    } else {
      eigs = block_eigenvalues(st.A, st.E, n - k, k).values;
      kind = k == 1 ? BlockKind::kReal : BlockKind::kPair;
    }
    const auto out = strategy.finite(trailing(st, k), eigs, kind);
    if (const auto* req = std::get_if<DeflationRequest>(&out)) {
      apply_deflation(st, *req);
      rec.k = 1;
      rec.deflated = true;
      log.push_back(rec);
      continue;
    }
    const AssignmentResult& res = std::get<AssignmentResult>(out);
    rec.gain_norm = res.gain_norm;
    rec.poles = res.gamma;
    check_gain(rec, gain_limit, options);
    st = update_finite(std::move(st), res.F2, res.W);
    if (k == 2) standardize_pair(st);
    q = settle(st, q, n - k);
    log.push_back(rec);
  }
  st.denominator_degree = result.log.assigned_count();
  return result;
}

}  // namespace detail

namespace {

class AssignStrategy : public detail::DislocationStrategy {
 public:
  explicit AssignStrategy(const RegionSpec& region)
      : region_(region), pool_(region.poles()) {}

  AssignmentResult infinite(const BlockProblem& block) override {
    const PoleSelection sel =
        select_poles(region_, BlockKind::kInfinite, {}, pool_);
    fallback_ = region_.mode() == RegionMode::kAssign &&
                sel.remaining.size() == pool_.size();
    pool_ = sel.remaining;
    return assign_infinite_1x1(block, sel.targets[0].real(), sel.eta);
  }

  std::variant<AssignmentResult, DeflationRequest> finite(
      const BlockProblem& block, const std::vector<Complex>& eigs,
      BlockKind kind) override {
    const PoleSelection sel = select_poles(region_, kind, eigs, pool_);
    if (block.k() == 1) {
      pool_ = sel.remaining;
      return assign_real_1x1(block, sel.targets[0].real());
    }
    std::variant<AssignmentResult, DeflationRequest> out;
    if (pair_input_rank(block.B2) == 2) {
      out = assign_pair_full(block, sel.targets[0], sel.targets[1]);
    } else {
      out = assign_pair_rank1(block, sel.targets[0], sel.targets[1],
                              1e-10);
    }
    if (std::holds_alternative<AssignmentResult>(out)) pool_ = sel.remaining;
    return out;
  }

  bool adjoin_reals() const override {
    if (region_.mode() != RegionMode::kAssign) return false;
    bool has_pair = false;
    for (const Complex& g : pool_) {
      if (g.imag() == 0.0) return false;
      has_pair = true;
    }
    return has_pair;
  }

  bool infinite_fallback() const override { return fallback_; }

  bool has_pair_for_reassign() const override {
    if (region_.mode() != RegionMode::kAssign) return false;
    for (const Complex& g : pool_)
      if (g.imag() > 0.0) return true;
    return false;
  }

  std::vector<Complex> take_pair_for_reassign() override {
    const Complex a(region_.alpha(), 0.0);
    const PoleSelection sel =
        select_poles(region_, BlockKind::kPair, {a, a}, pool_);
    pool_ = sel.remaining;
    return sel.targets;
  }

  void restore_pair(const std::vector<Complex>& pair) override {
    pool_.insert(pool_.end(), pair.begin(), pair.end());
  }

 private:
  const RegionSpec& region_;
  std::vector<Complex> pool_;
  bool fallback_ = false;
};

}  // namespace

FactorizationResult grcf(const DescriptorSystem& sys, const RegionSpec& region,
                         const Tolerances& tol, const FactorOptions& options) {
  if (region.mode() == RegionMode::kInner) {
    throw Error(ErrorCode::kInvalidRegion,
                "grcf requires a stabilize or assign region");
  }
  if (region.domain() != sys.domain) {
    throw Error(ErrorCode::kInvalidRegion, "region and system domains differ");
  }
  AssignStrategy strategy(region);
  return detail::dislocate(sys, region, tol, options, strategy);
}

}  // namespace descfact
