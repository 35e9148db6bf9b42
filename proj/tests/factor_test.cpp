#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "descfact/grcf.h"
#include "descfact/grcfid.h"
#include "descfact/gsorsf.h"
#include "descfact/linalg.h"
#include "descfact/postproc.h"
#include "descfact/verify.h"
#include "support/oracles.h"
#include "support/systems.h"

namespace descfact {
namespace {

using testing::improper_continuous_example;
using testing::improper_discrete_example;
using testing::multiset_distance;
using testing::random_system;
using testing::RandomSystemSpec;
using testing::Rng;
using testing::scalar_system;

const std::vector<Complex> kProbe = {
    {0.3, 0.7}, {1.7, -0.4}, {-0.6, 1.9}, {2.5, 2.5}, {0.1, -3.0}};

ComplexMatrix expected_N1(Complex s) {
  ComplexMatrix N(2, 2);
  N << -s * s / ((s + 1.0) * (s + 2.0)), s * s / ((s + 1.0) * (s + 3.0)), 0.0,
      1.0 / (s + 3.0);
  return N;
}

ComplexMatrix expected_M1(Complex s) {
  ComplexMatrix M = ComplexMatrix::Zero(2, 2);
  M(0, 0) = -1.0 / ((s + 1.0) * (s + 2.0));
  M(1, 1) = s / (s + 3.0);
  return M;
}

ComplexMatrix expected_N2(Complex z) {
  ComplexMatrix N(2, 2);
  N << 1.0, z / (2.0 * z - 1.0), 0.0, (z - 2.0) / (z * (2.0 * z - 1.0));
  return N;
}

ComplexMatrix expected_M2(Complex z) {
  ComplexMatrix M = ComplexMatrix::Zero(2, 2);
  M(0, 0) = 1.0 / (z * z);
  M(1, 1) = (z - 2.0) / (2.0 * z - 1.0);
  return M;
}

TEST(Grcf, ScalarUnstablePole) {
  const auto sys = scalar_system(Domain::kContinuous, 1.0);
  const auto tol = Tolerances::defaults_for(sys);
  const auto region = RegionSpec::assign(Domain::kContinuous, -1.0, {-1.0});
  const auto res = grcf(sys, region, tol);
  ASSERT_EQ(res.log.steps.size(), 1u);
  EXPECT_NEAR(res.log.steps[0].gain_norm, 2.0, 1e-14);
  EXPECT_NEAR(res.factors.A(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(std::abs(res.factors.CM(0, 0)), 2.0, 1e-14);
  // M(s) = (s - 1) / (s + 1), N(s) = 1 / (s + 1).
  for (Complex s : kProbe) {
    const auto N = eval_tfm(res.factors.numerator(), s);
    const auto M = eval_tfm(res.factors.denominator(), s);
    EXPECT_LE(std::abs(N(0, 0) - 1.0 / (s + 1.0)), 1e-13);
    EXPECT_LE(std::abs(M(0, 0) - (s - 1.0) / (s + 1.0)), 1e-13);
  }
}

TEST(Grcf, StableSystemIsUntouched) {
  const auto sys = scalar_system(Domain::kContinuous, -2.0);
  const auto tol = Tolerances::defaults_for(sys);
  const auto region = RegionSpec::stabilize(Domain::kContinuous, -1.0);
  const auto res = grcf(sys, region, tol);
  EXPECT_EQ(res.log.assigned_count(), 0);
  const auto M = eval_tfm(res.factors.denominator(), {0.5, 0.5});
  EXPECT_LE(std::abs(M(0, 0) - 1.0), 1e-14);
}

TEST(Grcf, ImproperContinuousExampleClosedForm) {
  const auto sys = improper_continuous_example();
  const auto tol = Tolerances::defaults_for(sys);
  const auto region =
      RegionSpec::assign(Domain::kContinuous, -1.0, {-1.0, -2.0, -3.0});
  const auto res = grcf(sys, region, tol);
  EXPECT_EQ(res.log.assigned_count(), 3);
  for (Complex s : kProbe) {
    const auto N = eval_tfm(res.factors.numerator(), s);
    const auto M = eval_tfm(res.factors.denominator(), s);
    EXPECT_LE((N - expected_N1(s)).norm(), 1e-10) << s;
    EXPECT_LE((M - expected_M1(s)).norm(), 1e-10) << s;
  }
  const auto G1 = eval_tfm(sys, 1.0);
  EXPECT_LE((G1 - ComplexMatrix{{1.0, 0.5}, {0.0, 1.0}}).norm(), 1e-13);
  const auto rep = check_rcf(sys, res.factors, region, tol, 20);
  EXPECT_TRUE(rep.passed);
}

TEST(Grcf, ImproperContinuousEliminationAndMinimalDenominator) {
  const auto sys = improper_continuous_example();
  const auto tol = Tolerances::defaults_for(sys);
  const auto region =
      RegionSpec::assign(Domain::kContinuous, -1.0, {-1.0, -2.0, -3.0});
  const auto res = grcf(sys, region, tol);
  EXPECT_EQ(res.factors.order(), 5);
  const auto reduced = eliminate_nondynamic(res.factors);
  EXPECT_EQ(reduced.order(), 4);
  for (Complex s : kProbe) {
    EXPECT_LE((eval_tfm(reduced.numerator(), s) -
               eval_tfm(res.factors.numerator(), s))
                  .norm(),
              1e-10);
    EXPECT_LE((eval_tfm(reduced.denominator(), s) -
               eval_tfm(res.factors.denominator(), s))
                  .norm(),
              1e-10);
  }
  const auto Mmin = minimal_denominator(res.factors, tol);
  EXPECT_EQ(Mmin.order(), 3);
  for (Complex s : kProbe) {
    EXPECT_LE((eval_tfm(Mmin, s) - expected_M1(s)).norm(), 1e-10);
  }
}

TEST(Grcfid, ScalarDiscreteReflection) {
  const auto sys = scalar_system(Domain::kDiscrete, 2.0);
  const auto tol = Tolerances::defaults_for(sys);
  const auto res = grcfid(sys, tol);
  EXPECT_NEAR(res.factors.A(0, 0), 0.5, 1e-14);
  // M(z) = (z - 2) / (2 z - 1) up to sign.
  for (Complex z : kProbe) {
    const auto M = eval_tfm(res.factors.denominator(), z);
    const Complex ref = (z - 2.0) / (2.0 * z - 1.0);
    EXPECT_LE(std::min(std::abs(M(0, 0) - ref), std::abs(M(0, 0) + ref)),
              1e-13);
  }
  EXPECT_LE(check_inner(res.factors.denominator(), 64), 1e-12);
}

TEST(Grcfid, ImproperDiscreteExampleClosedForm) {
  const auto sys = improper_discrete_example();
  const auto tol = Tolerances::defaults_for(sys);
  const auto res = grcfid(sys, tol);
  for (Complex z : kProbe) {
    const auto N = eval_tfm(res.factors.numerator(), z);
    const auto M = eval_tfm(res.factors.denominator(), z);
    EXPECT_LE((N - expected_N2(z)).norm(), 1e-10) << z;
    EXPECT_LE((M - expected_M2(z)).norm(), 1e-10) << z;
  }
  const auto G1 = eval_tfm(sys, 1.0);
  EXPECT_LE((G1 - ComplexMatrix{{1.0, -1.0}, {0.0, 1.0}}).norm(), 1e-13);
  EXPECT_LE(check_inner(res.factors.denominator(), 64), 1e-10);
  const auto unobs = unobservable_eigenvalues(
      eliminate_nondynamic(res.factors).numerator());
  EXPECT_EQ(unobs.size(), 2u);
  for (Complex v : unobs) EXPECT_LE(std::abs(v), 1e-6);
  const auto rep =
      check_rcf(sys, res.factors, RegionSpec::inner(Domain::kDiscrete), tol, 20);
  EXPECT_TRUE(rep.passed);
}

TEST(Grcfid, ContinuousImproperHasNoSolution) {
  DescriptorSystem sys;
  sys.A = Matrix::Identity(2, 2);
  sys.E = Matrix{{0.0, 1.0}, {0.0, 0.0}};
  sys.B = Matrix{{0.0}, {1.0}};
  sys.C = Matrix{{1.0, 0.0}};
  sys.D = Matrix::Zero(1, 1);
  const auto tol = Tolerances::defaults_for(sys);
  try {
    grcfid(sys, tol);
    FAIL() << "expected NoSolution";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSolution);
  }
}

TEST(Grcfid, ImaginaryAxisPoleHasNoSolution) {
  DescriptorSystem sys;
  sys.A = Matrix::Zero(1, 1);
  sys.E = Matrix::Identity(1, 1);
  sys.B = Matrix::Ones(1, 1);
  sys.C = Matrix::Ones(1, 1);
  sys.D = Matrix::Zero(1, 1);
  const auto tol = Tolerances::defaults_for(sys);
  EXPECT_THROW(
      {
        try {
          grcfid(sys, tol);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kNoSolution);
          throw;
        }
      },
      Error);
}

TEST(Glcf, ImproperContinuousExample) {
  const auto sys = improper_continuous_example();
  const auto tol = Tolerances::defaults_for(sys);
  const auto region =
      RegionSpec::assign(Domain::kContinuous, -1.0, {-1.0, -2.0, -3.0});
  const auto res = to_left_factorization(sys, FactorMethod::kPoleAssignment,
                                         region, tol);
  const auto rep =
      check_factors(sys, res.factors.numerator(), res.factors.denominator(),
                    true, region, tol, 20);
  EXPECT_TRUE(rep.passed) << rep.reconstruction_error;
}

TEST(Glcfid, ImproperDiscreteExample) {
  const auto sys = improper_discrete_example();
  const auto tol = Tolerances::defaults_for(sys);
  const auto region = RegionSpec::inner(Domain::kDiscrete);
  const auto res =
      to_left_factorization(sys, FactorMethod::kInnerDenominator, region, tol);
  const auto rep =
      check_factors(sys, res.factors.numerator(), res.factors.denominator(),
                    true, region, tol, 20);
  EXPECT_TRUE(rep.passed) << rep.reconstruction_error;
  EXPECT_LE(check_inner(res.factors.denominator(), 64), 1e-10);
}

struct RandomCase {
  std::uint64_t seed;
  RandomSystemSpec spec;
};

class RandomFactorization : public ::testing::TestWithParam<RandomCase> {};

TEST_P(RandomFactorization, StabilizingRcfVerifies) {
  const auto& c = GetParam();
  Rng rng(c.seed);
  const auto sys = random_system(rng, c.spec);
  const auto tol = Tolerances::defaults_for(sys);
  const double alpha = c.spec.domain == Domain::kContinuous ? -0.5 : 0.8;
  const auto region = RegionSpec::stabilize(c.spec.domain, alpha);
  const auto res = grcf(sys, region, tol);
  const auto rep = check_rcf(sys, res.factors, region, tol, 20);
  EXPECT_TRUE(rep.passed) << "rec " << rep.reconstruction_error << " viol "
                          << rep.region_violations.size() << " coprime "
                          << rep.coprime_ratio;
}

TEST_P(RandomFactorization, InnerRcfVerifiesOrReportsNoSolution) {
  const auto& c = GetParam();
  Rng rng(c.seed);
  const auto sys = random_system(rng, c.spec);
  const auto tol = Tolerances::defaults_for(sys);
  const bool improper = !c.spec.identity_E && c.spec.chain >= 2;
  if (c.spec.domain == Domain::kContinuous && improper) {
    try {
      grcfid(sys, tol);
      FAIL() << "expected NoSolution";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoSolution);
    }
    return;
  }
  const auto res = grcfid(sys, tol);
  const auto region = RegionSpec::inner(c.spec.domain);
  const auto rep = check_rcf(sys, res.factors, region, tol, 20);
  EXPECT_TRUE(rep.passed) << "rec " << rep.reconstruction_error;
  EXPECT_LE(check_inner(res.factors.denominator(), 64), 1e-8);
}

RandomSystemSpec make_spec(Domain d, int nf, int ni, int chain, int nu, int no,
                           int m, int p, bool eye) {
  RandomSystemSpec s;
  s.domain = d;
  s.n_finite = nf;
  s.n_infinite_simple = ni;
  s.chain = chain;
  s.n_uncontrollable = nu;
  s.n_unobservable = no;
  s.inputs = m;
  s.outputs = p;
  s.identity_E = eye;
  return s;
}

INSTANTIATE_TEST_SUITE_P(
    Mixed, RandomFactorization,
    ::testing::Values(
        RandomCase{1, make_spec(Domain::kContinuous, 4, 1, 2, 0, 0, 2, 2, false)},
        RandomCase{2, make_spec(Domain::kContinuous, 5, 0, 0, 0, 0, 1, 1, true)},
        RandomCase{3, make_spec(Domain::kContinuous, 6, 1, 0, 1, 1, 2, 3, false)},
        RandomCase{4, make_spec(Domain::kDiscrete, 4, 1, 2, 0, 0, 2, 2, false)},
        RandomCase{5, make_spec(Domain::kDiscrete, 5, 0, 0, 1, 0, 3, 2, true)},
        RandomCase{6, make_spec(Domain::kDiscrete, 3, 2, 3, 0, 1, 1, 1, false)},
        RandomCase{7, make_spec(Domain::kContinuous, 8, 0, 3, 0, 0, 3, 2, false)},
        RandomCase{8, make_spec(Domain::kContinuous, 6, 0, 0, 0, 0, 2, 2, true)}),
    [](const ::testing::TestParamInfo<RandomCase>& info) {
      return "seed" + std::to_string(info.param.seed);
    });

}  // namespace
}  // namespace descfact
