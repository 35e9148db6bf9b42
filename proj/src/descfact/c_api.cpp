#include "descfact/descfact.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <variant>
#include <vector>

#include "descfact/core.h"
#include "descfact/grcf.h"
#include "descfact/grcfid.h"
#include "descfact/postproc.h"
#include "descfact/verify.h"

struct descfact_system {
  descfact::DescriptorSystem sys;
};

struct descfact_factors {
  std::variant<descfact::StackedFactorRealization,
               descfact::LeftFactorRealization>
      state;
  descfact::DislocationLog log;
  descfact::Tolerances tol;
  bool inner = false;
};

struct descfact_pole_report {
  descfact::PoleReport report;
};

namespace {

using descfact::Complex;
using descfact::DescriptorSystem;
using descfact::Domain;
using descfact::ErrorCode;
using descfact::Matrix;

constexpr double kInnerTol = 1e-7;

thread_local std::string last_error;

descfact_status from_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch:
      return DESCFACT_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kNonFiniteEntry:
      return DESCFACT_ERR_NON_FINITE_ENTRY;
    case ErrorCode::kInvalidRegion:
      return DESCFACT_ERR_INVALID_REGION;
    case ErrorCode::kSingularPencil:
      return DESCFACT_ERR_SINGULAR_PENCIL;
    case ErrorCode::kIterationFailure:
      return DESCFACT_ERR_ITERATION_FAILURE;
    case ErrorCode::kSwapIllConditioned:
      return DESCFACT_ERR_SWAP_ILL_CONDITIONED;
    case ErrorCode::kBoundaryEigenvalue:
      return DESCFACT_ERR_BOUNDARY_EIGENVALUE;
    case ErrorCode::kSingularBlock:
      return DESCFACT_ERR_SINGULAR_BLOCK;
    case ErrorCode::kSingularAtPoint:
      return DESCFACT_ERR_SINGULAR_AT_POINT;
    case ErrorCode::kGainLimitExceeded:
      return DESCFACT_ERR_GAIN_LIMIT_EXCEEDED;
    case ErrorCode::kNoSolution:
      return DESCFACT_ERR_NO_SOLUTION;
  }
  return DESCFACT_ERR_INTERNAL;
}

descfact_status fail(descfact_status status, const std::string& msg) {
  last_error = msg;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
descfact_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DESCFACT_OK;
  } catch (const descfact::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DESCFACT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DESCFACT_ERR_INTERNAL, e.what());
  }
}

Matrix read_matrix(const double* data, size_t rows, size_t cols) {
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          data[i * cols + j];
    }
  }
  return out;
}

descfact_system* wrap(DescriptorSystem sys) {
  return new descfact_system{std::move(sys)};
}

descfact::Tolerances tolerances(const DescriptorSystem& sys,
                                const descfact_options* opts) {
  descfact::Tolerances tol = descfact::Tolerances::defaults_for(sys);
  tol.gain_kappa = opts->gain_kappa;
  tol.seed = opts->seed;
  tol.validate();
  return tol;
}

descfact::RegionSpec region_of(Domain domain, const descfact_options* opts) {
  if (opts->n_poles == 0) return descfact::RegionSpec::stabilize(domain, opts->alpha);
  if (!opts->poles_re || !opts->poles_im) {
    throw descfact::Error(ErrorCode::kInvalidRegion, "pole arrays are NULL");
  }
  std::vector<Complex> poles;
  for (size_t i = 0; i < opts->n_poles; ++i) {
    poles.emplace_back(opts->poles_re[i], opts->poles_im[i]);
  }
  return descfact::RegionSpec::assign(domain, opts->alpha, std::move(poles));
}

bool bad_args(const void* a, const void* b) {
  if (a && b) return false;
  last_error = "NULL argument";
  return true;
}

enum class Method { kGrcf, kGrcfid, kGlcf, kGlcfid };

descfact_status factorize(const descfact_system* sys,
                          const descfact_options* opts, descfact_factors** out,
                          Method method) {
  if (bad_args(sys, opts) || !out) {
    last_error = "NULL argument";
    return DESCFACT_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    const DescriptorSystem& g = sys->sys;
    auto f = std::make_unique<descfact_factors>();
    f->tol = tolerances(g, opts);
    descfact::FactorOptions fo;
    fo.strict_gain = opts->strict_gain != 0;
    const bool eliminate = opts->keep_nondynamic == 0;
    switch (method) {
      case Method::kGrcf:
      case Method::kGrcfid: {
        f->inner = method == Method::kGrcfid;
        descfact::FactorizationResult res =
            f->inner ? descfact::grcfid(g, f->tol, fo)
                     : descfact::grcf(g, region_of(g.domain, opts), f->tol, fo);
        f->state = eliminate ? descfact::eliminate_nondynamic(res.factors)
                             : res.factors;
        f->log = std::move(res.log);
        break;
      }
      case Method::kGlcf:
      case Method::kGlcfid: {
        f->inner = method == Method::kGlcfid;
        const auto m = f->inner ? descfact::FactorMethod::kInnerDenominator
                                : descfact::FactorMethod::kPoleAssignment;
        const auto region = f->inner ? descfact::RegionSpec::inner(g.domain)
                                     : region_of(g.domain, opts);
        descfact::LeftFactorizationResult res = descfact::to_left_factorization(
            g, m, region, f->tol, fo, eliminate);
        f->state = std::move(res.factors);
        f->log = std::move(res.log);
        break;
      }
    }
    *out = f.release();
  });
}

template <typename F>
descfact_status factor_system(const descfact_factors* f, descfact_system** out,
                              F&& pick) {
  if (bad_args(f, out)) return DESCFACT_ERR_INVALID_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    *out = wrap(std::visit([&](const auto& s) { return pick(s); }, f->state));
  });
}

descfact_status pole_report_for(const descfact_system* sys,
                                const descfact_options* opts, bool inner,
                                descfact_pole_report** out) {
  if (bad_args(sys, opts) || !out) {
    last_error = "NULL argument";
    return DESCFACT_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    const DescriptorSystem& g = sys->sys;
    const auto region = inner ? descfact::RegionSpec::inner(g.domain)
                              : region_of(g.domain, opts);
    auto r = std::make_unique<descfact_pole_report>();
    r->report = descfact::pole_report(g, region, tolerances(g, opts));
    *out = r.release();
  });
}

}  // namespace

extern "C" {

void descfact_options_init(descfact_options* opts, descfact_domain domain) {
  if (!opts) return;
  opts->alpha = domain == DESCFACT_DISCRETE ? 0.95 : -0.05;
  opts->poles_re = nullptr;
  opts->poles_im = nullptr;
  opts->n_poles = 0;
  opts->gain_kappa = 100.0;
  opts->strict_gain = 0;
  opts->keep_nondynamic = 0;
  opts->seed = 0;
}

const char* descfact_last_error(void) { return last_error.c_str(); }

const char* descfact_status_string(descfact_status status) {
  switch (status) {
    case DESCFACT_OK:
      return "ok";
    case DESCFACT_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case DESCFACT_ERR_DIMENSION_MISMATCH:
      return descfact::to_string(ErrorCode::kDimensionMismatch);
    case DESCFACT_ERR_NON_FINITE_ENTRY:
      return descfact::to_string(ErrorCode::kNonFiniteEntry);
    case DESCFACT_ERR_INVALID_REGION:
      return descfact::to_string(ErrorCode::kInvalidRegion);
    case DESCFACT_ERR_SINGULAR_PENCIL:
      return descfact::to_string(ErrorCode::kSingularPencil);
    case DESCFACT_ERR_ITERATION_FAILURE:
      return descfact::to_string(ErrorCode::kIterationFailure);
    case DESCFACT_ERR_SWAP_ILL_CONDITIONED:
      return descfact::to_string(ErrorCode::kSwapIllConditioned);
    case DESCFACT_ERR_BOUNDARY_EIGENVALUE:
      return descfact::to_string(ErrorCode::kBoundaryEigenvalue);
    case DESCFACT_ERR_SINGULAR_BLOCK:
      return descfact::to_string(ErrorCode::kSingularBlock);
    case DESCFACT_ERR_SINGULAR_AT_POINT:
      return descfact::to_string(ErrorCode::kSingularAtPoint);
    case DESCFACT_ERR_GAIN_LIMIT_EXCEEDED:
      return descfact::to_string(ErrorCode::kGainLimitExceeded);
    case DESCFACT_ERR_NO_SOLUTION:
      return descfact::to_string(ErrorCode::kNoSolution);
    case DESCFACT_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

descfact_status descfact_system_create(descfact_domain domain, size_t n,
                                       size_t m, size_t p, const double* A,
                                       const double* E, const double* B,
                                       const double* C, const double* D,
                                       descfact_system** out) {
  if (!out || (n > 0 && !A) || (n * m > 0 && !B) || (p * n > 0 && !C)) {
    return fail(DESCFACT_ERR_INVALID_ARGUMENT, "NULL matrix argument");
  }
  *out = nullptr;
  if (domain != DESCFACT_CONTINUOUS && domain != DESCFACT_DISCRETE) {
    return fail(DESCFACT_ERR_INVALID_ARGUMENT, "unknown domain");
  }
  return guarded([&] {
    DescriptorSystem s;
    s.domain = domain == DESCFACT_DISCRETE ? Domain::kDiscrete
                                           : Domain::kContinuous;
    s.A = read_matrix(A, n, n);
    s.e_identity = E == nullptr;
    s.E = E ? read_matrix(E, n, n) : Matrix::Identity(n, n);
    s.B = read_matrix(B, n, m);
    s.C = read_matrix(C, p, n);
    s.D = D ? read_matrix(D, p, m) : Matrix::Zero(p, m);
    *out = wrap(descfact::validate_system(s));
  });
}

void descfact_system_destroy(descfact_system* sys) { delete sys; }

descfact_status descfact_system_dims(const descfact_system* sys, size_t* n,
                                     size_t* m, size_t* p) {
  if (!sys) return fail(DESCFACT_ERR_INVALID_ARGUMENT, "NULL system");
  if (n) *n = static_cast<size_t>(sys->sys.order());
  if (m) *m = static_cast<size_t>(sys->sys.inputs());
  if (p) *p = static_cast<size_t>(sys->sys.outputs());
  return DESCFACT_OK;
}

descfact_domain descfact_system_domain(const descfact_system* sys) {
  return sys && sys->sys.domain == Domain::kDiscrete ? DESCFACT_DISCRETE
                                                     : DESCFACT_CONTINUOUS;
}

int descfact_system_identity_e(const descfact_system* sys) {
  return sys && sys->sys.e_identity ? 1 : 0;
}

descfact_status descfact_system_matrix(const descfact_system* sys,
                                       descfact_matrix_id which, double* buf,
                                       size_t len) {
  if (bad_args(sys, buf)) return DESCFACT_ERR_INVALID_ARGUMENT;
  const DescriptorSystem& s = sys->sys;
  Matrix m;
  switch (which) {
    case DESCFACT_MAT_A: m = s.A; break;
    case DESCFACT_MAT_E: m = s.dense_E(); break;
    case DESCFACT_MAT_B: m = s.B; break;
    case DESCFACT_MAT_C: m = s.C; break;
    case DESCFACT_MAT_D: m = s.D; break;
    default:
      return fail(DESCFACT_ERR_INVALID_ARGUMENT, "unknown matrix id");
  }
  if (len < static_cast<size_t>(m.size())) {
    return fail(DESCFACT_ERR_INVALID_ARGUMENT, "buffer too small");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) buf[i * m.cols() + j] = m(i, j);
  }
  return DESCFACT_OK;
}

descfact_status descfact_grcf(const descfact_system* sys,
                              const descfact_options* opts,
                              descfact_factors** out) {
  return factorize(sys, opts, out, Method::kGrcf);
}

descfact_status descfact_grcfid(const descfact_system* sys,
                                const descfact_options* opts,
                                descfact_factors** out) {
  return factorize(sys, opts, out, Method::kGrcfid);
}

descfact_status descfact_glcf(const descfact_system* sys,
                              const descfact_options* opts,
                              descfact_factors** out) {
  return factorize(sys, opts, out, Method::kGlcf);
}

descfact_status descfact_glcfid(const descfact_system* sys,
                                const descfact_options* opts,
                                descfact_factors** out) {
  return factorize(sys, opts, out, Method::kGlcfid);
}

void descfact_factors_destroy(descfact_factors* f) { delete f; }

int descfact_factors_is_left(const descfact_factors* f) {
  return f && f->state.index() == 1 ? 1 : 0;
}

int descfact_factors_is_inner(const descfact_factors* f) {
  return f && f->inner ? 1 : 0;
}

int descfact_factors_denominator_degree(const descfact_factors* f) {
  if (!f) return -1;
  return std::visit([](const auto& s) { return s.denominator_degree; },
                    f->state);
}

descfact_status descfact_factors_numerator(const descfact_factors* f,
                                           descfact_system** out) {
  return factor_system(f, out, [](const auto& s) { return s.numerator(); });
}

descfact_status descfact_factors_denominator(const descfact_factors* f,
                                             descfact_system** out) {
  return factor_system(f, out, [](const auto& s) { return s.denominator(); });
}

descfact_status descfact_factors_minimal_denominator(const descfact_factors* f,
                                                     descfact_system** out) {
  return factor_system(f, out, [&](const auto& s) {
    return descfact::minimal_denominator(s, f->tol);
  });
}

size_t descfact_factors_step_count(const descfact_factors* f) {
  return f ? f->log.steps.size() : 0;
}

descfact_status descfact_factors_step(const descfact_factors* f, size_t index,
                                      descfact_step* out) {
  if (bad_args(f, out)) return DESCFACT_ERR_INVALID_ARGUMENT;
  if (index >= f->log.steps.size()) {
    return fail(DESCFACT_ERR_INVALID_ARGUMENT, "step index out of range");
  }
  const descfact::StepRecord& r = f->log.steps[index];
  *out = descfact_step{};
  out->k = r.k;
  out->infinite = r.kind == descfact::StepKind::kInfinite;
  out->deflated = r.deflated;
  out->gain_warning = r.gain_warning;
  out->reassigned = r.reassigned;
  out->gain_norm = r.gain_norm;
  out->n_poles = static_cast<int>(std::min<size_t>(r.poles.size(), 2));
  for (int i = 0; i < out->n_poles; ++i) {
    out->poles_re[i] = r.poles[i].real();
    out->poles_im[i] = r.poles[i].imag();
  }
  return DESCFACT_OK;
}

descfact_status descfact_poles(const descfact_system* sys,
                               const descfact_options* opts,
                               descfact_pole_report** out) {
  return pole_report_for(sys, opts, false, out);
}

descfact_status descfact_poles_inner(const descfact_system* sys,
                                     const descfact_options* opts,
                                     descfact_pole_report** out) {
  return pole_report_for(sys, opts, true, out);
}

void descfact_pole_report_destroy(descfact_pole_report* r) { delete r; }

size_t descfact_pole_report_finite_count(const descfact_pole_report* r) {
  return r ? r->report.finite.size() : 0;
}

descfact_status descfact_pole_report_finite(const descfact_pole_report* r,
                                            size_t index, descfact_pole* out) {
  if (bad_args(r, out)) return DESCFACT_ERR_INVALID_ARGUMENT;
  if (index >= r->report.finite.size()) {
    return fail(DESCFACT_ERR_INVALID_ARGUMENT, "pole index out of range");
  }
  const descfact::PoleInfo& p = r->report.finite[index];
  out->re = p.value.real();
  out->im = p.value.imag();
  out->controllable = p.controllable;
  out->observable = p.observable;
  out->bad = p.bad;
  return DESCFACT_OK;
}

int descfact_pole_report_infinite(const descfact_pole_report* r) {
  return r ? r->report.infinite_multiplicity : -1;
}

int descfact_pole_report_infinite_controllable(const descfact_pole_report* r) {
  return r ? r->report.infinite_controllable : -1;
}

int descfact_pole_report_nondynamic(const descfact_pole_report* r) {
  return r ? r->report.nondynamic : -1;
}

int descfact_pole_report_bad_count(const descfact_pole_report* r) {
  return r ? r->report.n_b : -1;
}

descfact_status descfact_verify(const descfact_system* G,
                                const descfact_system* N,
                                const descfact_system* M, int left, int inner,
                                const descfact_options* opts, int samples,
                                descfact_report* out) {
  if (bad_args(G, N) || bad_args(M, opts) || !out) {
    last_error = "NULL argument";
    return DESCFACT_ERR_INVALID_ARGUMENT;
  }
  if (samples <= 0) return fail(DESCFACT_ERR_INVALID_ARGUMENT, "samples <= 0");
  return guarded([&] {
    const DescriptorSystem& g = G->sys;
    const auto region = inner ? descfact::RegionSpec::inner(g.domain)
                              : region_of(g.domain, opts);
    const descfact::RcfReport rep = descfact::check_factors(
        g, N->sys, M->sys, left != 0, region, tolerances(g, opts), samples);
    *out = descfact_report{};
    out->reconstruction_error = rep.reconstruction_error;
    out->coprime_ratio = rep.coprime_ratio;
    out->innerness_error = rep.innerness_error;
    out->denominator_order = M->sys.order();
    out->region_violations = static_cast<int>(rep.region_violations.size());
    out->passed = rep.passed;
    if (inner) {
      out->innerness_error = descfact::check_inner(M->sys, std::max(samples, 32));
      out->passed = out->passed && out->innerness_error <= kInnerTol;
    }
  });
}

descfact_status descfact_eval(const descfact_system* sys, double lambda_re,
                              double lambda_im, double* out_re,
                              double* out_im) {
  if (bad_args(sys, out_re) || !out_im) {
    last_error = "NULL argument";
    return DESCFACT_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const descfact::ComplexMatrix v =
        descfact::eval_tfm(sys->sys, Complex(lambda_re, lambda_im));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        out_re[i * v.cols() + j] = v(i, j).real();
        out_im[i * v.cols() + j] = v(i, j).imag();
      }
    }
  });
}

}  // extern "C"
