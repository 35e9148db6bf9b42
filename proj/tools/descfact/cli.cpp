#include "cli.h"

#include <cstdio>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "system_file.h"

namespace descfact_cli {

namespace {

enum class Method { kGrcf, kGrcfid, kGlcf, kGlcfid };

const char* method_name(Method m) {
  switch (m) {
    case Method::kGrcf: return "grcf";
    case Method::kGrcfid: return "grcfid";
    case Method::kGlcf: return "glcf";
    case Method::kGlcfid: return "glcfid";
  }
  return "";
}

bool is_inner(Method m) { return m == Method::kGrcfid || m == Method::kGlcfid; }

struct FactorArgs {
  std::string system;
  std::string output;
  std::optional<double> alpha;
  std::string poles;
  bool strict_gain = false;
  std::optional<double> gain_kappa;
  bool keep_nondynamic = false;
  bool mindeg_den = false;
};

struct PolesArgs {
  std::string system;
  std::optional<double> alpha;
  std::string poles;
  bool inner = false;
  bool json = false;
};

struct VerifyArgs {
  std::string system;
  std::string factors;
  int samples = 16;
  bool json = false;
};

// Options with the pole list kept alive alongside the raw pointers.
struct Options {
  descfact_options raw{};
  std::vector<double> re;
  std::vector<double> im;
};

Options make_options(descfact_domain domain, std::optional<double> alpha,
                     const std::string& poles, std::uint64_t seed) {
  Options o;
  descfact_options_init(&o.raw, domain);
  if (alpha) o.raw.alpha = *alpha;
  for (const auto& z : parse_complex_list(poles)) {
    o.re.push_back(z.real());
    o.im.push_back(z.imag());
  }
  o.raw.poles_re = o.re.data();
  o.raw.poles_im = o.im.data();
  o.raw.n_poles = o.re.size();
  o.raw.seed = seed;
  return o;
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

std::string human_complex(double re, double im) {
  if (im == 0.0) return fmt("%.6g", re);
  return fmt("%.6g", re) + (im < 0 ? "-" : "+") + fmt("%.6g", std::abs(im)) + "i";
}

Json region_json(Method m, const Options& o) {
  Json r;
  if (is_inner(m)) {
    r["mode"] = "inner";
    return r;
  }
  r["mode"] = o.raw.n_poles > 0 ? "assign" : "stabilize";
  r["alpha"] = o.raw.alpha;
  Json poles = Json::array();
  for (size_t i = 0; i < o.re.size(); ++i) {
    poles.push_back(format_complex({o.re[i], o.im[i]}));
  }
  r["poles"] = poles;
  return r;
}

Json log_json(const descfact_factors* f, int* warnings) {
  Json steps = Json::array();
  const size_t count = descfact_factors_step_count(f);
  for (size_t i = 0; i < count; ++i) {
    descfact_step s;
    check(descfact_factors_step(f, i, &s));
    Json j;
    j["k"] = s.k;
    j["kind"] = s.infinite ? "infinite" : "finite";
    Json poles = Json::array();
    for (int t = 0; t < s.n_poles; ++t) {
      poles.push_back(format_complex({s.poles_re[t], s.poles_im[t]}));
    }
    j["poles"] = poles;
    j["gain_norm"] = s.gain_norm;
    j["deflated"] = s.deflated != 0;
    j["gain_warning"] = s.gain_warning != 0;
    j["reassigned"] = s.reassigned != 0;
    *warnings += s.gain_warning != 0;
    steps.push_back(std::move(j));
  }
  return steps;
}

SystemPtr take(descfact_status (*get)(const descfact_factors*, descfact_system**),
               const descfact_factors* f) {
  descfact_system* raw = nullptr;
  check(get(f, &raw));
  return SystemPtr(raw);
}

int run_factor(Method method, const FactorArgs& a, std::uint64_t seed,
               std::ostream& out, std::ostream& err) {
  const SystemPtr sys = system_from_json(read_json(a.system));
  Options o = make_options(descfact_system_domain(sys.get()), a.alpha, a.poles,
                           seed);
  if (a.gain_kappa) o.raw.gain_kappa = *a.gain_kappa;
  o.raw.strict_gain = a.strict_gain;
  o.raw.keep_nondynamic = a.keep_nondynamic;

  descfact_factors* raw = nullptr;
  switch (method) {
    case Method::kGrcf: check(descfact_grcf(sys.get(), &o.raw, &raw)); break;
    case Method::kGrcfid: check(descfact_grcfid(sys.get(), &o.raw, &raw)); break;
    case Method::kGlcf: check(descfact_glcf(sys.get(), &o.raw, &raw)); break;
    case Method::kGlcfid: check(descfact_glcfid(sys.get(), &o.raw, &raw)); break;
  }
  const FactorsPtr f(raw);
  const SystemPtr N = take(descfact_factors_numerator, f.get());
  const SystemPtr M = take(descfact_factors_denominator, f.get());
  const SystemPtr Mmin = take(descfact_factors_minimal_denominator, f.get());

  int warnings = 0;
  Json doc;
  doc["method"] = method_name(method);
  doc["kind"] = descfact_factors_is_left(f.get()) ? "left" : "right";
  doc["region"] = region_json(method, o);
  doc["seed"] = seed;
  doc["denominator_degree"] = descfact_factors_denominator_degree(f.get());
  doc["N"] = system_to_json(N.get());
  doc["M"] = system_to_json(a.mindeg_den ? Mmin.get() : M.get());
  doc["M_minimal"] = system_to_json(Mmin.get());
  doc["log"] = log_json(f.get(), &warnings);

  if (warnings > 0) {
    err << "descfact: warning: " << warnings
        << " step(s) exceeded the gain limit\n";
  }
  write_json(doc, a.output, out);
  if (!a.output.empty() && a.output != "-") {
    size_t n = 0;
    check(descfact_system_dims(Mmin.get(), &n, nullptr, nullptr));
    out << method_name(method) << ": " << doc["kind"].get<std::string>()
        << " factorization, denominator degree " << n << ", "
        << doc["log"].size() << " steps, written to " << a.output << "\n";
  }
  return kExitOk;
}

int run_poles(const PolesArgs& a, std::uint64_t seed, std::ostream& out) {
  const SystemPtr sys = system_from_json(read_json(a.system));
  const Options o = make_options(descfact_system_domain(sys.get()), a.alpha,
                                 a.poles, seed);
  descfact_pole_report* raw = nullptr;
  check(a.inner ? descfact_poles_inner(sys.get(), &o.raw, &raw)
                : descfact_poles(sys.get(), &o.raw, &raw));
  const PoleReportPtr r(raw);
  const size_t count = descfact_pole_report_finite_count(r.get());
  std::vector<descfact_pole> poles(count);
  for (size_t i = 0; i < count; ++i) {
    check(descfact_pole_report_finite(r.get(), i, &poles[i]));
  }
  const int infinite = descfact_pole_report_infinite(r.get());
  const int inf_ctrl = descfact_pole_report_infinite_controllable(r.get());
  const int nondyn = descfact_pole_report_nondynamic(r.get());
  const int n_b = descfact_pole_report_bad_count(r.get());

  if (a.json) {
    Json doc;
    Json finite = Json::array();
    for (const auto& p : poles) {
      finite.push_back({{"value", format_complex({p.re, p.im})},
                        {"bad", p.bad != 0},
                        {"controllable", p.controllable != 0},
                        {"observable", p.observable != 0}});
    }
    doc["finite"] = finite;
    doc["infinite"] = infinite;
    doc["infinite_controllable"] = inf_ctrl;
    doc["nondynamic"] = nondyn;
    doc["bad_controllable"] = n_b;
    write_json(doc, "", out);
    return kExitOk;
  }
  std::string set = "{";
  for (size_t i = 0; i < poles.size(); ++i) {
    if (i) set += ", ";
    set += human_complex(poles[i].re, poles[i].im);
  }
  if (infinite > 0) {
    if (!poles.empty()) set += ", ";
    set += "inf x" + std::to_string(infinite);
  }
  out << "poles: " << set << "}\n";
  for (const auto& p : poles) {
    out << "  " << human_complex(p.re, p.im) << "  "
        << (p.bad ? "bad" : "good") << ", "
        << (p.controllable ? "controllable" : "uncontrollable") << ", "
        << (p.observable ? "observable" : "unobservable") << "\n";
  }
  if (infinite > 0) {
    out << "  inf x" << infinite << "  bad, " << inf_ctrl << " controllable\n";
  }
  out << "non-dynamic modes: " << nondyn << "\n";
  out << "controllable bad poles: " << n_b << "\n";
  return kExitOk;
}

int run_verify(const VerifyArgs& a, std::uint64_t seed, std::ostream& out) {
  const SystemPtr G = system_from_json(read_json(a.system));
  const Json doc = read_json(a.factors);
  for (const char* key : {"kind", "region", "N", "M"}) {
    if (!doc.contains(key)) {
      throw FileError(std::string("factor file: missing ") + key);
    }
  }
  const SystemPtr N = system_from_json(doc["N"]);
  const SystemPtr M = system_from_json(doc["M"]);
  const Json& region = doc["region"];
  const bool inner = region.value("mode", "") == "inner";
  std::string poles;
  if (region.contains("poles")) {
    for (const auto& p : region["poles"]) {
      if (!poles.empty()) poles += ",";
      poles += p.get<std::string>();
    }
  }
  std::optional<double> alpha;
  if (region.contains("alpha")) alpha = region["alpha"].get<double>();
  const Options o =
      make_options(descfact_system_domain(G.get()), alpha, poles, seed);
  descfact_report rep;
  check(descfact_verify(G.get(), N.get(), M.get(), doc["kind"] == "left", inner,
                        &o.raw, a.samples, &rep));
  if (a.json) {
    Json j;
    j["reconstruction_error"] = rep.reconstruction_error;
    j["coprime_ratio"] = rep.coprime_ratio;
    j["innerness_error"] = rep.innerness_error;
    j["denominator_order"] = rep.denominator_order;
    j["region_violations"] = rep.region_violations;
    j["passed"] = rep.passed != 0;
    write_json(j, "", out);
  } else {
    out << "reconstruction error: " << fmt("%.3e", rep.reconstruction_error)
        << "\n";
    out << "coprime ratio: " << fmt("%.3e", rep.coprime_ratio) << "\n";
    if (inner) {
      out << "innerness error: " << fmt("%.3e", rep.innerness_error) << "\n";
    }
    out << "denominator order: " << rep.denominator_order << "\n";
    out << "region violations: " << rep.region_violations << "\n";
    out << "result: " << (rep.passed ? "PASS" : "FAIL") << "\n";
  }
  return rep.passed ? kExitOk : kExitVerification;
}

int exit_code_for(descfact_status s) {
  switch (s) {
    case DESCFACT_ERR_INVALID_ARGUMENT:
    case DESCFACT_ERR_DIMENSION_MISMATCH:
    case DESCFACT_ERR_NON_FINITE_ENTRY:
    case DESCFACT_ERR_INVALID_REGION:
      return kExitUsage;
    case DESCFACT_ERR_NO_SOLUTION:
      return kExitNoSolution;
    default:
      return kExitNumerical;
  }
}

void add_factor_options(CLI::App* cmd, FactorArgs& a, bool assignment) {
  cmd->add_option("system", a.system, "System file (JSON)")->required();
  cmd->add_option("-o,--output", a.output, "Factor file (default: stdout)");
  if (assignment) {
    cmd->add_option("--alpha", a.alpha, "Stability degree");
    cmd->add_option("--poles", a.poles, "Desired poles, e.g. -1,-2,-1+2i,-1-2i");
  }
  cmd->add_flag("--strict-gain", a.strict_gain,
                "Fail when a gain exceeds the limit");
  cmd->add_option("--gain-kappa", a.gain_kappa, "Gain limit factor");
  cmd->add_flag("--keep-nondynamic", a.keep_nondynamic,
                "Keep simple infinite eigenvalues");
  cmd->add_flag("--mindeg-den", a.mindeg_den,
                "Write the minimal denominator realization as M");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Coprime factorizations of descriptor systems", "descfact"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for probe points")
      ->envname("DESCFACT_SEED")
      ->capture_default_str();

  FactorArgs fa;
  const std::vector<std::pair<Method, const char*>> methods = {
      {Method::kGrcf, "Right factorization with assigned poles"},
      {Method::kGrcfid, "Right factorization with inner denominator"},
      {Method::kGlcf, "Left factorization with assigned poles"},
      {Method::kGlcfid, "Left factorization with inner denominator"},
  };
  std::vector<std::pair<Method, CLI::App*>> factor_cmds;
  for (const auto& [m, help] : methods) {
    CLI::App* cmd = app.add_subcommand(method_name(m), help);
    add_factor_options(cmd, fa, !is_inner(m));
    factor_cmds.emplace_back(m, cmd);
  }

  PolesArgs pa;
  CLI::App* poles = app.add_subcommand("poles", "Pole report");
  poles->add_option("system", pa.system, "System file (JSON)")->required();
  poles->add_option("--alpha", pa.alpha, "Stability degree");
  poles->add_option("--poles", pa.poles, "Desired poles");
  poles->add_flag("--inner", pa.inner, "Classify against the stability domain");
  poles->add_flag("--json", pa.json, "Machine-readable output");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Check a factorization");
  verify->add_option("system", va.system, "System file (JSON)")->required();
  verify->add_option("factors", va.factors, "Factor file (JSON)")->required();
  verify->add_option("--samples", va.samples, "Probe points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_flag("--json", va.json, "Machine-readable output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& [m, cmd] : factor_cmds) {
      if (*cmd) return run_factor(m, fa, seed, out, err);
    }
    if (*poles) return run_poles(pa, seed, out);
    if (*verify) return run_verify(va, seed, out);
  } catch (const ApiError& e) {
    const int code = exit_code_for(e.status());
    if (code == kExitNoSolution) {
      const std::string msg = e.what();
      err << "descfact: "
          << (msg.find("no solution exists") == std::string::npos
                  ? "no solution exists: " + msg
                  : msg)
          << "\n";
    } else {
      err << "descfact: error: " << e.what() << "\n";
    }
    return code;
  } catch (const FileError& e) {
    err << "descfact: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "descfact: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << "descfact: error: malformed file: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace descfact_cli
