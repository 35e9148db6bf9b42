#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "descfact/descfact.h"
#include "json.hpp"

namespace descfact_cli {

using Json = nlohmann::ordered_json;

struct SystemDeleter {
  void operator()(descfact_system* s) const { descfact_system_destroy(s); }
};
struct FactorsDeleter {
  void operator()(descfact_factors* f) const { descfact_factors_destroy(f); }
};
struct PoleReportDeleter {
  void operator()(descfact_pole_report* r) const {
    descfact_pole_report_destroy(r);
  }
};

using SystemPtr = std::unique_ptr<descfact_system, SystemDeleter>;
using FactorsPtr = std::unique_ptr<descfact_factors, FactorsDeleter>;
using PoleReportPtr = std::unique_ptr<descfact_pole_report, PoleReportDeleter>;

/// Malformed input file (exit code 1).
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failing library call; carries the status and the library message.
class ApiError : public std::runtime_error {
 public:
  explicit ApiError(descfact_status status);
  descfact_status status() const { return status_; }

 private:
  descfact_status status_;
};

void check(descfact_status status);

Json read_json(const std::string& path);
/// Indented JSON with arrays of scalars kept on one line.
std::string to_text(const Json& doc);
/// Writes `doc` with a trailing newline; "-" or "" means standard output.
void write_json(const Json& doc, const std::string& path, std::ostream& out);

/// SystemFile: {"domain", "A", "E", "B", "C", "D"} with E and D optional or
/// null, matrices as arrays of rows.
SystemPtr system_from_json(const Json& doc);
Json system_to_json(const descfact_system* sys);

std::string format_complex(std::complex<double> z);
/// Parses "a", "a+bi", "a-bi", "bi".
std::complex<double> parse_complex(const std::string& text);
/// Comma-separated list of complex numbers.
std::vector<std::complex<double>> parse_complex_list(const std::string& text);

}  // namespace descfact_cli
