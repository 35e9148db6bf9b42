#include "system_file.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace descfact_cli {

namespace {

struct MatrixData {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;  // row-major
};

MatrixData matrix_from_json(const Json& doc, const std::string& name) {
  if (!doc.is_array()) throw FileError("matrix " + name + " is not an array");
  MatrixData m;
  m.rows = doc.size();
  for (size_t i = 0; i < doc.size(); ++i) {
    const Json& row = doc[i];
    if (!row.is_array()) {
      throw FileError("matrix " + name + ": row " + std::to_string(i) +
                      " is not an array");
    }
    if (i == 0) m.cols = row.size();
    if (row.size() != m.cols) {
      throw FileError("matrix " + name + ": rows have different lengths");
    }
    for (const Json& v : row) {
      if (!v.is_number()) {
        throw FileError("matrix " + name + ": non-numeric entry");
      }
      m.values.push_back(v.get<double>());
    }
  }
  return m;
}

Json matrix_to_json(const std::vector<double>& values, size_t rows,
                    size_t cols) {
  Json out = Json::array();
  for (size_t i = 0; i < rows; ++i) {
    Json row = Json::array();
    for (size_t j = 0; j < cols; ++j) row.push_back(values[i * cols + j]);
    out.push_back(std::move(row));
  }
  return out;
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_flat(const Json& j) {
  for (const Json& v : j) {
    if (v.is_structured()) return false;
  }
  return true;
}

void emit(const Json& j, int depth, std::string& out) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + Json(it.key()).dump() + ": ";
      emit(it.value(), depth + 1, out);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    if (is_flat(j)) {
      out += j.dump(-1, ' ', false, Json::error_handler_t::strict);
      return;
    }
    out += "[\n";
    for (size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      emit(j[i], depth + 1, out);
    }
    out += "\n" + close + "]";
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string to_text(const Json& doc) {
  std::string out;
  emit(doc, 0, out);
  return out;
}

ApiError::ApiError(descfact_status status)
    : std::runtime_error(*descfact_last_error() ? descfact_last_error()
                                                : descfact_status_string(status)),
      status_(status) {}

void check(descfact_status status) {
  if (status != DESCFACT_OK) throw ApiError(status);
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FileError(path + ": " + e.what());
  }
}

void write_json(const Json& doc, const std::string& path, std::ostream& out) {
  const std::string text = to_text(doc) + "\n";
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FileError("cannot write " + path);
  file << text;
  if (!file) throw FileError("write failed: " + path);
}

SystemPtr system_from_json(const Json& doc) {
  if (!doc.is_object()) throw FileError("system file is not a JSON object");
  descfact_domain domain = DESCFACT_CONTINUOUS;
  if (doc.contains("domain")) {
    const Json& d = doc["domain"];
    if (d == "continuous") {
      domain = DESCFACT_CONTINUOUS;
    } else if (d == "discrete") {
      domain = DESCFACT_DISCRETE;
    } else {
      throw FileError("domain must be \"continuous\" or \"discrete\"");
    }
  }
  for (const char* key : {"A", "B", "C"}) {
    if (!doc.contains(key)) throw FileError(std::string("missing matrix ") + key);
  }
  const MatrixData A = matrix_from_json(doc["A"], "A");
  const MatrixData B = matrix_from_json(doc["B"], "B");
  const MatrixData C = matrix_from_json(doc["C"], "C");
  const bool has_e = doc.contains("E") && !doc["E"].is_null();
  const bool has_d = doc.contains("D") && !doc["D"].is_null();
  MatrixData E, D;
  if (has_e) E = matrix_from_json(doc["E"], "E");
  if (has_d) D = matrix_from_json(doc["D"], "D");

  const size_t n = A.rows;
  // Column counts of empty matrices are taken from the other matrices.
  const size_t m = B.rows > 0 ? B.cols : (has_d ? D.cols : 0);
  const size_t p = C.rows;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw FileError("dimension mismatch: " + what);
  };
  require(n == 0 || A.cols == n, "A must be square");
  require(B.rows == n, "B must have n rows");
  require(n == 0 || p == 0 || C.cols == n, "C must have n columns");
  if (has_e) require(E.rows == n && (n == 0 || E.cols == n), "E must be n x n");
  if (has_d) require(D.rows == p && (p == 0 || D.cols == m), "D must be p x m");

  descfact_system* raw = nullptr;
  check(descfact_system_create(domain, n, m, p, A.values.data(),
                               has_e ? E.values.data() : nullptr,
                               B.values.data(), C.values.data(),
                               has_d ? D.values.data() : nullptr, &raw));
  return SystemPtr(raw);
}

Json system_to_json(const descfact_system* sys) {
  size_t n = 0, m = 0, p = 0;
  check(descfact_system_dims(sys, &n, &m, &p));
  auto get = [&](descfact_matrix_id id, size_t rows, size_t cols) {
    std::vector<double> buf(rows * cols);
    if (!buf.empty()) check(descfact_system_matrix(sys, id, buf.data(), buf.size()));
    return matrix_to_json(buf, rows, cols);
  };
  Json doc;
  doc["domain"] = descfact_system_domain(sys) == DESCFACT_DISCRETE
                      ? "discrete"
                      : "continuous";
  doc["A"] = get(DESCFACT_MAT_A, n, n);
  doc["E"] = descfact_system_identity_e(sys) ? Json(nullptr)
                                             : get(DESCFACT_MAT_E, n, n);
  doc["B"] = get(DESCFACT_MAT_B, n, m);
  doc["C"] = get(DESCFACT_MAT_C, p, n);
  doc["D"] = get(DESCFACT_MAT_D, p, m);
  return doc;
}

std::string format_complex(std::complex<double> z) {
  // Adding zero maps -0 to +0.
  std::string out = shortest(z.real() + 0.0);
  const double im = z.imag() + 0.0;
  if (im < 0.0) {
    out += "-" + shortest(-im);
  } else {
    out += "+" + shortest(im);
  }
  return out + "i";
}

std::complex<double> parse_complex(const std::string& input) {
  const std::string text = trim(input);
  auto bad = [&] { return std::invalid_argument("bad complex number '" + input + "'"); };
  if (text.empty()) throw bad();
  double re = 0.0, im = 0.0;
  if (text.back() != 'i') {
    if (!parse_double(text, re)) throw bad();
    return {re, 0.0};
  }
  const std::string body = text.substr(0, text.size() - 1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  size_t split = std::string::npos;
  for (size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' &&
        body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  std::string re_part, im_part;
  if (split == std::string::npos) {
    im_part = body;
  } else {
    re_part = body.substr(0, split);
    im_part = body.substr(split);
  }
  if (!re_part.empty() && !parse_double(re_part, re)) throw bad();
  if (im_part.empty() || im_part == "+") {
    im = 1.0;
  } else if (im_part == "-") {
    im = -1.0;
  } else if (!parse_double(im_part, im)) {
    throw bad();
  }
  return {re, im};
}

std::vector<std::complex<double>> parse_complex_list(const std::string& text) {
  std::vector<std::complex<double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
  return out;
}

}  // namespace descfact_cli
