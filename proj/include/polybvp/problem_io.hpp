#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polybvp/bootstrap.hpp"
#include "polybvp/problem.hpp"

namespace polybvp {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& text, int line,
                           const std::string& field) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field +
                     "' is not a number: '" + text + "'");
  }
  if (used != text.size())
    throw ParseError("line " + std::to_string(line) + ": field '" + field +
                     "' has trailing characters: '" + text + "'");
  return value;
}

inline std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace detail

/// Problem files are plain key/value text, one `key: value` pair per line.
/// '#' starts a comment. Required fields: name, a, b, alpha, beta, and
/// coeffs, a bracketed ascending list [c_0, ..., c_d] of the coefficients
/// of p. The listed leading coefficient must be nonzero and d >= 1.
inline BvpProblem parse_problem(std::istream& in,
                                const std::string& origin = "<stream>") {
  BvpProblem prob;
  std::map<std::string, bool> seen;
  std::string raw;
  int line = 0;
  bool have_coeffs = false;
  std::vector<double> coeffs;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text = detail::trim(raw);
    if (text.empty()) continue;
    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw ParseError(origin + ": line " + std::to_string(line) +
                       ": expected 'key: value'");
    const std::string key = detail::trim(text.substr(0, colon));
    const std::string value = detail::trim(text.substr(colon + 1));
    if (seen[key])
      throw ParseError(origin + ": line " + std::to_string(line) +
                       ": duplicate field '" + key + "'");
    seen[key] = true;

    if (key == "name") {
      prob.name = value;
    } else if (key == "a") {
      prob.a = detail::parse_number(value, line, key);
    } else if (key == "b") {
      prob.b = detail::parse_number(value, line, key);
    } else if (key == "alpha") {
      prob.alpha = detail::parse_number(value, line, key);
    } else if (key == "beta") {
      prob.beta = detail::parse_number(value, line, key);
    } else if (key == "coeffs") {
      if (value.size() < 2 || value.front() != '[' || value.back() != ']')
        throw ParseError(origin + ": line " + std::to_string(line) +
                         ": coeffs must be a bracketed list");
      std::string inner = value.substr(1, value.size() - 2);
      for (auto& ch : inner)
        if (ch == ',') ch = ' ';
      std::istringstream items(inner);
      std::string item;
      while (items >> item)
        coeffs.push_back(detail::parse_number(item, line, key));
      if (coeffs.empty())
        throw ParseError(origin + ": line " + std::to_string(line) +
                         ": coeffs list is empty");
      have_coeffs = true;
    } else {
      throw ParseError(origin + ": line " + std::to_string(line) +
                       ": unknown field '" + key + "'");
    }
  }

  for (const char* field : {"name", "a", "b", "alpha", "beta"})
    if (!seen[field])
      throw ParseError(origin + ": missing field '" + std::string(field) +
                       "'");
  if (!have_coeffs) throw ParseError(origin + ": missing field 'coeffs'");

  if (coeffs.size() < 2)
    throw ValidationError(origin + ": p must have degree >= 1");
  if (coeffs.back() == 0.0)
    throw ValidationError(origin + ": zero leading coefficient");
  prob.p = Polynomial(Eigen::Map<const Eigen::VectorXd>(
      coeffs.data(), static_cast<Eigen::Index>(coeffs.size())));
  validate(prob);
  return prob;
}

inline BvpProblem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open problem file");
  return parse_problem(in, path);
}

// ---------------------------------------------------------------------------
// Report and solution writers. All output is plain UTF-8 with LF endings and
// deterministic ordering, so identical runs produce identical bytes.

inline void write_summary(
    std::ostream& out,
    const std::vector<std::pair<std::string, std::string>>& header,
    const std::vector<StageReport>& reports) {
  for (const auto& [key, value] : header)
    out << "# " << key << ": " << value << "\n";
  out << "#\n";
  char buf[176];
  std::snprintf(buf, sizeof(buf),
                "%4s %10s %8s %10s %9s %9s %11s %9s %7s %9s\n", "N", "SOLS",
                "REAL", "PATHS", "DIVERGED", "FAILURES", "DUPLICATES",
                "FILTERED", "KEPT", "KEPTREAL");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf),
                  "%4d %10ld %8ld %10ld %9ld %9ld %11ld %9ld %7ld %9ld\n",
                  r.n, r.sols, r.reals, r.paths_tracked, r.diverged,
                  r.failures, r.duplicates, r.filtered_out, r.kept,
                  r.kept_reals);
    out << buf;
  }
}

/// One row per mesh node per solution; re/im carry full round-trip
/// precision. filter_score is the third-derivative diagnostic (0 when the
/// stencil does not fit).
inline void write_solutions_csv(std::ostream& out, const BvpProblem& prob,
                                const StageSet& stage) {
  const Mesh mesh = mesh_for(prob, stage.n);
  out << "sol,i,x,re,im,is_real,filter_score\n";
  for (std::size_t s = 0; s < stage.solutions.size(); ++s) {
    const SolutionVector& v = stage.solutions[s];
    const double score = third_derivative_score(prob, v);
    for (int i = 0; i < v.n(); ++i) {
      out << s << ',' << (i + 1) << ','
          << detail::format("%.17g", mesh.node(i + 1)) << ','
          << detail::format("%.17g", v.values(i).real()) << ','
          << detail::format("%.17g", v.values(i).imag()) << ','
          << (v.is_real ? 1 : 0) << ','
          << detail::format("%.17g", score) << "\n";
    }
  }
}

inline std::vector<SolutionVector> read_solutions_csv(std::istream& in) {
  std::vector<SolutionVector> solutions;
  std::vector<Complex> current;
  long current_sol = -1;
  bool current_real = false;
  std::string line;
  std::getline(in, line);  // header
  auto flush = [&] {
    if (current.empty()) return;
    SolutionVector v;
    v.values = Eigen::Map<const CVector>(current.data(),
                                         static_cast<Eigen::Index>(
                                             current.size()));
    v.is_real = current_real;
    solutions.push_back(std::move(v));
    current.clear();
  };
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw ParseError("solutions csv line " + std::to_string(lineno) +
                       ": expected 7 fields");
    const long sol = std::stol(fields[0]);
    if (sol != current_sol) {
      flush();
      current_sol = sol;
    }
    current.emplace_back(std::stod(fields[3]), std::stod(fields[4]));
    current_real = fields[5] == "1";
  }
  flush();
  return solutions;
}

struct ErrorRow {
  int n = 0;
  double max_error = 0.0;
  double h_squared = 0.0;
  double ratio = 0.0;
};

inline void write_errors_csv(std::ostream& out,
                             const std::vector<ErrorRow>& rows) {
  out << "n,max_error,h_squared,ratio\n";
  for (const auto& r : rows)
    out << r.n << ',' << detail::format("%.6e", r.max_error) << ','
        << detail::format("%.6e", r.h_squared) << ','
        << detail::format("%.6e", r.ratio) << "\n";
}

/// Two-column x y data for one real solution, boundary points included.
inline void write_plot_data(std::ostream& out, const BvpProblem& prob,
                            const SolutionVector& v) {
  const Mesh mesh = mesh_for(prob, v.n());
  out << detail::format("%.17g", prob.a) << ' '
      << detail::format("%.17g", prob.alpha) << "\n";
  for (int i = 0; i < v.n(); ++i)
    out << detail::format("%.17g", mesh.node(i + 1)) << ' '
        << detail::format("%.17g", v.values(i).real()) << "\n";
  out << detail::format("%.17g", prob.b) << ' '
      << detail::format("%.17g", prob.beta) << "\n";
}

}  // namespace polybvp
