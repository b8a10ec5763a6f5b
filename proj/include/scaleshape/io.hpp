// Copyright 2026 The scaleshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * \file io.hpp
 * \brief Problem files (JSON), CSV tables and minimal SVG line charts.
 */
#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scaleshape/errors.hpp"
#include "scaleshape/problem.hpp"
#include "scaleshape/sensitivity.hpp"
#include "scaleshape/solver.hpp"

namespace scaleshape {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ----------------------------------------------------------------------------
// Problem files

/// On-disk problem: prior given as q >= 0 rather than log-weights.
struct ProblemFile {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd q;
  double lambda = 1.0;
};

namespace detail {

inline Eigen::VectorXd json_vector(const nlohmann::json& j, const char* field, Eigen::Index expected) {
  if (!j.contains(field) || !j[field].is_array()) throw ValidationError(field, "missing or not an array");
  const auto& a = j[field];
  if (static_cast<Eigen::Index>(a.size()) != expected) {
    throw ValidationError(field, "length " + std::to_string(a.size()) + " != " + std::to_string(expected));
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const auto& e = a[static_cast<std::size_t>(i)];
    if (!e.is_number()) throw ValidationError(field, "entry " + std::to_string(i) + " is not a number");
    v[i] = e.get<double>();
  }
  return v;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

inline ProblemFile problem_file_from_json(const nlohmann::json& j) {
  for (const char* f : {"m", "n"}) {
    if (!j.contains(f) || !j[f].is_number_integer()) throw ValidationError(f, "missing or not an integer");
  }
  const long long m = j["m"].get<long long>();
  const long long n = j["n"].get<long long>();
  if (m < 1 || n < 1) throw ValidationError("m", "dimensions must be positive");
  ProblemFile pf;
  const Eigen::VectorXd flat = detail::json_vector(j, "A", m * n);
  pf.A = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), m, n);
  pf.b = detail::json_vector(j, "b", m);
  pf.c = detail::json_vector(j, "c", n);
  pf.q = detail::json_vector(j, "q", n);
  if (!j.contains("lambda") || !j["lambda"].is_number()) throw ValidationError("lambda", "missing or not a number");
  pf.lambda = j["lambda"].get<double>();
  return pf;
}

inline nlohmann::json problem_file_to_json(const ProblemFile& pf) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Ar = pf.A;
  nlohmann::json j;
  j["m"] = pf.A.rows();
  j["n"] = pf.A.cols();
  j["A"] = std::vector<double>(Ar.data(), Ar.data() + Ar.size());
  j["b"] = detail::to_std(pf.b);
  j["c"] = detail::to_std(pf.c);
  j["q"] = detail::to_std(pf.q);
  j["lambda"] = pf.lambda;
  return j;
}

/// Validated ProblemData. Priors with zero entries are clipped at `floor`
/// and renormalized; strictly positive priors are used as given.
inline ProblemData to_problem(const ProblemFile& pf, double floor = kDefaultPriorFloor) {
  ProblemSpec s;
  s.A = pf.A;
  s.b = pf.b;
  s.c = pf.c;
  s.lambda = pf.lambda;
  for (Eigen::Index j = 0; j < pf.q.size(); ++j) {
    if (!std::isfinite(pf.q[j]) || pf.q[j] < 0.0) {
      throw ValidationError("q", "entry " + std::to_string(j) + " is negative or not finite");
    }
  }
  if (pf.q.size() > 0 && pf.q.minCoeff() > 0.0) {
    s.r = pf.q.array().log().matrix();
  } else {
    s.r = clip_prior(pf.q, floor).values();
  }
  return validate(std::move(s));
}

inline ProblemFile to_problem_file(const ProblemData& P) {
  return ProblemFile{P.A(), P.b(), P.c(), P.r().weights(), P.lambda()};
}

inline ProblemFile load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return problem_file_from_json(j);
}

inline ProblemData load_problem(const std::filesystem::path& path) { return to_problem(load_problem_file(path)); }

inline void save_problem(const std::filesystem::path& path, const ProblemFile& pf) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << problem_file_to_json(pf).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// ----------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw ContractError("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }
  bool operator==(const CsvTable&) const = default;
};

/// Shortest text that parses back to the same double.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.add_row(std::move(cells));
    }
  }
  return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text(path, to_csv(t)); }
inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

inline CsvTable trace_table(const std::vector<IterationRecord>& trace) {
  CsvTable t{{"k", "rho", "alpha", "alpha_bar", "backtracks", "tau", "eta_k", "max_exponent"}, {}};
  for (const IterationRecord& r : trace) {
    t.add_row({std::to_string(r.k), fmt_double(r.rho), fmt_double(r.alpha), fmt_double(r.alpha_bar),
               std::to_string(r.backtracks), fmt_double(r.tau), fmt_double(r.eta_k), fmt_double(r.max_exponent)});
  }
  return t;
}

inline CsvTable path_table(const std::vector<PathRecord>& path) {
  CsvTable t{{"lambda", "residual", "rel_residual", "h", "f", "tau", "iterations", "status"}, {}};
  for (const PathRecord& r : path) {
    t.add_row({fmt_double(r.lambda), fmt_double(r.residual), fmt_double(r.rel_residual), fmt_double(r.data_fit_h),
               fmt_double(r.entropy_f), fmt_double(r.tau), std::to_string(r.iterations), to_string(r.status)});
  }
  return t;
}

// ----------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<double> h_lines;  ///< horizontal reference lines, in data units
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

/// Renders a chart; points not representable on a log axis are skipped.
inline std::string render_svg(const LineChart& c) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  auto tx = [&](double v) { return c.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return c.log_y ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!c.log_x || x > 0) && (!c.log_y || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : c.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ok(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  for (double h : c.h_lines) {
    if (ok(1.0, h) && std::isfinite(y0)) {
      y0 = std::min(y0, ty(h));
      y1 = std::max(y1, ty(h));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(c.title)
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick = [](double v, bool log) { return log ? "1e" + fmt_double(std::round(v * 100) / 100) : fmt_double(v); };
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = L + (W - L - R) * i / 4.0, sy = H - B - (H - T - B) * i / 4.0;
    os << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << tick(fx, c.log_x) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << sy + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
       << tick(fy, c.log_y) << "</text>\n";
  }
  os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << detail::xml_escape(c.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << T + (H - T - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
     << T + (H - T - B) / 2 << ")\">" << detail::xml_escape(c.y_label) << "</text>\n";
  for (double h : c.h_lines) {
    if (!ok(1.0, h)) continue;
    os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(h) << "\" y2=\"" << py(h)
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const Series& s = c.series[k];
    const char* color = palette[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5 3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (ok(s.x[i], s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = T + 14 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 10 << "\" x2=\"" << W - R + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\"/>\n";
    os << "<text x=\"" << W - R + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << detail::xml_escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace scaleshape
