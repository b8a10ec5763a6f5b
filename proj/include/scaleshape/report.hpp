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
 * \file report.hpp
 * \brief CSV and SVG emission for experiment tables.
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scaleshape/io.hpp"
#include "scaleshape/ueg.hpp"

namespace scaleshape {

namespace detail {

inline std::string z_tag(double Z) { return "Z" + fmt_double(Z); }

inline Series trace_series(const std::string& name, const std::vector<IterationRecord>& trace,
                           double IterationRecord::*field) {
  Series s{name, {}, {}};
  for (const IterationRecord& r : trace) {
    s.x.push_back(r.k);
    s.y.push_back(r.*field);
  }
  return s;
}

}  // namespace detail

inline CsvTable overflow_summary_table(const ExperimentTable& t) {
  CsvTable c{{"Z", "classical_status", "classical_iterations", "classical_final_grad", "classical_exponent_k0",
               "classical_peak_exponent", "scale_shape_status", "scale_shape_iterations", "scale_shape_final_rho",
               "scale_shape_peak_exponent"},
              {}};
  for (const OverflowRow& r : t.overflow) {
    c.add_row({fmt_double(r.Z), to_string(r.classical.status), std::to_string(r.classical.iterations()),
               fmt_double(r.classical.final_rho()), fmt_double(r.classical_exponent_k0),
               fmt_double(r.classical_peak_exponent), to_string(r.scale_shape.status),
               std::to_string(r.scale_shape.iterations()), fmt_double(r.scale_shape.final_rho()),
               fmt_double(r.scale_shape_peak_exponent)});
  }
  return c;
}

inline CsvTable scale_summary_table(const ExperimentTable& t) {
  CsvTable c{{"Z", "tau_K", "rel_scale_error", "iterations", "status"}, {}};
  for (const ScaleRow& r : t.scale) {
    c.add_row({fmt_double(r.Z), fmt_double(r.tau_K), fmt_double(r.rel_scale_error),
               std::to_string(r.report.iterations()), to_string(r.report.status)});
  }
  return c;
}

/// One column per Z of x/Z, next to omega and the truth shape.
inline CsvTable scale_recovery_table(const ExperimentTable& t) {
  CsvTable c{{"omega", "truth"}, {}};
  for (const ScaleRow& r : t.scale) c.header.push_back("x_over_Z_" + detail::z_tag(r.Z));
  if (t.scale.empty()) return c;
  for (Eigen::Index j = 0; j < t.omega.size(); ++j) {
    std::vector<std::string> row{fmt_double(t.omega[j]), fmt_double(t.scale.front().truth_shape[j])};
    for (const ScaleRow& r : t.scale) row.push_back(fmt_double(r.x_over_Z[j]));
    c.add_row(std::move(row));
  }
  return c;
}

/// Writes CSV tables and SVG charts into `out_dir`; returns the files written.
inline std::vector<std::filesystem::path> emit_plots(const ExperimentTable& t, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  auto csv = [&](const std::string& name, const CsvTable& c) {
    files.push_back(out_dir / name);
    write_csv(files.back(), c);
  };
  auto svg = [&](const std::string& name, const LineChart& ch) {
    files.push_back(out_dir / name);
    write_text(files.back(), render_svg(ch));
  };

  if (t.name == "overflow") {
    csv("overflow_summary.csv", overflow_summary_table(t));
    LineChart expo{"Classical full-step exponent", "iteration k", "max exponent", false, true, {}, {kLogMaxDouble}};
    LineChart grad{"Classical dual Newton", "iteration k", "||grad psi_d||", false, true, {}, {}};
    LineChart merit{"Scale-shape Newton", "iteration k", "rho", false, true, {}, {}};
    for (const OverflowRow& r : t.overflow) {
      const std::string tag = detail::z_tag(r.Z);
      csv("overflow_classical_" + tag + ".csv", trace_table(r.classical.trace));
      csv("overflow_scale_shape_" + tag + ".csv", trace_table(r.scale_shape.trace));
      expo.series.push_back(detail::trace_series(tag, r.classical.trace, &IterationRecord::max_exponent));
      grad.series.push_back(detail::trace_series(tag, r.classical.trace, &IterationRecord::rho));
      merit.series.push_back(detail::trace_series(tag, r.scale_shape.trace, &IterationRecord::rho));
    }
    svg("overflow_exponent.svg", expo);
    svg("overflow_classical_grad.svg", grad);
    svg("overflow_merit.svg", merit);
  } else if (t.name == "scale") {
    csv("scale_summary.csv", scale_summary_table(t));
    csv("scale_recovery.csv", scale_recovery_table(t));
    LineChart rec{"Normalized recoveries", "omega", "x / Z", false, false, {}, {}};
    LineChart tau{"Scale trajectories", "iteration k", "tau", false, true, {}, {}};
    LineChart merit{"Merit", "iteration k", "rho", false, true, {}, {}};
    if (!t.scale.empty()) {
      const Eigen::VectorXd& p = t.scale.front().truth_shape;
      rec.series.push_back(Series{"truth", {t.omega.data(), t.omega.data() + t.omega.size()},
                                  {p.data(), p.data() + p.size()}, true});
    }
    for (const ScaleRow& r : t.scale) {
      const std::string tag = detail::z_tag(r.Z);
      csv("scale_trace_" + tag + ".csv", trace_table(r.report.trace));
      rec.series.push_back(Series{tag, {t.omega.data(), t.omega.data() + t.omega.size()},
                                  {r.x_over_Z.data(), r.x_over_Z.data() + r.x_over_Z.size()}});
      tau.series.push_back(detail::trace_series(tag, r.report.trace, &IterationRecord::tau));
      tau.h_lines.push_back(r.Z);
      merit.series.push_back(detail::trace_series(tag, r.report.trace, &IterationRecord::rho));
    }
    svg("scale_recovery.svg", rec);
    svg("scale_tau.svg", tau);
    svg("scale_merit.svg", merit);
  } else if (t.name == "path") {
    LineChart rr{"Relative residual along the path", "lambda", "||Ax - b|| / ||b||", true, true, {}, {}};
    for (const PathRow& r : t.path) {
      const std::string tag = detail::z_tag(r.Z);
      csv("path_" + tag + ".csv", path_table(r.free_tau.records));
      Series s{tag, {}, {}};
      for (const PathRecord& p : r.free_tau.records) {
        s.x.push_back(p.lambda);
        s.y.push_back(p.rel_residual);
      }
      rr.series.push_back(std::move(s));
    }
    svg("path_rel_residual.svg", rr);
  } else {
    throw ContractError("emit_plots: unknown experiment '" + t.name + "'");
  }
  return files;
}

}  // namespace scaleshape
