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
 * \file ueg.hpp
 * \brief Synthetic uniform-electron-gas instances and the three experiment
 * protocols (overflow resilience, scale recovery, regularization path).
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scaleshape/errors.hpp"
#include "scaleshape/problem.hpp"
#include "scaleshape/sensitivity.hpp"
#include "scaleshape/solver.hpp"

namespace scaleshape {

/// Two Gaussian bumps on the frequency grid: a broad low-frequency part and
/// a narrow plasmon-like peak.
struct BumpShape {
  double broad_center = 0.10;
  double broad_width = 0.25;
  double peak_center = 1.0;
  double peak_width = 0.04;
  double peak_weight = 0.45;  ///< mass fraction carried by the narrow peak
};

struct UegSpec {
  int m = 201;
  int n = 500;
  double beta_temp = 18.68;
  double omega_min = 4e-3;
  double omega_max = 4.0;
  double scale_Z = 1.0;
  double noise_rel = 1e-4;
  std::uint64_t seed = 20240607;
  double lambda = 1e-5;
  BumpShape truth{};
  /// Prior: the truth smoothed and shifted. Its Gaussian tail puts about half
  /// the entries below 1e-10 with a minimum near 1e-40 on the default grid.
  BumpShape prior{0.0, 0.30, 1.05, 0.06, 0.40};
  double prior_floor = kDefaultPriorFloor;

  void validate() const {
    if (m < 2) throw ValidationError("m", "must be at least 2");
    if (n < 2) throw ValidationError("n", "must be at least 2");
    if (!(beta_temp > 0.0)) throw ValidationError("beta_temp", "must be positive");
    if (!(omega_min > 0.0)) throw ValidationError("omega_min", "must be positive");
    if (!(omega_min < omega_max)) throw ValidationError("omega_max", "must exceed omega_min");
    if (!(scale_Z > 0.0)) throw ValidationError("scale_Z", "must be positive");
    if (!(noise_rel >= 0.0)) throw ValidationError("noise_rel", "must be nonnegative");
    if (!(lambda > 0.0)) throw ValidationError("lambda", "must be positive");
    for (const BumpShape* s : {&truth, &prior}) {
      if (!(s->broad_width > 0.0) || !(s->peak_width > 0.0)) throw ValidationError("shape", "widths must be positive");
      if (!(s->peak_weight >= 0.0 && s->peak_weight <= 1.0)) throw ValidationError("shape", "peak weight must lie in [0, 1]");
    }
  }
};

struct UegInstance {
  ProblemData problem;
  ScaleShape truth;
  Eigen::VectorXd t;
  Eigen::VectorXd omega;
  Eigen::VectorXd q_raw;  ///< prior before clipping
};

namespace detail {

inline Eigen::VectorXd linspace(double a, double b, int k) { return Eigen::VectorXd::LinSpaced(k, a, b); }

inline Eigen::VectorXd bump_shape(const Eigen::VectorXd& omega, const BumpShape& s) {
  auto unit_gauss = [&](double c, double w) {
    Eigen::VectorXd g = (-0.5 * ((omega.array() - c) / w).square()).exp().matrix();
    return Eigen::VectorXd(g / g.sum());
  };
  Eigen::VectorXd p = (1.0 - s.peak_weight) * unit_gauss(s.broad_center, s.broad_width) +
                      s.peak_weight * unit_gauss(s.peak_center, s.peak_width);
  return p / p.sum();
}

}  // namespace detail

/// Periodic Laplace kernel A_ij = exp(-t_i w_j) + exp(-(beta - t_i) w_j).
inline Eigen::MatrixXd ueg_kernel(const Eigen::VectorXd& t, const Eigen::VectorXd& omega, double beta_temp) {
  Eigen::MatrixXd A(t.size(), omega.size());
  for (Eigen::Index j = 0; j < omega.size(); ++j) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      A(i, j) = std::exp(-t[i] * omega[j]) + std::exp(-(beta_temp - t[i]) * omega[j]);
    }
  }
  return A;
}

/// Deterministic in `spec.seed`.
inline UegInstance gen_ueg(const UegSpec& spec) {
  spec.validate();
  UegInstance out;
  out.t = detail::linspace(0.0, spec.beta_temp, spec.m);
  out.omega = detail::linspace(spec.omega_min, spec.omega_max, spec.n);
  const Eigen::MatrixXd A = ueg_kernel(out.t, out.omega, spec.beta_temp);

  out.truth.p = detail::bump_shape(out.omega, spec.truth);
  out.truth.tau = spec.scale_Z;
  out.q_raw = detail::bump_shape(out.omega, spec.prior);

  const Eigen::VectorXd clean = A * compose(out.truth);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd b(spec.m);
  for (int i = 0; i < spec.m; ++i) b[i] = clean[i] * (1.0 + spec.noise_rel * normal(rng));

  ProblemSpec ps;
  ps.A = A;
  ps.b = std::move(b);
  ps.c = Eigen::VectorXd::Zero(spec.n);
  ps.r = clip_prior(out.q_raw, spec.prior_floor).values();
  ps.lambda = spec.lambda;
  out.problem = validate(std::move(ps));
  return out;
}

struct RankReport {
  Eigen::VectorXd singular_values;
  int rank_relative = 0;  ///< count of sigma_i > tol * sigma_1
  int rank_absolute = 0;  ///< count of sigma_i > tol
};

inline RankReport numerical_rank(const Eigen::MatrixXd& A, double tol = 1e-10) {
  RankReport rep;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  rep.singular_values = svd.singularValues();
  const double s1 = rep.singular_values.size() > 0 ? rep.singular_values[0] : 0.0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values[i] > tol * s1) ++rep.rank_relative;
    if (rep.singular_values[i] > tol) ++rep.rank_absolute;
  }
  return rep;
}

// ----------------------------------------------------------------------------
// Experiments

struct OverflowRow {
  double Z = 0.0;
  SolveReport classical;
  SolveReport scale_shape;
  double classical_peak_exponent = 0.0;  ///< max unsafeguarded full-step exponent
  double classical_exponent_k0 = 0.0;
  double scale_shape_peak_exponent = 0.0;
};

struct ScaleRow {
  double Z = 0.0;
  SolveReport report;
  double tau_K = 0.0;
  double rel_scale_error = 0.0;
  Eigen::VectorXd x_over_Z;
  Eigen::VectorXd truth_shape;
};

struct PathRow {
  double Z = 0.0;
  PathResult free_tau;
};

struct ExperimentTable {
  std::string name;
  Eigen::VectorXd omega;
  std::vector<OverflowRow> overflow;
  std::vector<ScaleRow> scale;
  std::vector<PathRow> path;
};

inline ExperimentTable run_overflow_experiment(UegSpec base, const std::vector<double>& Z_list, double lambda,
                                               const SolverConfig& cfg, double tau0 = 1.0) {
  ExperimentTable tab;
  tab.name = "overflow";
  base.lambda = lambda;
  for (const double Z : Z_list) {
    base.scale_Z = Z;
    const UegInstance inst = gen_ueg(base);
    tab.omega = inst.omega;
    OverflowRow row;
    row.Z = Z;
    row.classical = solve_classical(inst.problem, cfg, Eigen::VectorXd::Zero(inst.problem.m()));
    row.scale_shape = solve(inst.problem, cfg, tau0);
    for (const IterationRecord& rec : row.classical.trace) {
      row.classical_peak_exponent = std::max(row.classical_peak_exponent, rec.max_exponent);
    }
    row.classical_exponent_k0 = row.classical.trace.front().max_exponent;
    row.scale_shape_peak_exponent = -std::numeric_limits<double>::infinity();
    for (const IterationRecord& rec : row.scale_shape.trace) {
      row.scale_shape_peak_exponent = std::max(row.scale_shape_peak_exponent, rec.max_exponent);
    }
    tab.overflow.push_back(std::move(row));
  }
  return tab;
}

inline ExperimentTable run_scale_experiment(UegSpec base, const std::vector<double>& Z_list, double lambda,
                                            const SolverConfig& cfg, double tau0 = 1.0) {
  ExperimentTable tab;
  tab.name = "scale";
  base.lambda = lambda;
  for (const double Z : Z_list) {
    base.scale_Z = Z;
    const UegInstance inst = gen_ueg(base);
    tab.omega = inst.omega;
    ScaleRow row;
    row.Z = Z;
    row.report = solve(inst.problem, cfg, tau0);
    row.tau_K = row.report.z_final.tau;
    row.rel_scale_error = std::fabs(row.tau_K - Z) / Z;
    row.x_over_Z = row.report.x_final / Z;
    row.truth_shape = inst.truth.p;
    tab.scale.push_back(std::move(row));
  }
  return tab;
}

/// Cold starts at every grid point, matching independent solves from tau0 = 1.
inline ExperimentTable run_path_experiment(UegSpec base, const std::vector<double>& Z_list,
                                           const std::vector<double>& lambda_grid, const SolverConfig& cfg) {
  ExperimentTable tab;
  tab.name = "path";
  for (const double Z : Z_list) {
    base.scale_Z = Z;
    const UegInstance inst = gen_ueg(base);
    tab.omega = inst.omega;
    PathOptions opt;
    opt.solver = cfg;
    opt.warm_start = false;
    tab.path.push_back(PathRow{Z, regularization_path(inst.problem, lambda_grid, opt)});
  }
  return tab;
}

}  // namespace scaleshape
