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
 * \file sensitivity.hpp
 * \brief Solution-map Jacobians, the joint perturbation bound and
 * regularization-path sweeps.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scaleshape/dual_system.hpp"
#include "scaleshape/errors.hpp"
#include "scaleshape/problem.hpp"
#include "scaleshape/solver.hpp"

namespace scaleshape {

struct SolutionJacobians {
  Eigen::MatrixXd D_b;       ///< n x m
  Eigen::VectorXd D_lambda;  ///< n
  Eigen::MatrixXd D_r;       ///< n x n, symmetric
};

/**
 * Jacobians of x*(b, lambda, r) at a solved root z*, from one Cholesky
 * factorization of Ht = lambda I + tau* A Diag(p*) A^T:
 *   D_b x = tau Diag(p) A^T Ht^{-1},  D_lambda x = -D_b x y*,
 *   D_r x = tau Diag(p) - tau^2 Diag(p) A^T Ht^{-1} A Diag(p).
 */
inline SolutionJacobians solution_jacobians(const ProblemData& P, const DualPoint& z_star) {
  detail::check_point(z_star, P, "solution_jacobians");
  const Eigen::VectorXd p = detail::shape_at(z_star.y, P).p;
  const double tau = z_star.tau;

  const Eigen::MatrixXd PAt = p.asDiagonal() * P.A().transpose();  // n x m
  Eigen::MatrixXd Ht = tau * (P.A() * PAt);
  Ht = 0.5 * (Ht + Ht.transpose()).eval();
  Ht.diagonal().array() += P.lambda();
  const Eigen::LLT<Eigen::MatrixXd> llt(Ht);
  if (llt.info() != Eigen::Success) throw DomainError("solution_jacobians: lambda I + tau A Diag(p) A^T is not positive definite");

  SolutionJacobians J;
  // D_b = tau PAt Ht^{-1}; Ht symmetric so D_b^T = tau Ht^{-1} PAt^T.
  J.D_b = (tau * llt.solve(PAt.transpose())).transpose();
  J.D_lambda = -J.D_b * z_star.y;
  J.D_r = -tau * (J.D_b * PAt.transpose());
  J.D_r.diagonal() += tau * p;
  J.D_r = 0.5 * (J.D_r + J.D_r.transpose()).eval();
  return J;
}

/// Right-hand side of the joint perturbation estimate, with path maxima of
/// tau and ||y|| estimated from `path_samples` solves.
struct JointBound {
  double bound = 0.0;
  double tau_bar = 0.0;
  double y_bar = 0.0;
  double lambda_minus = 0.0;
  int path_samples = 0;
  bool sample_estimated = true;  ///< tau_bar, y_bar are sampled, not exact maxima
  bool all_converged = true;
};

inline JointBound joint_lipschitz_bound_report(const ProblemData& P1, const ProblemData& P2, int path_samples = 9,
                                               const SolverConfig& cfg = {}) {
  if (path_samples < 2) throw ContractError("joint_lipschitz_bound: path_samples must be at least 2");
  if (P1.A().rows() != P2.A().rows() || P1.A().cols() != P2.A().cols() || P1.A() != P2.A()) {
    throw ContractError("joint_lipschitz_bound: problems must share A");
  }
  if (P1.c() != P2.c()) throw ContractError("joint_lipschitz_bound: problems must share c");

  JointBound out;
  out.path_samples = path_samples;
  out.lambda_minus = std::min(P1.lambda(), P2.lambda());
  const Eigen::VectorXd& r1 = P1.r().values();
  const Eigen::VectorXd& r2 = P2.r().values();
  for (int s = 0; s < path_samples; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(path_samples - 1);
    ProblemSpec spec = P1.spec();
    spec.b = (1.0 - t) * P1.b() + t * P2.b();
    spec.lambda = (1.0 - t) * P1.lambda() + t * P2.lambda();
    spec.r = (1.0 - t) * r1 + t * r2;
    const ProblemData Pt = validate(std::move(spec));
    const SolveReport rep = solve(Pt, cfg);
    out.all_converged = out.all_converged && rep.converged();
    out.tau_bar = std::max(out.tau_bar, rep.z_final.tau);
    out.y_bar = std::max(out.y_bar, rep.z_final.y.norm());
  }
  const double lm = out.lambda_minus;
  const double lip = std::min(std::sqrt(out.tau_bar) / (2.0 * std::sqrt(lm)), out.tau_bar * P1.constants().A_opnorm / lm);
  out.bound = lip * ((P2.b() - P1.b()).norm() + out.y_bar * std::fabs(P2.lambda() - P1.lambda())) +
              out.tau_bar * (r2 - r1).norm();
  return out;
}

inline double joint_lipschitz_bound(const ProblemData& P1, const ProblemData& P2, int path_samples = 9,
                                    const SolverConfig& cfg = {}) {
  return joint_lipschitz_bound_report(P1, P2, path_samples, cfg).bound;
}

struct PathRecord {
  double lambda = 0.0;
  Eigen::VectorXd x;
  double tau = 0.0;
  double residual = 0.0;      ///< ||Ax - b||
  double rel_residual = 0.0;  ///< ||Ax - b|| / ||b||
  double data_fit_h = 0.0;    ///< 0.5 ||Ax - b||^2
  double entropy_f = 0.0;     ///< g_q(x) + <c, x>
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
};

struct PathOptions {
  std::optional<double> fixed_tau;
  bool warm_start = false;  ///< start each point from the previous solution
  SolverConfig solver;
};

struct PathResult {
  std::vector<PathRecord> records;
  bool h_nonincreasing = true;  ///< 0.5||Ax-b||^2 never rises as lambda falls (slack 10 eps)
  bool f_nondecreasing = true;  ///< g_q + <c,x> never falls as lambda falls (slack 10 eps)
  bool all_converged = true;
};

/**
 * Solves at every lambda of a strictly descending grid. Failures are kept
 * in-line with their status. Warm starts reuse the previous root.
 */
inline PathResult regularization_path(const ProblemData& P, const std::vector<double>& lambda_grid,
                                      const PathOptions& opt = {}) {
  if (lambda_grid.empty()) throw ContractError("regularization_path: empty grid");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0) || !std::isfinite(lambda_grid[i])) {
      throw ContractError("regularization_path: grid entries must be positive and finite");
    }
    if (i > 0 && !(lambda_grid[i] < lambda_grid[i - 1])) {
      throw ContractError("regularization_path: grid must be strictly descending");
    }
  }
  if (opt.fixed_tau && !(*opt.fixed_tau > 0.0)) throw ContractError("regularization_path: fixed tau must be positive");

  PathResult out;
  const double bnorm = P.b().norm();
  std::optional<DualPoint> prev;
  for (const double lam : lambda_grid) {
    const ProblemData Pl = P.with_lambda(lam);
    SolveReport rep;
    if (opt.fixed_tau) {
      Eigen::VectorXd y0 = (opt.warm_start && prev) ? prev->y : Eigen::VectorXd::Zero(P.m());
      rep = solve_fixed_scale(Pl, *opt.fixed_tau, opt.solver, std::move(y0));
    } else if (opt.warm_start && prev) {
      rep = solve(Pl, opt.solver, *prev);
    } else {
      rep = solve(Pl, opt.solver);
    }
    PathRecord rec;
    rec.lambda = lam;
    rec.x = rep.x_final;
    rec.tau = rep.z_final.tau;
    rec.residual = (P.A() * rec.x - P.b()).norm();
    rec.rel_residual = bnorm > 0.0 ? rec.residual / bnorm : rec.residual;
    rec.data_fit_h = 0.5 * rec.residual * rec.residual;
    rec.entropy_f = relative_entropy(rec.x, P.r()) + P.c().dot(rec.x);
    rec.iterations = rep.iterations();
    rec.status = rep.status;
    out.all_converged = out.all_converged && rep.converged();
    if (rep.converged()) prev = rep.z_final;
    out.records.push_back(std::move(rec));
  }

  const double slack = 10.0 * opt.solver.eps;
  for (std::size_t i = 1; i < out.records.size(); ++i) {
    const PathRecord& a = out.records[i - 1];
    const PathRecord& b = out.records[i];
    if (b.data_fit_h > a.data_fit_h + slack) out.h_nonincreasing = false;
    if (b.entropy_f < a.entropy_f - slack) out.f_nondecreasing = false;
  }
  return out;
}

/// Log-spaced descending grid from `from` to `to` with `points` entries.
inline std::vector<double> log_grid(double from, double to, int points) {
  if (!(from > 0.0 && to > 0.0)) throw ValidationError("grid", "endpoints must be positive");
  if (points < 1) throw ValidationError("points", "must be positive");
  if (points == 1) return {from};
  std::vector<double> g(static_cast<std::size_t>(points));
  const double la = std::log10(from);
  const double lb = std::log10(to);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, la + (lb - la) * i / (points - 1));
  return g;
}

}  // namespace scaleshape
