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
 * \file solver.hpp
 * \brief Damped inexact Newton on the scale-shape dual, its fixed-scale
 * specialization, and the classical dual Newton comparator.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scaleshape/certificates.hpp"
#include "scaleshape/dual_system.hpp"
#include "scaleshape/errors.hpp"
#include "scaleshape/linear_solve.hpp"
#include "scaleshape/problem.hpp"

namespace scaleshape {

/// Forcing sequence eta_k for the inexact Newton condition
/// ||F + DF d|| <= eta_k ||F||.
struct EtaSchedule {
  enum class Kind { Exact, Constant, Power };
  Kind kind = Kind::Exact;
  double value = 0.0;  ///< constant c, or exponent p

  static EtaSchedule exact() { return {}; }
  static EtaSchedule constant(double c) { return {Kind::Constant, c}; }
  static EtaSchedule power(double p) { return {Kind::Power, p}; }

  /// Parses "exact", "const:<c>" or "power:<p>".
  static EtaSchedule parse(const std::string& text) {
    if (text == "exact") return exact();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("eta", "expected exact, const:<c> or power:<p>");
    const std::string head = text.substr(0, colon);
    double v = 0.0;
    try {
      v = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("eta", "could not parse number in '" + text + "'");
    }
    if (head == "const") return constant(v);
    if (head == "power") return power(v);
    throw ValidationError("eta", "unknown schedule '" + head + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Exact: return "exact";
      case Kind::Constant: return "const:" + std::to_string(value);
      case Kind::Power: return "power:" + std::to_string(value);
    }
    return "exact";
  }
};

struct SolverConfig {
  double mu = 0.49;
  double gamma = 0.5;
  EtaSchedule eta = EtaSchedule::exact();
  double eta_bar = 0.5;  ///< cap for power schedules
  double beta_factor = 1.5;
  double eps = 1e-8;
  int max_iter = 300;
  double tau_floor = kDefaultTauFloor;
  int max_backtracks = 60;
  bool store_iterates = false;

  /// Upper bound on every eta_k the schedule can produce.
  double effective_eta_bar() const {
    switch (eta.kind) {
      case EtaSchedule::Kind::Exact: return 0.0;
      case EtaSchedule::Kind::Constant: return eta.value;
      case EtaSchedule::Kind::Power: return eta_bar;
    }
    return eta_bar;
  }

  double eta_at(double rho) const {
    switch (eta.kind) {
      case EtaSchedule::Kind::Exact: return 0.0;
      case EtaSchedule::Kind::Constant: return eta.value;
      case EtaSchedule::Kind::Power: return std::min(eta_bar, std::pow(rho, eta.value));
    }
    return 0.0;
  }

  CertificateParams certificate_params() const {
    return CertificateParams{mu, gamma, effective_eta_bar(), beta_factor, tau_floor};
  }

  void validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("mu", "must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma", "must lie in (0, 1)");
    if (!(eta_bar >= 0.0 && eta_bar < 1.0)) throw ValidationError("eta_bar", "must lie in [0, 1)");
    if (eta.kind == EtaSchedule::Kind::Constant && !(eta.value >= 0.0 && eta.value < 1.0)) {
      throw ValidationError("eta", "constant forcing term must lie in [0, 1)");
    }
    if (eta.kind == EtaSchedule::Kind::Power && !(eta.value > 0.0)) {
      throw ValidationError("eta", "power exponent must be positive");
    }
    if (!(beta_factor > 1.0)) throw ValidationError("beta_factor", "must exceed 1");
    if (!(eps >= 0.0)) throw ValidationError("eps", "must be nonnegative");
    if (max_iter < 1) throw ValidationError("max_iter", "must be positive");
    if (!(tau_floor > 0.0)) throw ValidationError("tau_floor", "must be positive");
  }
};

struct IterationRecord {
  int k = 0;
  double rho = 0.0;
  double alpha = 0.0;
  double alpha_bar = 0.0;
  int backtracks = 0;
  double tau = 0.0;
  double eta_k = 0.0;
  double max_exponent = 0.0;
  // Diagnostics beyond the trace CSV.
  double step_norm = 0.0;         ///< ||d^k||
  double y_norm = 0.0;            ///< ||y^k||
  double linear_residual = 0.0;   ///< ||F + DF d|| / ||F||
  int safeguard_halvings = 0;     ///< classical comparator only
};

enum class SolveStatus { Converged, MaxIters, LineSearchFailure, Overflow };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::LineSearchFailure: return "line_search_failure";
    case SolveStatus::Overflow: return "overflow";
  }
  return "unknown";
}

/**
 * Outcome of a run. The trace holds one record per Newton iteration followed
 * by a terminal record (alpha = 0) for the returned iterate, so
 * trace.back().rho is always the final merit.
 */
struct SolveReport {
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<IterationRecord> trace;
  DualPoint z_final;
  Eigen::VectorXd x_final;
  std::optional<RateCertificate> certificate;
  std::string certificate_error;
  double tau_hat_min = 0.0;             ///< tau safeguard estimate in use
  std::vector<DualPoint> iterates;      ///< z^0..z^K when store_iterates is set

  int iterations() const { return trace.empty() ? 0 : static_cast<int>(trace.size()) - 1; }
  double final_rho() const { return trace.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.back().rho; }
  bool converged() const { return status == SolveStatus::Converged; }
};

/// Certificate for a run started at z0.
inline RateCertificate rate_certificate(const ProblemData& P, const CertificateParams& cfg, const DualPoint& z0) {
  return rate_certificate(P, cfg, merit(z0, P));
}

namespace detail {

inline IterationRecord terminal_record(int k, double rho, double tau, double y_norm, double max_exponent) {
  IterationRecord rec;
  rec.k = k;
  rec.rho = rho;
  rec.tau = tau;
  rec.y_norm = y_norm;
  rec.max_exponent = max_exponent;
  return rec;
}

}  // namespace detail

/**
 * Damped inexact Newton with tau safeguard and nonsmooth backtracking.
 *
 * Per iteration: solve DF d = -F to the forcing tolerance, shorten to
 * alpha_bar so that tau + alpha_bar dtau >= tau_hat_min / 2, then backtrack
 * alpha = alpha_bar gamma^l until
 *   rho(z + alpha d) <= rho(z) + mu alpha (eta_k - 1) rho(z).
 * tau_hat_min is the level-set lower bound at beta = beta_factor * rho(z0).
 */
inline SolveReport solve(const ProblemData& P, const SolverConfig& cfg, DualPoint z) {
  cfg.validate();
  detail::check_point(z, P, "solve");
  const Eigen::Index m = P.m();

  SolveReport rep;
  SystemEval e = eval_F(z, P);
  if (!std::isfinite(e.rho)) throw DomainError("solve: F(z0) is not finite");
  const double rho0 = e.rho;
  if (rho0 > 0.0) {
    try {
      rep.certificate = rate_certificate(P, cfg.certificate_params(), rho0);
    } catch (const InternalConsistencyError& ex) {
      rep.certificate_error = ex.what();
    }
    rep.tau_hat_min = level_bounds(P, cfg.beta_factor * rho0, cfg.tau_floor).tau_min_bound;
  } else {
    rep.tau_hat_min = cfg.tau_floor;
  }
  if (cfg.store_iterates) rep.iterates.push_back(z);

  rep.status = SolveStatus::MaxIters;
  int k = 0;
  if (e.rho <= cfg.eps) {
    rep.status = SolveStatus::Converged;
  } else {
    for (; k < cfg.max_iter; ++k) {
      const JacobianEval J = eval_DF(z, P);
      const double eta_k = cfg.eta_at(e.rho);
      const Eigen::VectorXd F = e.stacked();
      const LinearSolveResult lin = solve_forced(J.DF, -F, eta_k);
      const Eigen::VectorXd& d = lin.x;
      const double dtau = d[m];

      const double half_floor = 0.5 * rep.tau_hat_min;
      const double alpha_bar = (z.tau + dtau >= half_floor) ? 1.0 : (half_floor - z.tau) / dtau;

      IterationRecord rec;
      rec.k = k;
      rec.rho = e.rho;
      rec.alpha_bar = alpha_bar;
      rec.tau = z.tau;
      rec.eta_k = eta_k;
      rec.step_norm = d.norm();
      rec.y_norm = z.y.norm();
      rec.linear_residual = lin.residual / e.rho;
      rec.max_exponent = std::max(e.max_exponent, J.max_exponent);

      bool accepted = false;
      DualPoint trial;
      SystemEval e_trial;
      double alpha = alpha_bar;
      int l = 0;
      for (; l <= cfg.max_backtracks; ++l) {
        trial.y = z.y + alpha * d.head(m);
        trial.tau = z.tau + alpha * dtau;
        if (trial.tau > 0.0) {
          e_trial = eval_F(trial, P);
          rec.max_exponent = std::max(rec.max_exponent, e_trial.max_exponent);
          if (e_trial.rho <= e.rho + cfg.mu * alpha * (eta_k - 1.0) * e.rho) {
            accepted = true;
            break;
          }
        }
        alpha *= cfg.gamma;
      }
      if (!accepted) {
        rec.alpha = 0.0;
        rec.backtracks = cfg.max_backtracks;
        rep.trace.push_back(rec);
        rep.status = SolveStatus::LineSearchFailure;
        ++k;
        break;
      }
      rec.alpha = alpha;
      rec.backtracks = l;
      rep.trace.push_back(rec);

      z = std::move(trial);
      e = std::move(e_trial);
      if (cfg.store_iterates) rep.iterates.push_back(z);
      if (e.rho <= cfg.eps) {
        rep.status = SolveStatus::Converged;
        ++k;
        break;
      }
    }
  }
  rep.trace.push_back(detail::terminal_record(k, e.rho, z.tau, z.y.norm(), e.max_exponent));
  rep.x_final = z.tau * e.p;
  rep.z_final = std::move(z);
  return rep;
}

/// Default start y = 0, tau = tau0.
inline SolveReport solve(const ProblemData& P, const SolverConfig& cfg, double tau0 = 1.0) {
  return solve(P, cfg, DualPoint{Eigen::VectorXd::Zero(P.m()), tau0});
}

/**
 * Damped Newton on Fbar(y) = b - lambda y - tau_fixed A p(y) with the same
 * acceptance rule; the scale is never updated, so there is no provisional
 * step. Minimizes the primal over the scaled simplex tau_fixed * Delta_n.
 */
inline SolveReport solve_fixed_scale(const ProblemData& P, double tau_fixed, const SolverConfig& cfg,
                                     Eigen::VectorXd y) {
  cfg.validate();
  if (!(tau_fixed > 0.0) || !std::isfinite(tau_fixed)) throw DomainError("solve_fixed_scale: tau must be positive");
  detail::check_point(DualPoint{y, tau_fixed}, P, "solve_fixed_scale");

  SolveReport rep;
  FixedScaleEval e = eval_fixed_scale(y, tau_fixed, P);
  if (!std::isfinite(e.rho)) throw DomainError("solve_fixed_scale: F(y0) is not finite");
  rep.tau_hat_min = tau_fixed;
  if (cfg.store_iterates) rep.iterates.push_back(DualPoint{y, tau_fixed});

  rep.status = SolveStatus::MaxIters;
  int k = 0;
  if (e.rho <= cfg.eps) {
    rep.status = SolveStatus::Converged;
  } else {
    for (; k < cfg.max_iter; ++k) {
      const Eigen::MatrixXd H = eval_fixed_scale_jacobian(y, tau_fixed, P);
      const double eta_k = cfg.eta_at(e.rho);
      const LinearSolveResult lin = solve_forced(H, -e.F, eta_k);
      const Eigen::VectorXd& d = lin.x;

      IterationRecord rec;
      rec.k = k;
      rec.rho = e.rho;
      rec.alpha_bar = 1.0;
      rec.tau = tau_fixed;
      rec.eta_k = eta_k;
      rec.step_norm = d.norm();
      rec.y_norm = y.norm();
      rec.linear_residual = lin.residual / e.rho;
      rec.max_exponent = e.max_exponent;

      bool accepted = false;
      Eigen::VectorXd trial;
      FixedScaleEval e_trial;
      double alpha = 1.0;
      int l = 0;
      for (; l <= cfg.max_backtracks; ++l) {
        trial = y + alpha * d;
        e_trial = eval_fixed_scale(trial, tau_fixed, P);
        rec.max_exponent = std::max(rec.max_exponent, e_trial.max_exponent);
        if (e_trial.rho <= e.rho + cfg.mu * alpha * (eta_k - 1.0) * e.rho) {
          accepted = true;
          break;
        }
        alpha *= cfg.gamma;
      }
      if (!accepted) {
        rec.backtracks = cfg.max_backtracks;
        rep.trace.push_back(rec);
        rep.status = SolveStatus::LineSearchFailure;
        ++k;
        break;
      }
      rec.alpha = alpha;
      rec.backtracks = l;
      rep.trace.push_back(rec);
      y = std::move(trial);
      e = std::move(e_trial);
      if (cfg.store_iterates) rep.iterates.push_back(DualPoint{y, tau_fixed});
      if (e.rho <= cfg.eps) {
        rep.status = SolveStatus::Converged;
        ++k;
        break;
      }
    }
  }
  rep.trace.push_back(detail::terminal_record(k, e.rho, tau_fixed, y.norm(), e.max_exponent));
  rep.x_final = tau_fixed * e.p;
  rep.z_final = DualPoint{std::move(y), tau_fixed};
  return rep;
}

/**
 * Newton's method on the classical dual gradient b - lambda y - A x(y),
 * x(y) = q .* exp(A^T y - 1 - c), with Armijo backtracking on ||grad|| and an
 * overflow safeguard that halves the step while the trial exponent exceeds
 * log(DBL_MAX). Each record's max_exponent is the exponent the unsafeguarded
 * full step would have produced. More than max_backtracks safeguard halvings
 * yields SolveStatus::Overflow.
 */
inline SolveReport solve_classical(const ProblemData& P, const SolverConfig& cfg, Eigen::VectorXd y) {
  cfg.validate();
  if (y.size() != P.m()) throw ContractError("solve_classical: y has the wrong length");
  const Eigen::Index m = P.m();
  const Eigen::VectorXd shift = P.r().values() - P.c() - Eigen::VectorXd::Ones(P.n());
  auto exponent_at = [&](const Eigen::VectorXd& yy) { return (P.A().transpose() * yy + shift).maxCoeff(); };

  SolveReport rep;
  ClassicalGradient g = classical_dual_gradient(y, P);
  double gnorm = g.grad.norm();
  if (!std::isfinite(gnorm)) throw DomainError("solve_classical: gradient at y0 is not finite");
  if (cfg.store_iterates) rep.iterates.push_back(DualPoint{y, g.x.sum()});

  rep.status = SolveStatus::MaxIters;
  int k = 0;
  if (gnorm <= cfg.eps) {
    rep.status = SolveStatus::Converged;
  } else {
    for (; k < cfg.max_iter; ++k) {
      // -Hessian = lambda I + A Diag(x) A^T, symmetric positive definite.
      const Eigen::MatrixXd Ax = P.A() * g.x.cwiseSqrt().asDiagonal();
      Eigen::MatrixXd K = Ax * Ax.transpose();
      K.diagonal().array() += P.lambda();
      Eigen::VectorXd dy;
      const Eigen::LLT<Eigen::MatrixXd> llt(K);
      if (llt.info() == Eigen::Success) {
        dy = llt.solve(g.grad);
      } else {
        dy = solve_symmetric_direct(K, g.grad).x;
      }

      IterationRecord rec;
      rec.k = k;
      rec.rho = gnorm;
      rec.tau = g.x.sum();
      rec.step_norm = dy.norm();
      rec.y_norm = y.norm();
      rec.max_exponent = exponent_at(y + dy);

      double alpha = 1.0;
      int halvings = 0;
      while (exponent_at(y + alpha * dy) > kLogMaxDouble && halvings <= cfg.max_backtracks) {
        alpha *= 0.5;
        ++halvings;
      }
      rec.safeguard_halvings = halvings;
      rec.alpha_bar = alpha;
      if (halvings > cfg.max_backtracks) {
        rep.trace.push_back(rec);
        rep.status = SolveStatus::Overflow;
        ++k;
        break;
      }

      bool accepted = false;
      Eigen::VectorXd trial;
      ClassicalGradient g_trial;
      double trial_norm = 0.0;
      int l = 0;
      for (; l <= cfg.max_backtracks; ++l) {
        trial = y + alpha * dy;
        g_trial = classical_dual_gradient(trial, P);
        trial_norm = g_trial.grad.norm();
        if (std::isfinite(trial_norm) && trial_norm <= (1.0 - cfg.mu * alpha) * gnorm) {
          accepted = true;
          break;
        }
        alpha *= cfg.gamma;
      }
      if (!accepted) {
        rec.backtracks = cfg.max_backtracks;
        rep.trace.push_back(rec);
        rep.status = SolveStatus::LineSearchFailure;
        ++k;
        break;
      }
      rec.alpha = alpha;
      rec.backtracks = l;
      rep.trace.push_back(rec);
      y = std::move(trial);
      g = std::move(g_trial);
      gnorm = trial_norm;
      if (cfg.store_iterates) rep.iterates.push_back(DualPoint{y, g.x.sum()});
      if (gnorm <= cfg.eps) {
        rep.status = SolveStatus::Converged;
        ++k;
        break;
      }
    }
  }
  (void)m;
  const double tau = g.x.sum();
  rep.trace.push_back(detail::terminal_record(k, gnorm, tau, y.norm(), exponent_at(y)));
  rep.x_final = g.x;
  rep.z_final = DualPoint{std::move(y), tau};
  return rep;
}

}  // namespace scaleshape
