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
 * \file certificates.hpp
 * \brief Computable constants for the damped Newton iteration on rho = ||F||.
 *
 * Lambert-W brackets on tau and ||y|| over the level set {rho <= beta}, Jacobian
 * norm/inverse bounds on tau-strips, the Lipschitz constant of DF, direction and
 * residual ceilings, and the global contraction factor nu with the
 * iteration-count bounds derived from it.
 *
 * The chain compounds exponentially (tau_max grows like e^beta), so every
 * quantity that can leave double range is carried as a natural log alongside
 * its plain value; the plain value is +inf or 0 when it does. nu is carried as
 * log(1 - nu).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "scaleshape/errors.hpp"
#include "scaleshape/problem.hpp"
#include "scaleshape/scalar_kernels.hpp"

namespace scaleshape {

inline constexpr double kDefaultTauFloor = 1e-16;

namespace detail {

/// log(sum exp(l_i)) over finite or -inf terms.
inline double log_sum(std::initializer_list<double> logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double l : logs) m = std::max(m, l);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

inline double log_of(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

/// log W(e^L) for any finite L.
inline double log_lambert_w_of_exp(double L) {
  if (L < -600.0) return L;  // W(x) = x (1 - x + ...)
  return std::log(lambert_w_of_exp(L));
}

}  // namespace detail

struct LevelSetBounds {
  double beta = 0.0;
  double theta = 0.0;
  double B = 0.0;
  double zeta = 0.0;
  double tau_max_bound = 0.0;
  double tau_min_bound = 0.0;
  double y_max_bound = 0.0;
  double log_B = 0.0;
  double log_tau_max_bound = 0.0;
  double log_y_max_bound = 0.0;
};

/**
 * Brackets of {rho <= beta}:
 *   tau <= B / W(B e^theta),  tau >= lambda W(zeta) / A_max^2,
 *   ||y|| <= (||b|| + tau_max A_max + beta) / lambda.
 * The lower bound is floored at `tau_floor`; it degenerates to the floor when
 * A_max = 0 or zeta underflows.
 */
inline LevelSetBounds level_bounds(const ProblemData& P, double beta, double tau_floor = kDefaultTauFloor) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("level_bounds: beta must be positive and finite");
  if (!(tau_floor > 0.0)) throw DomainError("level_bounds: tau_floor must be positive");
  const DataConstants& k = P.constants();
  const double lambda = P.lambda();
  LevelSetBounds L;
  L.beta = beta;
  L.theta = 1.0 - beta - k.log_q_onenorm + k.c_min;
  L.log_B = 2.0 * std::log(beta + k.b_norm) - std::log(4.0 * lambda);
  L.B = std::exp(L.log_B);
  L.log_tau_max_bound = L.log_B - detail::log_lambert_w_of_exp(L.log_B + L.theta);
  L.tau_max_bound = std::exp(L.log_tau_max_bound);

  const double log_zeta = 2.0 * std::log(k.A_max) - std::log(lambda) + std::log(k.q_min) - 1.0 - beta - k.c_max -
                          k.A_max * (k.b_norm + beta) / lambda;
  L.zeta = k.A_max > 0.0 ? std::exp(log_zeta) : 0.0;
  double tau_min = 0.0;
  if (k.A_max > 0.0) {
    // lambda W(zeta) / A_max^2, with W(zeta) ~ zeta for tiny zeta.
    tau_min = std::exp(std::log(lambda) + detail::log_lambert_w_of_exp(log_zeta) - 2.0 * std::log(k.A_max));
  }
  L.tau_min_bound = std::max(tau_min, tau_floor);
  L.log_y_max_bound =
      detail::log_sum({detail::log_of(k.b_norm), L.log_tau_max_bound + detail::log_of(k.A_max), std::log(beta)}) -
      std::log(lambda);
  L.y_max_bound = std::exp(L.log_y_max_bound);
  return L;
}

struct StripBounds {
  double L_strip = 0.0;  ///< sup ||DF|| over R^m x [tau_l, tau_u]
  double M_strip = 0.0;  ///< sup ||DF^{-1}|| over R^m x (0, tau_u]
};

/// Jacobian norm and inverse-norm bounds on the strip R^m x [tau_l, tau_u].
inline StripBounds jacobian_strip_bounds(const ProblemData& P, double tau_l, double tau_u) {
  if (!(tau_l > 0.0) || !(tau_l <= tau_u)) {
    throw DomainError("jacobian_strip_bounds: require 0 < tau_l <= tau_u");
  }
  const DataConstants& k = P.constants();
  const double lambda = P.lambda();
  StripBounds s;
  s.L_strip = k.A_max + std::max(lambda + 0.5 * tau_u * k.A_opnorm * k.A_opnorm, 1.0 / tau_l);
  s.M_strip = std::max(1.0 / lambda, tau_u);
  return s;
}

/// Lipschitz constant of DF on R^m x [tau_l, tau_u]:
/// 3 tau_u ||A||^3 + (3/2) ||A||^2 + 1/tau_l^2.
inline double lipschitz_DF_bound(const ProblemData& P, double tau_l, double tau_u) {
  if (!(tau_l > 0.0) || !(tau_l <= tau_u)) throw DomainError("lipschitz_DF_bound: require 0 < tau_l <= tau_u");
  const double a = P.constants().A_opnorm;
  return 3.0 * tau_u * a * a * a + 1.5 * a * a + 1.0 / (tau_l * tau_l);
}

/// log of 6 tau_max ||A||^3 + (3/2) ||A||^2 + 4 / tau_min^2, the bound on the
/// widened strip [tau_min/2, 2 tau_max] of a level set.
inline double log_lipschitz_DF_level_bound(const ProblemData& P, const LevelSetBounds& L) {
  const double a = P.constants().A_opnorm;
  return detail::log_sum({std::log(6.0) + L.log_tau_max_bound + 3.0 * detail::log_of(a),
                          std::log(1.5) + 2.0 * detail::log_of(a),
                          std::log(4.0) - 2.0 * std::log(L.tau_min_bound)});
}

inline double lipschitz_DF_level_bound(const ProblemData& P, const LevelSetBounds& L) {
  return std::exp(log_lipschitz_DF_level_bound(P, L));
}

namespace detail {

inline double log_direction_bound(const ProblemData& P, const LevelSetBounds& L, double eta_bar) {
  return std::max(-std::log(P.lambda()), L.log_tau_max_bound) + std::log1p(eta_bar) + std::log(L.beta);
}

inline double log_residual_ceiling(const ProblemData& P, const LevelSetBounds& L, double log_delta) {
  const DataConstants& k = P.constants();
  const double lambda = P.lambda();
  const double lA = log_of(k.A_max);
  const double fy = log_sum({L.log_tau_max_bound + lA, std::log(lambda) + L.log_y_max_bound, log_of(k.b_norm),
                             std::log(lambda + k.A_max) + log_delta});
  const double ftau = log_sum({0.0, log_of(k.c_inf), lA + log_sum({L.log_y_max_bound, log_delta}),
                               std::max(log_of(std::fabs(std::log(0.5 * L.tau_min_bound))),
                                        log_sum({L.log_tau_max_bound, log_delta})),
                               log_of(std::fabs(k.log_q_onenorm))});
  return log_sum({fy, ftau});
}

}  // namespace detail

/// Bound on ||d|| for inexact Newton directions from {rho <= beta}:
/// max(1/lambda, tau_max) (1 + eta_bar) beta.
inline double direction_bound(const ProblemData& P, double beta, double eta_bar,
                              double tau_floor = kDefaultTauFloor) {
  if (!(eta_bar >= 0.0 && eta_bar < 1.0)) throw DomainError("direction_bound: eta_bar must lie in [0, 1)");
  return std::exp(detail::log_direction_bound(P, level_bounds(P, beta, tau_floor), eta_bar));
}

/// Ceiling on rho(z + s) for z in {rho <= beta}, ||s|| <= delta and the tau
/// safeguard respected.
inline double residual_ceiling(const ProblemData& P, double beta, double delta, double tau_floor = kDefaultTauFloor) {
  if (!(delta >= 0.0)) throw DomainError("residual_ceiling: delta must be nonnegative");
  return std::exp(detail::log_residual_ceiling(P, level_bounds(P, beta, tau_floor), detail::log_of(delta)));
}

/// Parameters of the iteration the certificate describes.
struct CertificateParams {
  double mu = 0.49;
  double gamma = 0.5;
  double eta_bar = 0.0;
  double beta_factor = 1.5;
  double tau_floor = kDefaultTauFloor;
};

struct RateCertificate {
  double rho0 = 0.0;        ///< rho(z0)
  double beta = 0.0;        ///< level, beta_factor * rho0
  LevelSetBounds level;     ///< brackets at beta
  double beta_hat = 0.0;    ///< residual ceiling rho_max(beta, d_max)
  LevelSetBounds level_hat; ///< brackets at beta_hat
  double L_strip = 0.0;     ///< sup ||DF|| on [tau_min/2, 2 tau_max]
  double M_strip = 0.0;     ///< max(1/lambda, 2 tau_max)
  double L_D = 0.0;         ///< Lipschitz constant of DF on the beta_hat strip
  double d_max = 0.0;
  double rho_max = 0.0;
  double alpha_hat = 0.0;
  double eta_hat = 0.0;
  double alpha_star = 0.0;
  double alpha_hat_star = 0.0;
  double nu_hat = 0.0;      ///< rounds to 1 whenever nu_gap < 2^-53
  double nu_gap = 0.0;      ///< 1 - nu_hat; 0 only if it underflows
  double K_dist = 0.0;
  // Natural logs of the quantities above that can leave double range.
  double log_d_max = 0.0;
  double log_rho_max = 0.0;
  double log_L_D = 0.0;
  double log_M_strip = 0.0;
  double log_alpha_star = 0.0;
  double log_alpha_hat_star = 0.0;
  double log_nu_gap = 0.0;
  double log_K_dist = 0.0;

  /// log(1/nu_hat).
  double log_inv_nu() const { return -std::log1p(-nu_gap); }

  /// log of the iteration count after which rho <= eps is guaranteed.
  double log_iters_to_eps(double eps) const {
    if (eps >= rho0) return -std::numeric_limits<double>::infinity();
    if (!(eps > 0.0)) return std::numeric_limits<double>::infinity();
    const double num = std::log(std::log(rho0 / eps));
    // log(1/nu) = gap (1 + gap/2 + ...); use the exact form while it is representable.
    return nu_gap > 1e-8 ? num - std::log(log_inv_nu()) : num - log_nu_gap;
  }

  /// Iterations after which rho <= eps is guaranteed (+inf if not representable).
  double iters_to_eps(double eps) const {
    if (eps >= rho0) return 0.0;
    return std::ceil(std::exp(log_iters_to_eps(eps)));
  }

  /// Iterations after which ||z^{k+1} - z*|| <= eps is guaranteed.
  double iters_to_dist(double eps) const {
    if (!(eps > 0.0)) return std::numeric_limits<double>::infinity();
    const double num = log_K_dist - std::log(eps);
    if (num <= 0.0) return 0.0;
    return std::ceil(std::exp(std::log(num) - (nu_gap > 1e-8 ? std::log(log_inv_nu()) : log_nu_gap)));
  }

  /// rho_next <= nu_hat rho_prev, evaluated as rho_prev - rho_next >= gap rho_prev.
  bool contracts(double rho_prev, double rho_next) const {
    return rho_prev - rho_next >= std::exp(log_nu_gap + std::log(rho_prev));
  }
};

/**
 * Assembles the full constant chain for a run started at a point with merit
 * rho0 > 0. The alpha_hat reported is the conservative branch
 * min(1, tau_min / (2 d_max)).
 */
inline RateCertificate rate_certificate(const ProblemData& P, const CertificateParams& cfg, double rho0) {
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw DomainError("rate_certificate: rho(z0) must be positive and finite");
  if (!(cfg.beta_factor > 1.0)) throw DomainError("rate_certificate: beta_factor must exceed 1");
  if (!(cfg.mu > 0.0 && cfg.mu < 1.0) || !(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw DomainError("rate_certificate: mu and gamma must lie in (0, 1)");
  }
  if (!(cfg.eta_bar >= 0.0 && cfg.eta_bar < 1.0)) throw DomainError("rate_certificate: eta_bar must lie in [0, 1)");
  const double lambda = P.lambda();
  RateCertificate c;
  c.rho0 = rho0;
  c.beta = cfg.beta_factor * rho0;
  c.level = level_bounds(P, c.beta, cfg.tau_floor);

  const StripBounds strip = jacobian_strip_bounds(P, 0.5 * c.level.tau_min_bound, 2.0 * c.level.tau_max_bound);
  c.L_strip = strip.L_strip;
  c.log_M_strip = std::max(-std::log(lambda), std::log(2.0) + c.level.log_tau_max_bound);
  c.M_strip = std::exp(c.log_M_strip);

  c.log_d_max = detail::log_direction_bound(P, c.level, cfg.eta_bar);
  c.d_max = std::exp(c.log_d_max);
  c.log_rho_max = detail::log_residual_ceiling(P, c.level, c.log_d_max);
  c.rho_max = std::exp(c.log_rho_max);
  c.beta_hat = c.rho_max;
  if (!std::isfinite(c.beta_hat)) {
    throw InternalConsistencyError("rate_certificate: residual ceiling exceeds double range");
  }
  c.level_hat = level_bounds(P, c.beta_hat, cfg.tau_floor);
  c.log_L_D = log_lipschitz_DF_level_bound(P, c.level_hat);
  c.L_D = std::exp(c.log_L_D);

  const double log_alpha_hat = std::min(0.0, std::log(c.level.tau_min_bound) - std::log(2.0) - c.log_d_max);
  c.alpha_hat = std::exp(log_alpha_hat);
  const double log_one_minus_eta_hat = std::log1p(-cfg.eta_bar) + log_alpha_hat;
  c.eta_hat = -std::expm1(log_one_minus_eta_hat);
  c.log_alpha_star = std::log1p(-cfg.mu) + std::log1p(-cfg.eta_bar) -
                     detail::log_sum({0.0, std::log(2.0) + c.log_L_D + 2.0 * c.log_M_strip + std::log(c.beta)});
  c.alpha_star = std::exp(c.log_alpha_star);
  c.log_alpha_hat_star = std::min(log_alpha_hat, std::log(cfg.gamma) + c.log_alpha_star);
  c.alpha_hat_star = std::exp(c.log_alpha_hat_star);
  c.log_nu_gap = std::log(cfg.mu) + c.log_alpha_hat_star + log_one_minus_eta_hat;
  c.nu_gap = std::exp(c.log_nu_gap);
  c.nu_hat = 1.0 - c.nu_gap;
  if (!std::isfinite(c.log_nu_gap) || !(c.log_nu_gap < 0.0)) {
    throw InternalConsistencyError("rate_certificate: contraction factor outside (0, 1)");
  }
  if (!(c.log_alpha_hat_star <= 0.0) || !(log_one_minus_eta_hat > -std::numeric_limits<double>::infinity())) {
    throw InternalConsistencyError("rate_certificate: step-size constants out of range");
  }
  c.log_K_dist = std::max(-std::log(lambda), c.level.log_tau_max_bound) + std::log1p(cfg.eta_bar) + std::log(rho0) -
                 c.log_nu_gap;
  c.K_dist = std::exp(c.log_K_dist);
  return c;
}

}  // namespace scaleshape
