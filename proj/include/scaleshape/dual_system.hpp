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
 * \file dual_system.hpp
 * \brief Scale-shape dual: objective, first-order system F, Jacobian DF,
 * merit rho = ||F||_2, primal recovery, and the classical dual used by the
 * comparator.
 *
 * With u(y) = A^T y - c and p(y) the weighted softmax of u,
 *
 *   phi(y, tau) = <b, y> - (lambda/2) ||y||^2 - tau * lse_r(u) + tau log tau
 *   F_y         = b - lambda y - tau A p(y)
 *   F_tau       = -lse_r(u) + log tau + 1
 *   DF          = [ -lambda I - tau A S A^T   -A p ]
 *                 [ -(A p)^T                  1/tau ],   S = Diag(p) - p p^T.
 *
 * All exponentials are max-shifted; none of these evaluations exponentiates a
 * positive argument.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "scaleshape/errors.hpp"
#include "scaleshape/problem.hpp"
#include "scaleshape/scalar_kernels.hpp"

namespace scaleshape {

/// Solver state z = (y, tau), tau > 0.
struct DualPoint {
  Eigen::VectorXd y;
  double tau = 1.0;

  Eigen::Index dim() const noexcept { return y.size() + 1; }

  /// Concatenated (y, tau) as an (m+1)-vector.
  Eigen::VectorXd stacked() const {
    Eigen::VectorXd z(y.size() + 1);
    z << y, tau;
    return z;
  }

  static DualPoint from_stacked(const Eigen::Ref<const Eigen::VectorXd>& z) {
    return DualPoint{z.head(z.size() - 1), z[z.size() - 1]};
  }
};

struct SystemEval {
  Eigen::VectorXd F_y;
  double F_tau = 0.0;
  double rho = 0.0;
  Eigen::VectorXd p;
  double logexp = 0.0;
  double max_exponent = 0.0;

  Eigen::VectorXd stacked() const {
    Eigen::VectorXd F(F_y.size() + 1);
    F << F_y, F_tau;
    return F;
  }
};

struct JacobianEval {
  Eigen::MatrixXd DF;
  double max_exponent = 0.0;
};

namespace detail {

inline void check_point(const DualPoint& z, const ProblemData& P, const char* who) {
  if (z.y.size() != P.m()) {
    throw ContractError(std::string(who) + ": y has length " + std::to_string(z.y.size()) + ", expected " +
                        std::to_string(P.m()));
  }
  if (!std::isfinite(z.tau) || !(z.tau > 0.0)) {
    throw DomainError(std::string(who) + ": tau must be finite and positive");
  }
  for (Eigen::Index i = 0; i < z.y.size(); ++i) {
    if (!std::isfinite(z.y[i])) throw DomainError(std::string(who) + ": y is not finite");
  }
}

inline WeightedSoftmax shape_at(const Eigen::Ref<const Eigen::VectorXd>& y, const ProblemData& P) {
  const Eigen::VectorXd u = P.A().transpose() * y - P.c();
  return softmax_lse(u, P.r());
}

// -lambda I - tau (A Diag(p) A^T - (Ap)(Ap)^T), assembled from B = A Diag(p)^{1/2}.
inline Eigen::MatrixXd hessian_block(const ProblemData& P, const Eigen::VectorXd& p, const Eigen::VectorXd& Ap,
                                     double tau) {
  const Eigen::MatrixXd B = P.A() * p.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd H(P.m(), P.m());
  H.setZero();
  H.selfadjointView<Eigen::Lower>().rankUpdate(B, -tau);
  H.selfadjointView<Eigen::Lower>().rankUpdate(Ap, tau);
  H.diagonal().array() -= P.lambda();
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return H;
}

}  // namespace detail

/// F(z) and the merit rho(z) = ||F(z)||_2.
inline SystemEval eval_F(const DualPoint& z, const ProblemData& P) {
  detail::check_point(z, P, "eval_F");
  WeightedSoftmax sm = detail::shape_at(z.y, P);
  SystemEval e;
  e.F_y = P.b() - P.lambda() * z.y - z.tau * (P.A() * sm.p);
  e.F_tau = -sm.logsumexp + std::log(z.tau) + 1.0;
  e.rho = std::sqrt(e.F_y.squaredNorm() + e.F_tau * e.F_tau);
  e.logexp = sm.logsumexp;
  e.max_exponent = sm.max_argument;
  e.p = std::move(sm.p);
  return e;
}

/// rho(z); +inf when tau <= 0.
inline double merit(const DualPoint& z, const ProblemData& P) {
  if (!(z.tau > 0.0)) return std::numeric_limits<double>::infinity();
  return eval_F(z, P).rho;
}

/// The (m+1)x(m+1) symmetric Jacobian DF(z).
inline JacobianEval eval_DF(const DualPoint& z, const ProblemData& P) {
  detail::check_point(z, P, "eval_DF");
  const WeightedSoftmax sm = detail::shape_at(z.y, P);
  const Eigen::Index m = P.m();
  const Eigen::VectorXd Ap = P.A() * sm.p;
  JacobianEval J;
  J.DF.resize(m + 1, m + 1);
  J.DF.topLeftCorner(m, m) = detail::hessian_block(P, sm.p, Ap, z.tau);
  J.DF.topRightCorner(m, 1) = -Ap;
  J.DF.bottomLeftCorner(1, m) = -Ap.transpose();
  J.DF(m, m) = 1.0 / z.tau;
  J.max_exponent = sm.max_argument;
  return J;
}

/// Scale-shape dual objective phi_d(y, tau).
inline double dual_objective(const DualPoint& z, const ProblemData& P) {
  detail::check_point(z, P, "dual_objective");
  const Eigen::VectorXd u = P.A().transpose() * z.y - P.c();
  const double lse = logsumexp_w(u, P.r());
  return P.b().dot(z.y) - 0.5 * P.lambda() * z.y.squaredNorm() - z.tau * lse + z.tau * std::log(z.tau);
}

/// x = tau * p(y).
inline Eigen::VectorXd primal_from_dual(const DualPoint& z, const ProblemData& P) {
  detail::check_point(z, P, "primal_from_dual");
  return z.tau * detail::shape_at(z.y, P).p;
}

// ---------------------------------------------------------------------------
// Fixed-scale system  Fbar(y) = b - lambda y - tau A p(y)
// ---------------------------------------------------------------------------

struct FixedScaleEval {
  Eigen::VectorXd F;
  double rho = 0.0;
  Eigen::VectorXd p;
  double max_exponent = 0.0;
};

inline FixedScaleEval eval_fixed_scale(const Eigen::Ref<const Eigen::VectorXd>& y, double tau, const ProblemData& P) {
  detail::check_point(DualPoint{y, tau}, P, "eval_fixed_scale");
  WeightedSoftmax sm = detail::shape_at(y, P);
  FixedScaleEval e;
  e.F = P.b() - P.lambda() * y - tau * (P.A() * sm.p);
  e.rho = e.F.norm();
  e.max_exponent = sm.max_argument;
  e.p = std::move(sm.p);
  return e;
}

/// Jacobian of the fixed-scale system, -lambda I - tau A S(y) A^T.
inline Eigen::MatrixXd eval_fixed_scale_jacobian(const Eigen::Ref<const Eigen::VectorXd>& y, double tau,
                                                 const ProblemData& P) {
  const WeightedSoftmax sm = detail::shape_at(y, P);
  return detail::hessian_block(P, sm.p, P.A() * sm.p, tau);
}

// ---------------------------------------------------------------------------
// Classical dual  psi_d(y) = <b,y> - (lambda/2)||y||^2 - <q, exp(A^T y - 1 - c)>
// ---------------------------------------------------------------------------

struct ClassicalGradient {
  Eigen::VectorXd grad;
  double max_exponent = 0.0;  ///< max_j (r_j + (A^T y)_j - 1 - c_j), taken before exponentiation
  Eigen::VectorXd x;          ///< q .* exp(A^T y - 1 - c), may hold +inf
};

/**
 * Gradient of the classical dual using bare exponentials, exactly as a
 * textbook implementation would. Nothing is shifted: an exponent above ~709.78
 * saturates to +inf and the caller sees a non-finite gradient.
 */
inline ClassicalGradient classical_dual_gradient(const Eigen::Ref<const Eigen::VectorXd>& y, const ProblemData& P) {
  const Eigen::VectorXd arg = (P.A().transpose() * y - P.c()).array() - 1.0 + P.r().values().array();
  ClassicalGradient g;
  g.max_exponent = arg.maxCoeff();
  g.x = arg.array().exp().matrix();
  g.grad = P.b() - P.lambda() * y - P.A() * g.x;
  return g;
}

inline double classical_dual_objective(const Eigen::Ref<const Eigen::VectorXd>& y, const ProblemData& P) {
  const Eigen::VectorXd arg = (P.A().transpose() * y - P.c()).array() - 1.0 + P.r().values().array();
  return P.b().dot(y) - 0.5 * P.lambda() * y.squaredNorm() - arg.array().exp().sum();
}

/// Largest finite double's natural log, ~709.78.
inline const double kLogMaxDouble = std::log(std::numeric_limits<double>::max());

}  // namespace scaleshape
