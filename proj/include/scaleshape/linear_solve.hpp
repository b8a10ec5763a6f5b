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
 * \file linear_solve.hpp
 * \brief Newton-system solves for the dual Jacobian.
 *
 * DF is quasi-definite (negative definite leading block, positive corner), so
 * a symmetric LDL^T factorization exists under any symmetric pivot order. The
 * exact path factorizes once and applies one pass of iterative refinement with
 * the residual accumulated in long double. The inexact path runs MINRES and
 * stops as soon as the true relative residual meets the forcing term.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace scaleshape {

struct LinearSolveResult {
  Eigen::VectorXd x;
  double residual = 0.0;  ///< ||rhs - K x||
  int iterations = 0;     ///< MINRES iterations, 0 for the direct path
  bool direct = true;
};

namespace detail {

// rhs - K x with the dot products accumulated in extended precision.
inline Eigen::VectorXd extended_residual(const Eigen::MatrixXd& K, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& rhs) {
  const Eigen::Index n = K.rows();
  Eigen::VectorXd res(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    long double acc = rhs[i];
    for (Eigen::Index j = 0; j < n; ++j) acc -= static_cast<long double>(K(i, j)) * x[j];
    res[i] = static_cast<double>(acc);
  }
  return res;
}

}  // namespace detail

/// Solves K x = rhs for symmetric nonsingular K by LDL^T plus one refinement step.
inline LinearSolveResult solve_symmetric_direct(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  LinearSolveResult out;
  out.x = ldlt.solve(rhs);
  out.x += ldlt.solve(detail::extended_residual(K, out.x, rhs));
  out.residual = detail::extended_residual(K, out.x, rhs).norm();
  return out;
}

/**
 * MINRES (Paige-Saunders) for symmetric K from x0 = 0. Returns after the
 * recurrence residual drops below `tol`; the reported residual is recomputed
 * from scratch.
 */
inline LinearSolveResult minres(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs, double tol, int max_iter) {
  const Eigen::Index n = rhs.size();
  LinearSolveResult out;
  out.direct = false;
  out.x = Eigen::VectorXd::Zero(n);
  const double beta1 = rhs.norm();
  if (beta1 == 0.0 || beta1 <= tol) {
    out.residual = beta1;
    return out;
  }
  Eigen::VectorXd v_old = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = rhs / beta1;
  Eigen::VectorXd w_old = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double beta = beta1;
  double eta = beta1;
  double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd Kv = K * v;
    const double alpha = v.dot(Kv);
    Kv -= alpha * v + beta * v_old;
    const double beta_new = Kv.norm();
    const double delta = c * alpha - c_old * s * beta;
    const double rho1 = std::hypot(delta, beta_new);
    const double rho2 = s * alpha + c_old * c * beta;
    const double rho3 = s_old * beta;
    if (rho1 == 0.0) break;
    const double c_new = delta / rho1;
    const double s_new = beta_new / rho1;
    Eigen::VectorXd w_new = (v - rho3 * w_old - rho2 * w) / rho1;
    out.x += c_new * eta * w_new;
    eta = -s_new * eta;
    out.iterations = it;
    if (std::fabs(eta) <= tol || beta_new == 0.0) break;
    v_old = std::move(v);
    v = Kv / beta_new;
    beta = beta_new;
    w_old = std::move(w);
    w = std::move(w_new);
    c_old = c;
    c = c_new;
    s_old = s;
    s = s_new;
  }
  out.residual = (rhs - K * out.x).norm();
  return out;
}

/**
 * Inexact solve: ||rhs - K x|| <= eta ||rhs||. eta = 0 (or MINRES failing to
 * get there) falls back to the refined direct factorization.
 */
inline LinearSolveResult solve_forced(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs, double eta) {
  if (eta > 0.0) {
    const double target = eta * rhs.norm();
    LinearSolveResult it = minres(K, rhs, target, 4 * static_cast<int>(rhs.size()) + 20);
    if (it.residual <= target) return it;
  }
  return solve_symmetric_direct(K, rhs);
}

}  // namespace scaleshape
