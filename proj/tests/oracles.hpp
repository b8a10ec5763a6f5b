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

// Independent reference computations used only by the tests: extended
// precision sums, bisection, finite differences, dense SVD and a projected
// gradient solver on the scaled simplex.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "scaleshape/problem.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline long double lse(const VectorXd& u, const VectorXd& r) {
  long double m = -INFINITY;
  for (Eigen::Index j = 0; j < u.size(); ++j) m = std::max(m, static_cast<long double>(u[j]) + r[j]);
  long double s = 0.0L;
  for (Eigen::Index j = 0; j < u.size(); ++j) s += std::exp(static_cast<long double>(u[j]) + r[j] - m);
  return m + std::log(s);
}

inline VectorXd softmax(const VectorXd& u, const VectorXd& r) {
  const long double l = lse(u, r);
  VectorXd p(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    p[j] = static_cast<double>(std::exp(static_cast<long double>(u[j]) + r[j] - l));
  }
  return p;
}

/// Root of w e^w = x on [0, max(x, 1)] by bisection in long double.
inline long double lambert_w(long double x) {
  long double lo = 0.0L, hi = std::max(x, 1.0L);
  for (int it = 0; it < 200; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid * std::exp(mid) < x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

/// Central-difference Jacobian of f: R^k -> R^l.
inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x, double h) {
  const VectorXd f0 = f(x);
  MatrixXd J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double largest_singular_value(const MatrixXd& A) {
  return Eigen::JacobiSVD<MatrixXd>(A).singularValues()[0];
}

inline double smallest_singular_value(const MatrixXd& A) {
  const VectorXd s = Eigen::JacobiSVD<MatrixXd>(A).singularValues();
  return s[s.size() - 1];
}

/// Euclidean projection onto {x >= 0, sum x = tau} (sort-based).
inline VectorXd project_simplex(const VectorXd& v, double tau) {
  VectorXd u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - tau) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

/// argmin 0.5 ||Ax - b||^2 over tau * simplex, by accelerated projected gradient.
inline VectorXd simplex_least_squares(const MatrixXd& A, const VectorXd& b, double tau, int iters = 200000) {
  const double L = std::pow(largest_singular_value(A), 2);
  VectorXd x = VectorXd::Constant(A.cols(), tau / static_cast<double>(A.cols()));
  VectorXd yk = x;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    const VectorXd xn = project_simplex(yk - A.transpose() * (A * yk - b) / L, tau);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = xn + ((t - 1.0) / tn) * (xn - x);
    x = xn;
    t = tn;
  }
  return x;
}

/// Random instance with log-uniform lambda. The data come from a nonnegative
/// signal, b = A x0 + 0.1 noise with x0 uniform on [0.2, 1.2]^n.
inline scaleshape::ProblemData random_instance(std::mt19937_64& rng, int m, int n, double lambda_lo = 1e-3,
                                               double lambda_hi = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  scaleshape::ProblemSpec s;
  s.A.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) s.A(i, j) = normal(rng);
  }
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) x0[j] = 0.2 + unif(rng);
  s.b = s.A * x0;
  for (int i = 0; i < m; ++i) s.b[i] += 0.1 * normal(rng);
  s.c.resize(n);
  s.r.resize(n);
  for (int j = 0; j < n; ++j) {
    s.c[j] = 0.3 * normal(rng);
    s.r[j] = std::log(0.1 + unif(rng));
  }
  s.lambda = std::exp(std::log(lambda_lo) + unif(rng) * (std::log(lambda_hi) - std::log(lambda_lo)));
  return scaleshape::validate(std::move(s));
}

}  // namespace oracle
