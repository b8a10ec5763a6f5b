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
 * \file problem.hpp
 * \brief Problem instances of entropy-regularized least squares
 *
 *   minimize_{x >= 0}  (1/(2 lambda)) ||A x - b||^2 + <c, x> + sum_j x_j log(x_j / q_j)
 *
 * with the reference measure q held exclusively as log-weights r = log q.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "scaleshape/errors.hpp"
#include "scaleshape/scalar_kernels.hpp"

namespace scaleshape {

/// Floor applied to prior entries before renormalization.
inline constexpr double kDefaultPriorFloor = 1e-16;

/// Unchecked problem fields, as read from a file or assembled by a generator.
struct ProblemSpec {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd r;
  double lambda = 0.0;
};

/// Data-dependent constants used by the level-set and Jacobian certificates.
struct DataConstants {
  double c_min = 0.0;
  double c_max = 0.0;
  double c_inf = 0.0;        ///< ||c||_inf
  double A_max = 0.0;        ///< largest column 2-norm of A
  double A_opnorm = 0.0;     ///< ||A||_2, by power iteration
  double q_min = 0.0;        ///< min_j exp(r_j)
  double q_onenorm = 0.0;    ///< sum_j exp(r_j)
  double log_q_onenorm = 0.0;
  double b_norm = 0.0;
};

/// Total mass and simplex shape of a nonnegative vector, x = tau * p.
struct ScaleShape {
  double tau = 0.0;
  Eigen::VectorXd p;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* field) {
  const auto& d = v.derived();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d.data()[i])) {
      throw ValidationError(field, "entry " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace detail

/**
 * Largest singular value of A by power iteration on A^T A.
 *
 * Stops once successive estimates agree to `rel_tol` relative; the
 * Rayleigh-quotient estimate converges quadratically in the iterate's angle.
 */
inline double operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& A, double rel_tol = 1e-12,
                            int max_iter = 100000) {
  const Eigen::Index n = A.cols();
  if (A.size() == 0) return 0.0;
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j % 7);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd Av = A * v;
    Eigen::VectorXd w = A.transpose() * Av;
    const double next = Av.norm();
    const double wn = w.norm();
    if (wn == 0.0) return next;
    v = w / wn;
    if (std::fabs(next - sigma) <= rel_tol * next) return std::max(next, std::sqrt(wn));
    sigma = next;
  }
  return sigma;
}

/// Validated, immutable problem instance with cached DataConstants.
class ProblemData {
 public:
  ProblemData() = default;

  const Eigen::MatrixXd& A() const noexcept { return spec_.A; }
  const Eigen::VectorXd& b() const noexcept { return spec_.b; }
  const Eigen::VectorXd& c() const noexcept { return spec_.c; }
  const LogWeights& r() const noexcept { return r_; }
  double lambda() const noexcept { return spec_.lambda; }
  Eigen::Index m() const noexcept { return spec_.A.rows(); }
  Eigen::Index n() const noexcept { return spec_.A.cols(); }
  const DataConstants& constants() const noexcept { return constants_; }
  const ProblemSpec& spec() const noexcept { return spec_; }

  ProblemData with_lambda(double lambda) const;
  ProblemData with_b(Eigen::VectorXd b) const;
  ProblemData with_r(Eigen::VectorXd r) const;

  friend ProblemData validate(ProblemSpec spec);

 private:
  ProblemSpec spec_;
  LogWeights r_;
  DataConstants constants_;
};

inline DataConstants data_constants(const ProblemSpec& s) {
  DataConstants k;
  k.c_min = s.c.minCoeff();
  k.c_max = s.c.maxCoeff();
  k.c_inf = s.c.cwiseAbs().maxCoeff();
  k.A_max = s.A.colwise().norm().maxCoeff();
  k.A_opnorm = operator_norm(s.A);
  k.q_min = std::exp(s.r.minCoeff());
  k.log_q_onenorm = logsumexp_w(Eigen::VectorXd::Zero(s.r.size()), LogWeights(s.r));
  k.q_onenorm = std::exp(k.log_q_onenorm);
  k.b_norm = s.b.norm();
  return k;
}

inline DataConstants data_constants(const ProblemData& P) { return P.constants(); }

/// Checks dimensions, finiteness and lambda > 0; caches DataConstants.
inline ProblemData validate(ProblemSpec spec) {
  const Eigen::Index m = spec.A.rows();
  const Eigen::Index n = spec.A.cols();
  if (m < 1 || n < 1) throw ValidationError("A", "must have at least one row and one column");
  if (spec.b.size() != m) {
    throw ValidationError("b", "length " + std::to_string(spec.b.size()) + " != m = " + std::to_string(m));
  }
  if (spec.c.size() != n) {
    throw ValidationError("c", "length " + std::to_string(spec.c.size()) + " != n = " + std::to_string(n));
  }
  if (spec.r.size() != n) {
    throw ValidationError("r", "length " + std::to_string(spec.r.size()) + " != n = " + std::to_string(n));
  }
  detail::require_finite(spec.A, "A");
  detail::require_finite(spec.b, "b");
  detail::require_finite(spec.c, "c");
  detail::require_finite(spec.r, "r");
  if (!std::isfinite(spec.lambda) || !(spec.lambda > 0.0)) {
    throw ValidationError("lambda", "must be finite and > 0, got " + std::to_string(spec.lambda));
  }
  ProblemData P;
  P.r_ = LogWeights(spec.r);
  P.constants_ = data_constants(spec);
  P.spec_ = std::move(spec);
  return P;
}

inline ProblemData ProblemData::with_lambda(double lambda) const {
  ProblemSpec s = spec_;
  s.lambda = lambda;
  return validate(std::move(s));
}

inline ProblemData ProblemData::with_b(Eigen::VectorXd b) const {
  ProblemSpec s = spec_;
  s.b = std::move(b);
  return validate(std::move(s));
}

inline ProblemData ProblemData::with_r(Eigen::VectorXd r) const {
  ProblemSpec s = spec_;
  s.r = std::move(r);
  return validate(std::move(s));
}

/**
 * Clips a nonnegative prior at `floor` and renormalizes to unit mass,
 * returning r = log(max(q_j, floor) / Z).
 */
inline LogWeights clip_prior(const Eigen::Ref<const Eigen::VectorXd>& q, double floor = kDefaultPriorFloor) {
  if (!(floor > 0.0) || !std::isfinite(floor)) throw DomainError("clip_prior: floor must be positive and finite");
  if (q.size() < 1) throw DomainError("clip_prior: empty prior");
  bool any_positive = false;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (!std::isfinite(q[j]) || q[j] < 0.0) {
      throw DomainError("clip_prior: entry " + std::to_string(j) + " is negative or not finite");
    }
    any_positive = any_positive || q[j] > 0.0;
  }
  if (!any_positive) throw DomainError("clip_prior: prior is identically zero");
  const Eigen::VectorXd clipped = q.cwiseMax(floor);
  const double log_z = std::log(clipped.sum());
  return LogWeights((clipped.array().log() - log_z).matrix());
}

/// Scale-shape split of x >= 0. The zero vector maps to tau = 0 with uniform p.
inline ScaleShape decompose(const Eigen::Ref<const Eigen::VectorXd>& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(x[j] >= 0.0)) throw DomainError("decompose: entry " + std::to_string(j) + " is negative or NaN");
  }
  ScaleShape s;
  s.tau = x.sum();
  if (s.tau > 0.0) {
    s.p = x / s.tau;
  } else {
    s.p = Eigen::VectorXd::Constant(x.size(), 1.0 / static_cast<double>(x.size()));
  }
  return s;
}

inline Eigen::VectorXd compose(const ScaleShape& s) { return s.tau * s.p; }

/// Unnormalized relative entropy sum_j x_j (log x_j - r_j), with 0 log 0 = 0
/// and +inf outside the nonnegative orthant.
inline double relative_entropy(const Eigen::Ref<const Eigen::VectorXd>& x, const LogWeights& r) {
  double g = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] < 0.0) return std::numeric_limits<double>::infinity();
    if (x[j] > 0.0) g += x[j] * (std::log(x[j]) - r[j]);
  }
  return g;
}

/// Primal objective (1/(2 lambda)) ||Ax - b||^2 + <c, x> + g_q(x).
inline double primal_objective(const ProblemData& P, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return (P.A() * x - P.b()).squaredNorm() / (2.0 * P.lambda()) + P.c().dot(x) + relative_entropy(x, P.r());
}

}  // namespace scaleshape
