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
 * \file scalar_kernels.hpp
 * \brief Overflow-proof scalar and vector primitives.
 *
 * Principal-branch Lambert W on [0, inf), and the weighted log-sum-exp /
 * softmax pair evaluated from log-weights r = log q. Every exponential taken
 * by the weighted pair goes through audited_exp(), which keeps thread-local
 * accounting of the largest argument seen so callers can confirm that no
 * positive argument was ever exponentiated.
 */
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>

#include "scaleshape/errors.hpp"

namespace scaleshape {

/// Running record of the arguments handed to audited_exp() on this thread.
struct ExpAudit {
  double max_argument = -std::numeric_limits<double>::infinity();
  std::uint64_t evaluations = 0;
  std::uint64_t positive_arguments = 0;
};

inline ExpAudit& exp_audit() {
  thread_local ExpAudit audit;
  return audit;
}

inline void reset_exp_audit() { exp_audit() = ExpAudit{}; }

inline double audited_exp(double arg) {
  ExpAudit& a = exp_audit();
  ++a.evaluations;
  if (arg > a.max_argument) a.max_argument = arg;
  if (arg > 0.0) ++a.positive_arguments;
  return std::exp(arg);
}

// ---------------------------------------------------------------------------
// Lambert W
// ---------------------------------------------------------------------------

namespace detail {

// Halley iteration for w e^w = x carried out in long double and rounded once.
inline long double lambert_w_halley(long double x) {
  long double w = std::log1p(x);
  for (int it = 0; it < 8; ++it) {
    const long double ew = std::exp(w);
    const long double f = w * ew - x;
    const long double wp1 = w + 1.0L;
    const long double step = f / (ew * wp1 - (w + 2.0L) * f / (2.0L * wp1));
    w -= step;
    if (std::fabs(step) <= 4.0L * std::numeric_limits<long double>::epsilon() * std::fabs(w)) break;
  }
  return w;
}

// Solves w + log w = L for large L, where e^L would overflow.
inline long double lambert_w_from_log(long double L) {
  long double w = L - std::log(L);
  for (int it = 0; it < 16; ++it) {
    const long double h = w + std::log(w) - L;
    const long double hp = 1.0L + 1.0L / w;
    const long double hpp = -1.0L / (w * w);
    const long double step = h / (hp - 0.5L * h * hpp / hp);
    w -= step;
    if (std::fabs(step) <= 4.0L * std::numeric_limits<long double>::epsilon() * w) break;
  }
  return w;
}

}  // namespace detail

/**
 * Principal branch of the Lambert W function on [0, inf): the unique w >= 0
 * with w e^w = x.
 *
 * Initial guess log(1 + x), refined by Halley's method in extended precision.
 * Throws DomainError for negative or non-finite input.
 */
template <std::floating_point T>
T lambert_w(T x) {
  if (!std::isfinite(x) || x < T(0)) {
    throw DomainError("lambert_w: argument must be finite and nonnegative, got " +
                      std::to_string(static_cast<double>(x)));
  }
  if (x == T(0)) return T(0);
  return static_cast<T>(detail::lambert_w_halley(static_cast<long double>(x)));
}

/// W(exp(log_x)) without forming exp(log_x); valid for any finite log_x.
template <std::floating_point T>
T lambert_w_of_exp(T log_x) {
  if (std::isnan(log_x) || log_x == std::numeric_limits<T>::infinity()) {
    throw DomainError("lambert_w_of_exp: argument must be finite or -inf");
  }
  if (log_x == -std::numeric_limits<T>::infinity()) return T(0);
  if (log_x < T(700)) return lambert_w(static_cast<T>(std::exp(log_x)));
  return static_cast<T>(detail::lambert_w_from_log(static_cast<long double>(log_x)));
}

// ---------------------------------------------------------------------------
// Weighted log-sum-exp and softmax
// ---------------------------------------------------------------------------

/// Log-weights r = log q of a strictly positive reference measure.
class LogWeights {
 public:
  LogWeights() = default;

  explicit LogWeights(Eigen::VectorXd r) : r_(std::move(r)) {
    if (r_.size() < 1) throw ValidationError("r", "log-weights must have at least one entry");
    for (Eigen::Index j = 0; j < r_.size(); ++j) {
      if (!std::isfinite(r_[j])) {
        throw ValidationError("r", "log-weight " + std::to_string(j) + " is not finite");
      }
    }
  }

  const Eigen::VectorXd& values() const noexcept { return r_; }
  Eigen::Index size() const noexcept { return r_.size(); }
  double operator[](Eigen::Index j) const { return r_[j]; }

  /// q = exp(r); never used on a numerically sensitive path.
  Eigen::VectorXd weights() const { return r_.array().exp().matrix(); }

 private:
  Eigen::VectorXd r_;
};

/// log-sum-exp value together with the normalized weights it produced.
struct WeightedSoftmax {
  Eigen::VectorXd p;
  double logsumexp = 0.0;
  double max_argument = 0.0;  ///< largest argument passed to exp; <= 0
};

namespace detail {

inline double shifted_max(const Eigen::Ref<const Eigen::VectorXd>& u,
                          const Eigen::Ref<const Eigen::VectorXd>& r, const char* who) {
  if (u.size() != r.size()) {
    throw ContractError(std::string(who) + ": length mismatch (u has " + std::to_string(u.size()) +
                        ", r has " + std::to_string(r.size()) + ")");
  }
  if (u.size() == 0) throw ContractError(std::string(who) + ": empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (std::isnan(u[j]) || u[j] == std::numeric_limits<double>::infinity()) {
      throw DomainError(std::string(who) + ": entry " + std::to_string(j) + " is NaN or +inf");
    }
    m = std::max(m, r[j] + u[j]);
  }
  if (m == -std::numeric_limits<double>::infinity()) {
    throw DomainError(std::string(who) + ": every entry is excluded (-inf)");
  }
  return m;
}

}  // namespace detail

/**
 * log sum_j exp(r_j + u_j), shifted by max_j (r_j + u_j) so that every
 * exponentiated argument is <= 0. Entries u_j = -inf are excluded terms.
 */
inline double logsumexp_w(const Eigen::Ref<const Eigen::VectorXd>& u, const LogWeights& r) {
  const auto& rv = r.values();
  const double m = detail::shifted_max(u, rv, "logsumexp_w");
  double s = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) s += audited_exp(rv[j] + u[j] - m);
  return m + std::log(s);
}

/// Weighted softmax p_j = exp(r_j + u_j - logsumexp_w(u, r)) along with the
/// log-sum-exp value, from a single max-shifted pass.
inline WeightedSoftmax softmax_lse(const Eigen::Ref<const Eigen::VectorXd>& u, const LogWeights& r) {
  const auto& rv = r.values();
  const double m = detail::shifted_max(u, rv, "softmax_w");
  WeightedSoftmax out;
  out.p.resize(u.size());
  double s = 0.0;
  out.max_argument = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double arg = rv[j] + u[j] - m;
    out.max_argument = std::max(out.max_argument, arg);
    out.p[j] = audited_exp(arg);
    s += out.p[j];
  }
  out.p /= s;
  out.logsumexp = m + std::log(s);
  return out;
}

inline Eigen::VectorXd softmax_w(const Eigen::Ref<const Eigen::VectorXd>& u, const LogWeights& r) {
  return softmax_lse(u, r).p;
}

}  // namespace scaleshape
