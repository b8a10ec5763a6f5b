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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scaleshape/dual_system.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using scaleshape::DualPoint;
using scaleshape::ProblemData;

// m = n = 1, A = 0, q = 1, c = -1: root y = b / lambda, tau = 1.
ProblemData scalar_problem(double b, double lambda) {
  scaleshape::ProblemSpec s;
  s.A = MatrixXd::Zero(1, 1);
  s.b = VectorXd::Constant(1, b);
  s.c = VectorXd::Constant(1, -1.0);
  s.r = VectorXd::Zero(1);
  s.lambda = lambda;
  return scaleshape::validate(s);
}

struct Case {
  ProblemData P;
  DualPoint z;
};

std::vector<Case> random_cases(int count, std::uint64_t seed, int m = 3, int n = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 5.0);
  std::vector<Case> out;
  for (int t = 0; t < count; ++t) {
    const int mm = m > 0 ? m : 1 + static_cast<int>(rng() % 5);
    const int nn = n > 0 ? n : 1 + static_cast<int>(rng() % 8);
    Case c{oracle::random_instance(rng, mm, nn), {}};
    c.z.y = VectorXd(mm);
    for (int i = 0; i < mm; ++i) c.z.y[i] = normal(rng);
    c.z.tau = unif(rng);
    out.push_back(std::move(c));
  }
  return out;
}

TEST(EvalF, ScaleEquationVanishesAtMatchedTau) {
  for (auto& c : random_cases(10, 31)) {
    const VectorXd u = c.P.A().transpose() * c.z.y - c.P.c();
    c.z.tau = std::exp(scaleshape::logsumexp_w(u, c.P.r()) - 1.0);
    EXPECT_NEAR(scaleshape::eval_F(c.z, c.P).F_tau, 0.0, 1e-14);
  }
}

TEST(EvalF, ClosedFormScalarRoot) {
  const ProblemData P = scalar_problem(3.0, 1.0);
  const auto e = scaleshape::eval_F(DualPoint{VectorXd::Constant(1, 3.0), 1.0}, P);
  EXPECT_LE(e.rho, 1e-14);
  EXPECT_NEAR(scaleshape::primal_from_dual(DualPoint{VectorXd::Constant(1, 3.0), 1.0}, P)[0], 1.0, 1e-15);
}

TEST(EvalF, RhoIsEuclideanNormOfStack) {
  for (auto& c : random_cases(10, 32)) {
    const auto e = scaleshape::eval_F(c.z, c.P);
    EXPECT_NEAR(e.rho, e.stacked().norm(), 1e-15 * e.rho);
    EXPECT_NEAR(e.p.sum(), 1.0, 1e-12);
  }
}

TEST(EvalF, MatchesGradientOfDualObjective) {
  for (auto& c : random_cases(20, 33)) {
    const auto f = [&](const VectorXd& s) {
      return scaleshape::dual_objective(DualPoint::from_stacked(s), c.P);
    };
    const VectorXd g = oracle::fd_gradient(f, c.z.stacked(), 1e-6);
    const VectorXd F = scaleshape::eval_F(c.z, c.P).stacked();
    ASSERT_LE((g - F).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + F.cwiseAbs().maxCoeff()));
  }
}

TEST(EvalDF, MatchesFiniteDifferencesOfF) {
  for (auto& c : random_cases(20, 34, 0, 0)) {
    const auto F = [&](const VectorXd& s) { return scaleshape::eval_F(DualPoint::from_stacked(s), c.P).stacked(); };
    const MatrixXd fd = oracle::fd_jacobian(F, c.z.stacked(), 1e-6);
    const MatrixXd DF = scaleshape::eval_DF(c.z, c.P).DF;
    const double scale = 1.0 + DF.cwiseAbs().rowwise().sum().maxCoeff();
    ASSERT_LE((fd - DF).cwiseAbs().maxCoeff(), 1e-5 * scale);
  }
}

TEST(EvalDF, SymmetricWithExactCorner) {
  for (auto& c : random_cases(20, 35, 0, 0)) {
    c.z.tau = 2.0;
    const MatrixXd DF = scaleshape::eval_DF(c.z, c.P).DF;
    const double inf_norm = DF.cwiseAbs().rowwise().sum().maxCoeff();
    EXPECT_LE((DF - DF.transpose()).cwiseAbs().rowwise().sum().maxCoeff(), 1e-12 * inf_norm);
    EXPECT_EQ(DF(DF.rows() - 1, DF.cols() - 1), 0.5);
  }
}

TEST(EvalDF, SingularValueBracket) {
  for (auto& c : random_cases(50, 36, 0, 0)) {
    const MatrixXd DF = scaleshape::eval_DF(c.z, c.P).DF;
    const VectorXd s = Eigen::JacobiSVD<MatrixXd>(DF).singularValues();
    const double lower = std::min(c.P.lambda(), 1.0 / c.z.tau);
    const auto& k = c.P.constants();
    const double upper = k.A_max + std::max(c.P.lambda() + c.z.tau * k.A_opnorm * k.A_opnorm / 2.0, 1.0 / c.z.tau);
    ASSERT_GE(s[s.size() - 1], lower - 1e-10);
    ASSERT_LE(s[0], upper + 1e-10);
  }
}

TEST(DualObjective, UniformPriorAtOrigin) {
  scaleshape::ProblemSpec s;
  s.A = MatrixXd::Ones(2, 4);
  s.b = VectorXd::Zero(2);
  s.c = VectorXd::Zero(4);
  s.r = VectorXd::Constant(4, -std::log(4.0));
  s.lambda = 1.0;
  const auto P = scaleshape::validate(s);
  EXPECT_NEAR(scaleshape::dual_objective(DualPoint{VectorXd::Zero(2), 1.0}, P), 0.0, 1e-15);
}

TEST(DualObjective, ConcaveInYAtScaleOfRoot) {
  const ProblemData P = scalar_problem(3.0, 1.0);
  const double at_root = scaleshape::dual_objective(DualPoint{VectorXd::Constant(1, 3.0), 1.0}, P);
  std::mt19937_64 rng(37);
  std::normal_distribution<double> normal(3.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    EXPECT_LE(scaleshape::dual_objective(DualPoint{VectorXd::Constant(1, normal(rng)), 1.0}, P), at_root + 1e-14);
  }
}

TEST(PrimalFromDual, MassEqualsTau) {
  for (auto& c : random_cases(20, 38, 0, 0)) {
    const VectorXd x = scaleshape::primal_from_dual(c.z, c.P);
    EXPECT_NEAR(x.sum(), c.z.tau, 1e-12 * c.z.tau);
    EXPECT_GE(x.minCoeff(), 0.0);
  }
  const ProblemData P = scalar_problem(1.0, 1.0);
  EXPECT_NEAR(scaleshape::primal_from_dual(DualPoint{VectorXd::Zero(1), 1.0}, P)[0], 1.0, 1e-15);
}

TEST(ShapeMap, HalfOperatorNormLipschitz) {
  for (auto& c : random_cases(50, 39, 0, 0)) {
    std::mt19937_64 rng(c.P.m() * 100 + c.P.n());
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd y2 = c.z.y;
    for (Eigen::Index i = 0; i < y2.size(); ++i) y2[i] += normal(rng);
    const VectorXd p1 = scaleshape::eval_F(c.z, c.P).p;
    const VectorXd p2 = scaleshape::eval_F(DualPoint{y2, c.z.tau}, c.P).p;
    ASSERT_LE((p1 - p2).norm(), 0.5 * c.P.constants().A_opnorm * (c.z.y - y2).norm() * (1 + 1e-12));
  }
}

TEST(Instrumentation, NoPositiveExponentInScaleShapeEvaluations) {
  scaleshape::reset_exp_audit();
  for (auto& c : random_cases(30, 40, 0, 0)) {
    c.z.y *= 300.0;
    const auto e = scaleshape::eval_F(c.z, c.P);
    scaleshape::eval_DF(c.z, c.P);
    EXPECT_LE(e.max_exponent, 0.0);
  }
  EXPECT_EQ(scaleshape::exp_audit().positive_arguments, 0u);
}

TEST(ClassicalGradient, ReportsExponentBeforeExponentiating) {
  for (auto& c : random_cases(5, 41)) {
    const auto g = scaleshape::classical_dual_gradient(VectorXd::Zero(c.P.m()), c.P);
    const double want = (c.P.r().values() - c.P.c()).maxCoeff() - 1.0;
    EXPECT_NEAR(g.max_exponent, want, 1e-15);
  }
  // Overflow is reported, not trapped.
  const auto c = random_cases(1, 42).front();
  const VectorXd a0 = c.P.A().col(0);
  const VectorXd y = 1e4 / a0.squaredNorm() * a0;
  const auto g = scaleshape::classical_dual_gradient(y, c.P);
  EXPECT_GT(g.max_exponent, scaleshape::kLogMaxDouble);
  EXPECT_FALSE(g.grad.allFinite());
}

TEST(ClassicalGradient, MatchesFiniteDifferencesOfClassicalDual) {
  for (auto& c : random_cases(10, 43)) {
    const auto f = [&](const VectorXd& y) { return scaleshape::classical_dual_objective(y, c.P); };
    const VectorXd g = oracle::fd_gradient(f, c.z.y, 1e-6);
    const VectorXd want = scaleshape::classical_dual_gradient(c.z.y, c.P).grad;
    ASSERT_LE((g - want).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + want.cwiseAbs().maxCoeff()));
  }
}

TEST(DualPoint, Errors) {
  const ProblemData P = scalar_problem(1.0, 1.0);
  EXPECT_THROW(scaleshape::eval_F(DualPoint{VectorXd::Constant(1, NAN), 1.0}, P), scaleshape::DomainError);
  EXPECT_THROW(scaleshape::eval_F(DualPoint{VectorXd::Zero(1), 0.0}, P), scaleshape::DomainError);
  EXPECT_THROW(scaleshape::eval_F(DualPoint{VectorXd::Zero(2), 1.0}, P), scaleshape::ContractError);
  EXPECT_EQ(scaleshape::merit(DualPoint{VectorXd::Zero(1), -1.0}, P), INFINITY);
}

}  // namespace
