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

#include <filesystem>
#include <random>
#include <regex>

#include "oracles.hpp"
#include "scaleshape/io.hpp"
#include "scaleshape/report.hpp"
#include "scaleshape/ueg.hpp"

namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("scaleshape_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST(GenUeg, DefaultShapeAndEntryRange) {
  const auto inst = scaleshape::gen_ueg(scaleshape::UegSpec{});
  EXPECT_EQ(inst.problem.m(), 201);
  EXPECT_EQ(inst.problem.n(), 500);
  EXPECT_GT(inst.problem.A().minCoeff(), 0.0);
  EXPECT_LE(inst.problem.A().maxCoeff(), 2.0);
  EXPECT_DOUBLE_EQ(inst.t[0], 0.0);
  EXPECT_DOUBLE_EQ(inst.t[200], 18.68);
  EXPECT_DOUBLE_EQ(inst.omega[0], 4e-3);
  EXPECT_DOUBLE_EQ(inst.omega[499], 4.0);
  EXPECT_EQ(inst.problem.c(), VectorXd::Zero(500));
  EXPECT_NEAR(inst.truth.p.sum(), 1.0, 1e-12);
  EXPECT_NEAR(inst.problem.constants().q_onenorm, 1.0, 1e-12);
}

TEST(GenUeg, KernelIsSymmetricInImaginaryTime) {
  scaleshape::UegSpec spec;
  spec.m = 41;
  spec.n = 60;
  const auto inst = scaleshape::gen_ueg(spec);
  const MatrixXd& A = inst.problem.A();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    EXPECT_LE((A.row(i) - A.row(A.rows() - 1 - i)).cwiseAbs().maxCoeff(), 1e-12);
  }
  // Direct check at an arbitrary pair t, beta - t.
  const VectorXd t = (VectorXd(2) << 3.1, 18.68 - 3.1).finished();
  const MatrixXd K = scaleshape::ueg_kernel(t, inst.omega, 18.68);
  EXPECT_LE((K.row(0) - K.row(1)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GenUeg, DeterministicInSeed) {
  scaleshape::UegSpec spec;
  spec.m = 31;
  spec.n = 40;
  spec.scale_Z = 10.0;
  const auto a = scaleshape::gen_ueg(spec);
  const auto b = scaleshape::gen_ueg(spec);
  EXPECT_EQ(a.problem.A(), b.problem.A());
  EXPECT_EQ(a.problem.b(), b.problem.b());
  EXPECT_EQ(a.problem.r().values(), b.problem.r().values());
  spec.seed += 1;
  const auto c = scaleshape::gen_ueg(spec);
  EXPECT_NE(a.problem.b(), c.problem.b());
  EXPECT_EQ(a.problem.A(), c.problem.A());
}

TEST(GenUeg, NoiseIsMultiplicativeAtRequestedLevel) {
  scaleshape::UegSpec spec;
  spec.noise_rel = 0.0;
  spec.scale_Z = 3.0;
  const auto clean = scaleshape::gen_ueg(spec);
  EXPECT_LE((clean.problem.b() - clean.problem.A() * (3.0 * clean.truth.p)).norm(),
            1e-14 * clean.problem.b().norm());
  spec.noise_rel = 1e-4;
  const auto noisy = scaleshape::gen_ueg(spec);
  const VectorXd rel = noisy.problem.b().cwiseQuotient(clean.problem.b()).array() - 1.0;
  const double rms = std::sqrt(rel.squaredNorm() / static_cast<double>(rel.size()));
  EXPECT_GT(rms, 0.7e-4);
  EXPECT_LT(rms, 1.3e-4);
}

TEST(GenUeg, SpecValidation) {
  auto bad = [](auto mutate) {
    scaleshape::UegSpec spec;
    mutate(spec);
    EXPECT_THROW(scaleshape::gen_ueg(spec), scaleshape::ValidationError);
  };
  bad([](scaleshape::UegSpec& s) { s.m = 1; });
  bad([](scaleshape::UegSpec& s) { s.n = 1; });
  bad([](scaleshape::UegSpec& s) { s.omega_min = 5.0; });
  bad([](scaleshape::UegSpec& s) { s.beta_temp = 0.0; });
  bad([](scaleshape::UegSpec& s) { s.scale_Z = -1.0; });
  bad([](scaleshape::UegSpec& s) { s.noise_rel = -1e-4; });
}

TEST(NumericalRank, CountsRelativeAndAbsolute) {
  const VectorXd s = (VectorXd(5) << 10.0, 1.0, 2e-9, 5e-10, 1e-12).finished();
  const auto rep = scaleshape::numerical_rank(MatrixXd(s.asDiagonal()), 1e-10);
  EXPECT_EQ(rep.rank_relative, 3);
  EXPECT_EQ(rep.rank_absolute, 4);
  EXPECT_NEAR(rep.singular_values[0], 10.0, 1e-14);
}

TEST(OverflowExperiment, WellConditionedControl) {
  scaleshape::UegSpec spec;
  const auto tab = scaleshape::run_overflow_experiment(spec, {1.0}, 1.0, scaleshape::SolverConfig{}, 1.0);
  ASSERT_EQ(tab.overflow.size(), 1u);
  const auto& row = tab.overflow.front();
  EXPECT_TRUE(row.classical.converged());
  EXPECT_TRUE(row.scale_shape.converged());
  EXPECT_LT(row.classical_peak_exponent, scaleshape::kLogMaxDouble);
  EXPECT_LE(row.scale_shape_peak_exponent, 0.0);
}

TEST(Csv, FormatsDoublesLosslessly) {
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> e(-300, 300);
  for (int t = 0; t < 200; ++t) {
    const double v = std::pow(10.0, e(rng)) * (t % 2 ? -1.0 : 1.0);
    EXPECT_EQ(std::strtod(scaleshape::fmt_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(scaleshape::fmt_double(0.5), "0.5");
  EXPECT_EQ(scaleshape::fmt_double(INFINITY), "inf");
}

TEST(Csv, RoundTripThroughFile) {
  scaleshape::SolverConfig cfg;
  std::mt19937_64 rng(112);
  const auto P = oracle::random_instance(rng, 3, 5);
  const auto rep = scaleshape::solve(P, cfg);
  const auto table = scaleshape::trace_table(rep.trace);
  EXPECT_EQ(table.header, (std::vector<std::string>{"k", "rho", "alpha", "alpha_bar", "backtracks", "tau", "eta_k",
                                                    "max_exponent"}));
  EXPECT_EQ(table.rows.size(), rep.trace.size());
  const fs::path dir = scratch_dir("csv");
  scaleshape::write_csv(dir / "trace.csv", table);
  EXPECT_EQ(scaleshape::read_csv(dir / "trace.csv"), table);
  for (std::size_t k = 0; k < rep.trace.size(); ++k) {
    EXPECT_EQ(std::strtod(table.rows[k][1].c_str(), nullptr), rep.trace[k].rho);
  }
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  const auto t = scaleshape::path_table({});
  EXPECT_EQ(scaleshape::to_csv(t), "lambda,residual,rel_residual,h,f,tau,iterations,status\n");
  EXPECT_EQ(scaleshape::parse_csv(scaleshape::to_csv(t)), t);
}

TEST(Csv, RejectsRaggedRows) {
  scaleshape::CsvTable t;
  t.header = {"a", "b"};
  EXPECT_THROW(t.add_row({"1"}), scaleshape::ContractError);
  EXPECT_THROW(scaleshape::parse_csv("a,b\n1,2,3\n"), scaleshape::ContractError);
}

TEST(ProblemJson, RoundTrip) {
  std::mt19937_64 rng(113);
  const auto P = oracle::random_instance(rng, 3, 4);
  const fs::path dir = scratch_dir("json");
  scaleshape::save_problem(dir / "p.json", scaleshape::to_problem_file(P));
  const auto Q = scaleshape::load_problem(dir / "p.json");
  EXPECT_EQ(Q.A(), P.A());
  EXPECT_EQ(Q.b(), P.b());
  EXPECT_EQ(Q.c(), P.c());
  EXPECT_EQ(Q.lambda(), P.lambda());
  EXPECT_LE((Q.r().values() - P.r().values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProblemJson, ZeroPriorEntriesAreClipped) {
  scaleshape::ProblemFile pf{MatrixXd::Identity(2, 3), VectorXd::Ones(2), VectorXd::Zero(3),
                             (VectorXd(3) << 0.5, 0.0, 0.5).finished(), 0.1};
  const auto P = scaleshape::to_problem(pf);
  EXPECT_TRUE(P.r().values().allFinite());
  EXPECT_NEAR(P.r()[1], std::log(1e-16 / (1.0 + 1e-16)), 1e-12);
  pf.q[1] = -1.0;
  EXPECT_THROW(scaleshape::to_problem(pf), scaleshape::ValidationError);
}

TEST(ProblemJson, ReportsMissingFieldsAndPaths) {
  const fs::path dir = scratch_dir("json_bad");
  scaleshape::write_text(dir / "bad.json", R"({"m": 1, "n": 1, "A": [1.0]})");
  EXPECT_THROW(scaleshape::load_problem(dir / "bad.json"), scaleshape::ValidationError);
  scaleshape::write_text(dir / "garbled.json", "{\"m\": 1,");
  EXPECT_THROW(scaleshape::load_problem(dir / "garbled.json"), scaleshape::IoError);
  try {
    scaleshape::load_problem(dir / "missing.json");
    FAIL();
  } catch (const scaleshape::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.json"), std::string::npos);
  }
}

TEST(Svg, PathExperimentDrawsOneCurvePerScale) {
  std::mt19937_64 rng(114);
  const auto P = oracle::random_instance(rng, 3, 4);
  scaleshape::ExperimentTable tab;
  tab.name = "path";
  for (double Z : {1.0, 10.0, 100.0}) {
    scaleshape::PathRow row;
    row.Z = Z;
    row.free_tau = scaleshape::regularization_path(P, scaleshape::log_grid(1e-1, 1e-3, 3));
    tab.path.push_back(std::move(row));
  }
  const fs::path dir = scratch_dir("svg");
  const auto files = scaleshape::emit_plots(tab, dir);
  ASSERT_EQ(files.size(), 4u);
  const std::string svg = scaleshape::read_text(dir / "path_rel_residual.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 3);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto csv = scaleshape::read_csv(dir / "path_Z10.csv");
  EXPECT_EQ(csv.rows.size(), 3u);
}

TEST(Svg, EscapesLabelsAndSkipsNonPositiveOnLogAxes) {
  scaleshape::LineChart c{"a < b & c", "x", "y", true, true, {}, {}};
  c.series.push_back({"s", {1.0, 10.0, 100.0}, {1.0, 0.0, 1e-3}});
  const std::string svg = scaleshape::render_svg(c);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
  const std::regex points("points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, points));
  EXPECT_EQ(count(m[1].str(), ","), 2);
}

}  // namespace
