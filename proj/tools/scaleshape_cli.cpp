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

// Command-line front end: solve, certificates, sensitivity, sweep-lambda,
// gen-problem and the three UEG experiments.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "scaleshape/certificates.hpp"
#include "scaleshape/io.hpp"
#include "scaleshape/report.hpp"
#include "scaleshape/sensitivity.hpp"
#include "scaleshape/solver.hpp"
#include "scaleshape/ueg.hpp"

namespace fs = std::filesystem;
using namespace scaleshape;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct SolverFlags {
  std::optional<double> lambda;
  double mu = 0.49;
  double gamma = 0.5;
  double eps = 1e-8;
  int max_iter = 300;
  std::string eta = "exact";
  double eta_bar = 0.5;
  double tau0 = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--lambda", lambda, "override the problem's lambda")->check(CLI::PositiveNumber);
    app->add_option("--mu", mu, "Armijo constant")->capture_default_str();
    app->add_option("--gamma", gamma, "backtracking factor")->capture_default_str();
    app->add_option("--eps", eps, "merit tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    app->add_option("--eta", eta, "forcing schedule: exact | const:<c> | power:<p>")->capture_default_str();
    app->add_option("--eta-bar", eta_bar, "cap on power-schedule forcing terms")->capture_default_str();
    app->add_option("--tau0", tau0, "initial scale")->capture_default_str()->check(CLI::PositiveNumber);
  }

  SolverConfig config() const {
    SolverConfig c;
    c.mu = mu;
    c.gamma = gamma;
    c.eps = eps;
    c.max_iter = max_iter;
    c.eta = EtaSchedule::parse(eta);
    c.eta_bar = eta_bar;
    c.validate();
    return c;
  }

  ProblemData problem(const std::string& path) const {
    ProblemData P = load_problem(path);
    return lambda ? P.with_lambda(*lambda) : P;
  }
};

void print_kv(const char* key, double v) { std::printf("%-22s %.10g\n", key, v); }
void print_kv(const char* key, const std::string& v) { std::printf("%-22s %s\n", key, v.c_str()); }

int cmd_solve(const std::string& path, const SolverFlags& f, const std::string& method,
              std::optional<double> fixed_tau, const std::string& trace_out) {
  const ProblemData P = f.problem(path);
  const SolverConfig cfg = f.config();
  SolveReport rep;
  if (method == "classical") {
    rep = solve_classical(P, cfg, Eigen::VectorXd::Zero(P.m()));
  } else if (fixed_tau) {
    rep = solve_fixed_scale(P, *fixed_tau, cfg, Eigen::VectorXd::Zero(P.m()));
  } else {
    rep = solve(P, cfg, f.tau0);
  }
  print_kv("status", to_string(rep.status));
  print_kv("iterations", rep.iterations());
  print_kv(method == "classical" ? "final_grad_norm" : "final_rho", rep.final_rho());
  print_kv("tau", rep.z_final.tau);
  print_kv("residual", (P.A() * rep.x_final - P.b()).norm());
  print_kv("primal_objective", primal_objective(P, rep.x_final));
  if (method != "classical" && !fixed_tau) {
    if (rep.certificate) {
      print_kv("certified_iters", rep.certificate->iters_to_eps(cfg.eps));
      print_kv("log_certified_iters", rep.certificate->log_iters_to_eps(cfg.eps));
    } else {
      print_kv("certificate", rep.certificate_error);
    }
  }
  if (!trace_out.empty()) write_csv(trace_out, trace_table(rep.trace));
  return rep.converged() ? kExitOk : kExitNotConverged;
}

int cmd_certificates(const std::string& path, const SolverFlags& f, double beta_factor, bool as_json) {
  const ProblemData P = f.problem(path);
  const SolverConfig cfg = f.config();
  CertificateParams cp = cfg.certificate_params();
  cp.beta_factor = beta_factor;
  const double rho0 = merit(DualPoint{Eigen::VectorXd::Zero(P.m()), f.tau0}, P);
  const DataConstants& k = P.constants();
  nlohmann::ordered_json j;
  j["lambda"] = P.lambda();
  j["A_max"] = k.A_max;
  j["A_opnorm"] = k.A_opnorm;
  j["b_norm"] = k.b_norm;
  j["q_min"] = k.q_min;
  j["rho0"] = rho0;
  const LevelSetBounds L = level_bounds(P, beta_factor * rho0, cfg.tau_floor);
  j["beta"] = L.beta;
  j["theta"] = L.theta;
  j["B"] = L.B;
  j["zeta"] = L.zeta;
  j["tau_max_bound"] = L.tau_max_bound;
  j["tau_min_bound"] = L.tau_min_bound;
  j["y_max_bound"] = L.y_max_bound;
  j["log_tau_max_bound"] = L.log_tau_max_bound;
  j["log_y_max_bound"] = L.log_y_max_bound;
  try {
    const RateCertificate c = rate_certificate(P, cp, rho0);
    j["L_strip"] = c.L_strip;
    j["M_strip"] = c.M_strip;
    j["d_max"] = c.d_max;
    j["rho_max"] = c.rho_max;
    j["beta_hat"] = c.beta_hat;
    j["L_D"] = c.L_D;
    j["alpha_hat"] = c.alpha_hat;
    j["eta_hat"] = c.eta_hat;
    j["alpha_star"] = c.alpha_star;
    j["alpha_hat_star"] = c.alpha_hat_star;
    j["nu_hat"] = c.nu_hat;
    j["one_minus_nu_hat"] = c.nu_gap;
    j["iters_to_eps"] = c.iters_to_eps(cfg.eps);
    j["K_dist"] = c.K_dist;
    j["log_d_max"] = c.log_d_max;
    j["log_rho_max"] = c.log_rho_max;
    j["log_L_D"] = c.log_L_D;
    j["log_one_minus_nu_hat"] = c.log_nu_gap;
    j["log_iters_to_eps"] = c.log_iters_to_eps(cfg.eps);
  } catch (const InternalConsistencyError& e) {
    j["certificate_error"] = e.what();
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& [key, v] : j.items()) {
      if (v.is_number()) {
        print_kv(key.c_str(), v.get<double>());
      } else {
        print_kv(key.c_str(), v.get<std::string>());
      }
    }
  }
  return kExitOk;
}

int cmd_sensitivity(const std::string& path, const SolverFlags& f, bool check_fd) {
  const ProblemData P = f.problem(path);
  SolverConfig cfg = f.config();
  cfg.eps = std::min(cfg.eps, 1e-11);
  const SolveReport rep = solve(P, cfg, f.tau0);
  if (!rep.converged()) {
    std::fprintf(stderr, "solve did not converge (%s)\n", to_string(rep.status));
    return kExitNotConverged;
  }
  const SolutionJacobians J = solution_jacobians(P, rep.z_final);
  const double tau = rep.z_final.tau;
  const double lam = P.lambda();
  print_kv("tau", tau);
  print_kv("||D_b x||", J.D_b.operatorNorm());
  print_kv("bound_D_b", std::min(std::sqrt(tau) / (2.0 * std::sqrt(lam)), tau * P.constants().A_opnorm / lam));
  print_kv("||D_lambda x||", J.D_lambda.norm());
  print_kv("||D_r x||", J.D_r.operatorNorm());
  print_kv("bound_D_r", tau);
  if (!check_fd) return kExitOk;

  auto x_at = [&](const ProblemData& Q) {
    const SolveReport r = solve(Q, cfg, rep.z_final);
    return r.x_final;
  };
  double err_b = 0.0, err_r = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < P.m(); ++i) {
    Eigen::VectorXd bp = P.b(), bm = P.b();
    bp[i] += h;
    bm[i] -= h;
    const Eigen::VectorXd fd = (x_at(P.with_b(bp)) - x_at(P.with_b(bm))) / (2.0 * h);
    err_b = std::max(err_b, (fd - J.D_b.col(i)).norm() / std::max(J.D_b.col(i).norm(), 1e-300));
  }
  for (Eigen::Index j = 0; j < P.n(); ++j) {
    Eigen::VectorXd rp = P.r().values(), rm = P.r().values();
    rp[j] += h;
    rm[j] -= h;
    const Eigen::VectorXd fd = (x_at(P.with_r(rp)) - x_at(P.with_r(rm))) / (2.0 * h);
    err_r = std::max(err_r, (fd - J.D_r.col(j)).norm() / std::max(J.D_r.col(j).norm(), 1e-300));
  }
  const double hl = 1e-6 * lam;
  const Eigen::VectorXd fdl = (x_at(P.with_lambda(lam + hl)) - x_at(P.with_lambda(lam - hl))) / (2.0 * hl);
  const double err_l = (fdl - J.D_lambda).norm() / std::max(J.D_lambda.norm(), 1e-300);
  print_kv("fd_rel_err_D_b", err_b);
  print_kv("fd_rel_err_D_lambda", err_l);
  print_kv("fd_rel_err_D_r", err_r);
  const bool ok = err_b <= 1e-4 && err_l <= 1e-4 && err_r <= 1e-4;
  print_kv("fd_check", ok ? "pass" : "fail");
  return ok ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const std::string& path, const SolverFlags& f, double from, double to, int points,
              std::optional<double> fixed_tau, bool warm, const std::string& out) {
  const ProblemData P = f.problem(path);
  PathOptions opt;
  opt.solver = f.config();
  opt.fixed_tau = fixed_tau;
  opt.warm_start = warm;
  const PathResult res = regularization_path(P, log_grid(from, to, points), opt);
  write_csv(out, path_table(res.records));
  print_kv("points", static_cast<double>(res.records.size()));
  print_kv("all_converged", res.all_converged ? "yes" : "no");
  if (fixed_tau) {
    print_kv("h_nonincreasing", res.h_nonincreasing ? "yes" : "no");
    print_kv("f_nondecreasing", res.f_nondecreasing ? "yes" : "no");
  }
  return res.all_converged ? kExitOk : kExitNotConverged;
}

int cmd_gen(const std::string& out, const UegSpec& spec) {
  const UegInstance inst = gen_ueg(spec);
  save_problem(out, to_problem_file(inst.problem));
  print_kv("m", static_cast<double>(inst.problem.m()));
  print_kv("n", static_cast<double>(inst.problem.n()));
  print_kv("b_norm", inst.problem.b().norm());
  return kExitOk;
}

// Expected failures: the classical comparator may stop short of eps, and path
// points below lambda = 1e-6 may stall at the double-precision floor.
int cmd_run(const std::string& which, const fs::path& out_dir, std::uint64_t seed) {
  UegSpec base;
  base.seed = seed;
  const SolverConfig cfg;
  bool ok = true;
  ExperimentTable tab;
  if (which == "overflow") {
    tab = run_overflow_experiment(base, {16.0, 64.0, 256.0, 1024.0}, 1e-5, cfg);
    for (const OverflowRow& r : tab.overflow) {
      ok = ok && r.scale_shape.converged();
      std::printf("Z=%-6g classical %-20s k=%-4d exp0=%-9.1f | scale-shape %-10s k=%-4d rho=%.2e\n", r.Z,
                  to_string(r.classical.status), r.classical.iterations(), r.classical_exponent_k0,
                  to_string(r.scale_shape.status), r.scale_shape.iterations(), r.scale_shape.final_rho());
    }
  } else if (which == "scale") {
    tab = run_scale_experiment(base, {1.0, 10.0, 100.0}, 1e-5, cfg);
    for (const ScaleRow& r : tab.scale) {
      ok = ok && r.report.converged();
      std::printf("Z=%-6g tau_K=%-12.6g rel_err=%.2e k=%d %s\n", r.Z, r.tau_K, r.rel_scale_error,
                  r.report.iterations(), to_string(r.report.status));
    }
  } else {
    tab = run_path_experiment(base, {1.0, 10.0, 100.0}, log_grid(1e-1, 1e-8, 15), cfg);
    for (const PathRow& r : tab.path) {
      int worst = 0;
      for (const PathRecord& p : r.free_tau.records) {
        if (p.lambda >= 1e-6 * (1.0 - 1e-12)) {
          ok = ok && p.status == SolveStatus::Converged;
          worst = std::max(worst, p.iterations);
        }
      }
      std::printf("Z=%-6g points=%zu max_iters(lambda>=1e-6)=%d final_rel_residual=%.3e\n", r.Z,
                  r.free_tau.records.size(), worst, r.free_tau.records.back().rel_residual);
    }
  }
  for (const fs::path& p : emit_plots(tab, out_dir)) std::printf("wrote %s\n", p.string().c_str());
  return ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-regularized least squares via the scale-shape dual"};
  app.require_subcommand(1);

  SolverFlags sf;
  std::string problem_path, method = "scale-shape", trace_out, out_path;
  std::optional<double> fixed_tau;

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a problem file");
  solve_cmd->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
  sf.attach(solve_cmd);
  solve_cmd->add_option("--fixed-tau", fixed_tau, "solve on the scaled simplex tau * Delta")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--method", method, "scale-shape | classical")
      ->check(CLI::IsMember({"scale-shape", "classical"}))
      ->capture_default_str();
  solve_cmd->add_option("--trace", trace_out, "write the iteration trace as CSV");

  double beta_factor = 1.5;
  bool as_json = false;
  CLI::App* cert_cmd = app.add_subcommand("certificates", "print level-set and rate certificates");
  cert_cmd->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
  sf.attach(cert_cmd);
  cert_cmd->add_option("--beta-factor", beta_factor, "beta = factor * rho(z0)")->capture_default_str();
  cert_cmd->add_flag("--json", as_json, "emit JSON");

  bool check_fd = false;
  CLI::App* sens_cmd = app.add_subcommand("sensitivity", "solution-map Jacobians");
  sens_cmd->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
  sf.attach(sens_cmd);
  sens_cmd->add_flag("--check-fd", check_fd, "compare with re-solve finite differences");

  double from = 1e-1, to = 1e-8;
  int points = 15;
  bool warm = false;
  CLI::App* sweep_cmd = app.add_subcommand("sweep-lambda", "regularization path");
  sweep_cmd->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
  sf.attach(sweep_cmd);
  sweep_cmd->add_option("--from", from, "largest lambda")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--to", to, "smallest lambda")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--points", points, "grid size")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--fixed-tau", fixed_tau, "sweep the fixed-scale problem")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--warm", warm, "start each point from the previous solution");
  sweep_cmd->add_option("--out", out_path, "path CSV")->required();

  UegSpec gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-problem", "write a synthetic UEG problem");
  gen_cmd->add_option("--out", out_path, "problem JSON")->required();
  gen_cmd->add_option("--m", gen.m, "imaginary-time samples")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "frequency nodes")->capture_default_str();
  gen_cmd->add_option("--beta-temp", gen.beta_temp, "inverse temperature")->capture_default_str();
  gen_cmd->add_option("--scale", gen.scale_Z, "total mass Z of the truth")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise_rel, "relative noise level")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "noise seed")->capture_default_str();
  gen_cmd->add_option("--lambda", gen.lambda, "lambda stored in the file")->capture_default_str();

  std::string which;
  std::string out_dir;
  if (const char* env = std::getenv("SCALESHAPE_OUT_DIR")) out_dir = env;
  if (out_dir.empty()) out_dir = "scaleshape-out";
  std::uint64_t seed = UegSpec{}.seed;
  CLI::App* run_cmd = app.add_subcommand("run", "run a UEG experiment");
  run_cmd->add_option("experiment", which, "overflow | scale | path")
      ->required()
      ->check(CLI::IsMember({"overflow", "scale", "path"}));
  run_cmd->add_option("--out-dir", out_dir, "output directory (default: $SCALESHAPE_OUT_DIR)")->capture_default_str();
  run_cmd->add_option("--seed", seed, "noise seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return cmd_solve(problem_path, sf, method, fixed_tau, trace_out);
    if (*cert_cmd) return cmd_certificates(problem_path, sf, beta_factor, as_json);
    if (*sens_cmd) return cmd_sensitivity(problem_path, sf, check_fd);
    if (*sweep_cmd) return cmd_sweep(problem_path, sf, from, to, points, fixed_tau, warm, out_path);
    if (*gen_cmd) return cmd_gen(out_path, gen);
    if (*run_cmd) return cmd_run(which, out_dir, seed);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid %s: %s\n", e.field().c_str(), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
