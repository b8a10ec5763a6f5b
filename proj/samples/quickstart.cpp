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

// Solves a small synthetic UEG problem from tau0 = 1 and prints the
// recovered scale next to the true one.

#include <cstdio>

#include "scaleshape/solver.hpp"
#include "scaleshape/ueg.hpp"

int main() {
  scaleshape::UegSpec spec;
  spec.m = 51;
  spec.n = 120;
  spec.scale_Z = 10.0;
  spec.lambda = 1e-5;
  const scaleshape::UegInstance inst = scaleshape::gen_ueg(spec);

  const scaleshape::SolveReport rep = scaleshape::solve(inst.problem, scaleshape::SolverConfig{});
  for (const auto& rec : rep.trace) {
    std::printf("k=%2d  rho=%.3e  tau=%.6g  alpha=%g\n", rec.k, rec.rho, rec.tau, rec.alpha);
  }
  std::printf("%s after %d iterations: tau = %.6g (true %.6g)\n", scaleshape::to_string(rep.status),
              rep.iterations(), rep.z_final.tau, spec.scale_Z);
  return rep.converged() ? 0 : 1;
}
