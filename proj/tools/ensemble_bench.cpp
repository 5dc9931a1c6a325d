// Copyright 2026 The detcol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark of the ensemble runner: serial reference vs OpenMP kernel.
// The two paths must agree bit for bit; the benchmark verifies that while
// timing both.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "detcol/statistics.hpp"

using namespace detcol;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double max_mean_difference(const EnsembleResult& a, const EnsembleResult& b) {
  double diff = 0.0;
  for (std::size_t k = 0; k < a.averaged_states.size(); ++k) {
    diff = std::max(diff, (a.averaged_states[k].mean - b.averaged_states[k].mean)
                              .cwiseAbs()
                              .maxCoeff());
  }
  return diff;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detcol ensemble benchmark (serial vs OpenMP)"};
  int dimension = 4;
  std::int64_t samples = 2000;
  std::uint64_t seed = 7;
  double t_end = 20.0;
  double step = 5e-3;
  bool cascade = false;
  app.add_option("--dimension", dimension, "System dimension");
  app.add_option("--samples", samples, "Hidden-variable draws");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--t-end", t_end, "Integration span in units of 1/kappa");
  app.add_option("--step", step, "RK4 step in units of 1/kappa");
  app.add_flag("--cascade", cascade, "Cascade-only mode (no integration)");
  CLI11_PARSE(app, argc, argv);

  const MeasurementContext ctx = MeasurementContext::standard(dimension, 1.0);
  Vector amps = Vector::Constant(dimension, Complex(1.0, 0.0));
  amps /= amps.norm();
  const StateVector psi(amps);

  EnsembleConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.mode = cascade ? EnsembleMode::CascadeOnly : EnsembleMode::FullIntegration;
  cfg.dynamics.t_end = t_end;
  cfg.dynamics.step = step;
  cfg.dynamics.record_every = 1000;

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("dimension=%d samples=%lld mode=%s threads=%d\n", dimension,
              static_cast<long long>(samples), cascade ? "cascade" : "full",
              threads);

  auto t0 = std::chrono::steady_clock::now();
  const EnsembleResult serial = run_ensemble(psi, ctx, cfg, Execution::Serial);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const EnsembleResult parallel =
      run_ensemble(psi, ctx, cfg, Execution::Parallel);
  const double t_parallel = seconds_since(t0);

  bool identical = serial.counts == parallel.counts;
  double mean_diff = 0.0;
  if (!cascade) {
    mean_diff = max_mean_difference(serial, parallel);
    identical = identical && mean_diff == 0.0;
  }

  std::printf("serial    %.3f s\n", t_serial);
  std::printf("parallel  %.3f s  (speedup %.2fx)\n", t_parallel,
              t_serial / t_parallel);
  std::printf("results identical: %s (max mean diff %.3g)\n",
              identical ? "yes" : "NO", mean_diff);
  return identical ? 0 : 1;
}
