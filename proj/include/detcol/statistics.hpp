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

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "detcol/dynamics.hpp"
#include "detcol/linalg.hpp"
#include "detcol/model.hpp"

namespace detcol {

enum class EnsembleMode { CascadeOnly, FullIntegration };

/// run_ensemble executes the same chunked reduction either on one thread or
/// under OpenMP. Both paths produce bit-identical results for a fixed seed;
/// the serial path is the reference the parallel one is tested against.
enum class Execution { Serial, Parallel };

struct EnsembleConfig {
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  Sampler sampler{};
  TrajectoryConfig dynamics{};
  EnsembleMode mode = EnsembleMode::CascadeOnly;
  /// Tensor factor dimensions (slow, fast) for tracking reduced states of a
  /// bipartite system during full integration.
  std::optional<std::pair<int, int>> bipartition;

  void validate() const;
};

/// Sample mean of a matrix-valued quantity at one recorded time, with the
/// standard error of every element (real and imaginary parts separately).
struct ElementStats {
  Matrix mean;
  RealMatrix se_real;
  RealMatrix se_imag;
};

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

struct EnsembleResult {
  int dim = 0;
  std::int64_t samples = 0;
  EnsembleMode mode = EnsembleMode::CascadeOnly;

  /// counts[k-1] tallies outcome k.
  std::vector<std::int64_t> counts;
  /// Exact outcome probabilities the histogram is tested against.
  std::vector<double> born_reference;
  double chi_square = 0.0;
  double p_value = 1.0;

  // Full-integration mode only.
  std::vector<double> times;
  std::vector<ElementStats> averaged_states;
  std::vector<ElementStats> reduced_a;
  std::vector<ElementStats> reduced_b;
  std::int64_t collapsed = 0;
  std::int64_t not_collapsed = 0;
  std::int64_t prediction_mismatches = 0;
  /// Largest trace distance between a final state and its predicted
  /// projector, over all samples.
  double max_final_distance = 0.0;
  bool hamiltonian_included = false;

  /// Index of the recorded time closest to t.
  int time_index(double t) const;
};

/// M independent hidden-variable draws for the prepared state `psi_p`:
/// cascade outcome histogram, chi-square against the exact probabilities,
/// and (in full-integration mode) the pointwise sample mean of rho(t) with
/// standard errors. Deterministic given (seed, cfg), independent of the
/// execution policy.
EnsembleResult run_ensemble(const StateVector& psi_p,
                            const MeasurementContext& ctx,
                            const EnsembleConfig& cfg,
                            Execution exec = Execution::Parallel);

/// Sample mean of rho at the recorded time nearest to t. Throws
/// std::invalid_argument for cascade-only results.
DensityMatrix averaged_density_matrix(const EnsembleResult& result, double t);

struct NoSignallingReport {
  bool pass = false;
  /// Largest |element deviation| of the reduced matrices from the
  /// no-evolution reference, per subsystem.
  double max_deviation_a = 0.0;
  double max_deviation_b = 0.0;
  /// Largest (deviation - band); non-positive when every element of both
  /// reduced matrices stays inside its band at every recorded time.
  double max_excess = 0.0;
  double band_sigmas = tol::kBandSigmas;
  double band_floor = tol::kBandFloor;
};

/// Checks that the hidden-variable-averaged reduced states of both
/// subsystems stay within their statistical bands of the standard
/// (no-collapse) reduced states at every recorded time. `dims` must equal
/// the bipartition the ensemble was run with.
NoSignallingReport no_signalling_check(const EnsembleResult& result,
                                       std::pair<int, int> dims);

/// Probability of outcome 2 for a two-level system when the hidden
/// variable is drawn uniformly from a disk of radius r in (0, 1]:
/// max(0, (r^2 - (1 - |alpha_2|^2)) / r^2). Reduces to Born's rule at r = 1.
double skewed_outcome_probability(const BranchAmplitudes& alphas, double r);

/// Pearson goodness-of-fit statistic of `counts` against `probs`, merging
/// bins with expected count below 5. Bins with zero expected count and zero
/// observations are dropped; a zero-expected bin with observations yields
/// p = 0.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts,
                               const std::vector<double>& probs);

}  // namespace detcol
