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

#include <optional>
#include <stdexcept>
#include <vector>

#include "detcol/linalg.hpp"
#include "detcol/model.hpp"

namespace detcol {

/// Fixed-step RK4 settings. Times are absolute; `kappa` must match the
/// measurement context it is used with.
struct TrajectoryConfig {
  double kappa = 1.0;
  double t_start = 0.0;
  double t_end = 20.0;
  double step = 1e-3;
  int record_every = 500;
  bool include_hamiltonian = false;

  /// Throws std::invalid_argument unless t_end > t_start, step > 0,
  /// record_every >= 1 and step * kappa <= 0.1.
  void validate() const;
};

/// Recording grid of a trajectory under `cfg`: t_start, every
/// record_every-th step, and t_end.
std::vector<double> recording_times(const TrajectoryConfig& cfg);

/// Raised when the integrator produces an invalid state or detects trace
/// drift; carries the trajectory time at which validation failed.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// One deterministic collapse trajectory: states recorded on the grid of
/// recording_times(), in the coordinates the initial state was given in.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::optional<HiddenVariables> hidden;
  std::optional<int> outcome_predicted;  // 1..N
  Matrix basis;                          // detector eigenstates as columns

  const DensityMatrix& final_state() const { return states.back(); }
};

/// Right-hand side of the collapse master equation:
/// -i [H, rho] (only when include_hamiltonian) plus kappa times the sum of
/// single-transition dissipators of `ops`. The result is Hermitian and
/// traceless.
Matrix master_rhs(const DensityMatrix& rho, const MeasurementContext& ctx,
                  const LindbladSet& ops, bool include_hamiltonian = false);

/// Integrates the master equation for one hidden-variable draw. The initial
/// state must be pure; the sigma cascade of its branch amplitudes fixes the
/// jump operators for the whole trajectory and the predicted outcome.
Trajectory integrate(const DensityMatrix& rho0, const MeasurementContext& ctx,
                     const HiddenVariables& hv, const TrajectoryConfig& cfg);

/// Integration with an explicit jump-operator set; accepts any valid
/// initial state. Used when the operator signs are pinned directly instead
/// of derived from a draw.
Trajectory integrate(const DensityMatrix& rho0, const MeasurementContext& ctx,
                     const LindbladSet& ops, const TrajectoryConfig& cfg,
                     std::optional<int> predicted_outcome = std::nullopt,
                     std::optional<HiddenVariables> hv = std::nullopt);

/// Index K if the final state is within trace distance `tol` of exactly one
/// detector projector |K><K|; std::nullopt when not collapsed.
std::optional<int> asymptotic_outcome(const Trajectory& traj,
                                      double tol = tol::kCollapse);

}  // namespace detcol
