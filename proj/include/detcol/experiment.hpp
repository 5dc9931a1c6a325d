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
#include <stdexcept>
#include <string>
#include <vector>

#include "detcol/linalg.hpp"
#include "detcol/model.hpp"
#include "detcol/statistics.hpp"

namespace detcol {

inline constexpr char kToolName[] = "detcol";
inline constexpr char kToolVersion[] = "0.1.0";

enum class ExperimentKind {
  BornTest,
  CollapseTrajectory,
  SingletNoSignal,
  SkewedBorn,
};

std::string to_string(ExperimentKind kind);
const std::vector<std::string>& experiment_kind_names();

/// Malformed configuration document (syntax, unknown or duplicate keys,
/// unparseable values). Mapped to exit code 2 by the CLI.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed document with invalid contents (bad normalisation, ranges,
/// inapplicable keys for the chosen experiment). Exit code 3.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved experiment configuration. Times are expressed in units of
/// 1/kappa so documents are invariant under rescaling kappa.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::BornTest;
  int dimension = 0;
  std::vector<Complex> amplitudes;  // detector-basis amplitudes at t_p
  std::optional<Matrix> hamiltonian;
  bool include_hamiltonian = false;
  double q = 0.5;                 // singlet weight
  double kappa = 1.0;
  double t_end = 20.0;            // units of 1/kappa
  double step = 1e-3;             // units of 1/kappa
  int record_every = 500;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  Sampler sampler{};
  EnsembleMode mode = EnsembleMode::CascadeOnly;
  std::optional<std::vector<Complex>> lambda;  // fixed draw, collapse-trajectory
  std::string out_dir = "results";
  std::vector<std::string> warnings;  // recorded during parsing
};

/// Parses a flat key = value document. Unknown keys, duplicates and
/// malformed values raise ParseError; semantic violations raise SpecError.
/// Amplitudes with norm defect <= 1e-9 are renormalised (with a warning
/// above 1e-12); larger defects are rejected.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec parse_spec_file(const std::string& path);

/// Executes the experiment and writes manifest.json, summary.json and the
/// tabular trajectory files into spec.out_dir. Returns the process exit
/// code (0 on success); numerical failures propagate as IntegrationError.
int run(const ExperimentSpec& spec);

/// 17-significant-digit decimal rendering used for all tabular output;
/// round-trips 64-bit floats exactly.
std::string format_float(double value);

}  // namespace detcol
