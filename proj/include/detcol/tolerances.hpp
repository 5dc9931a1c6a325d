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

namespace detcol::tol {

// State-vector normalisation defect accepted at construction.
inline constexpr double kStateNorm = 1e-12;

// Density-matrix validity thresholds.
inline constexpr double kHermiticity = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kMinEigenvalue = -1e-9;

// Detector basis orthonormality and Hamiltonian hermiticity.
inline constexpr double kOrthonormality = 1e-10;

// Branch amplitudes must satisfy sum |alpha|^2 = 1 to this accuracy.
inline constexpr double kAmplitudeNorm = 1e-10;

// Hidden variables live on the closed unit disk; tiny overshoot from
// round-off in the polar construction is tolerated.
inline constexpr double kUnitDisk = 1e-12;

// Trace drift allowed along an integrated trajectory.
inline constexpr double kTraceDrift = 1e-9;

// Default trace-distance threshold for declaring a trajectory collapsed.
inline constexpr double kCollapse = 1e-6;

// Width of statistical acceptance bands, in standard errors.
inline constexpr double kBandSigmas = 4.0;

// Absolute slack added to statistical bands so that elements with zero
// sample variance are still checked against integrator accuracy.
inline constexpr double kBandFloor = 1e-7;

}  // namespace detcol::tol
