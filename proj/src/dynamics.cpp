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

#include "detcol/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace detcol {

namespace {

constexpr Complex kImag(0.0, 1.0);

// The jump operators are single basis transitions, so the dissipator sum
// reduces to elementwise damping plus diagonal gain routing:
//   d rho_ij = -kappa/2 (out_i + out_j) rho_ij  +  delta_ij kappa sum gains,
// where out_i counts operators draining state i and each operator
// |a><b| feeds kappa * rho_bb into rho_aa.
struct MasterOperator {
  Matrix damping;                            // kappa/2 * (out_i + out_j)
  std::vector<std::pair<int, int>> gains;    // (to, from), zero-based
  double kappa = 0.0;
  Matrix h;                                  // model-basis Hamiltonian
  bool with_h = false;

  MasterOperator(const LindbladSet& ops, const MeasurementContext& ctx,
                 double kappa_in, bool include_h)
      : kappa(kappa_in), with_h(include_h) {
    const int n = ops.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    gains.reserve(ops.size());
    for (const Transition& t : ops.transitions()) {
      out(t.from - 1) += 1.0;
      gains.emplace_back(t.to - 1, t.from - 1);
    }
    damping.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        damping(i, j) = Complex(0.5 * kappa * (out(i) + out(j)), 0.0);
      }
    }
    if (with_h) {
      h = ctx.has_computational_basis()
              ? ctx.hamiltonian()
              : Matrix(ctx.basis().adjoint() * ctx.hamiltonian() * ctx.basis());
    }
  }

  void eval(const Matrix& rho, Matrix& out, Matrix& scratch) const {
    out.array() = -damping.array() * rho.array();
    for (const auto& [to, from] : gains) {
      out(to, to) += kappa * rho(from, from);
    }
    if (with_h) {
      scratch.noalias() = h * rho;
      scratch.noalias() -= rho * h;
      out -= kImag * scratch;
    }
  }
};

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

void check_common(const DensityMatrix& rho0, const MeasurementContext& ctx,
                  const TrajectoryConfig& cfg) {
  cfg.validate();
  if (rho0.dim() != ctx.dim()) fail("integrate: dimension mismatch");
  if (std::abs(cfg.kappa - ctx.kappa()) >
      1e-12 * std::max(1.0, ctx.kappa())) {
    fail("integrate: TrajectoryConfig.kappa differs from the context kappa");
  }
}

struct StepPlan {
  std::int64_t full_steps = 0;
  double tail = 0.0;
  bool has_tail = false;
};

StepPlan plan_steps(const TrajectoryConfig& cfg) {
  StepPlan plan;
  const double span = cfg.t_end - cfg.t_start;
  const double ratio = span / cfg.step;
  const auto rounded = static_cast<std::int64_t>(std::llround(ratio));
  if (rounded >= 1 && std::abs(span - static_cast<double>(rounded) * cfg.step) <=
                          1e-9 * std::max(1.0, span)) {
    plan.full_steps = rounded;  // span is an integer number of steps
    return plan;
  }
  plan.full_steps = static_cast<std::int64_t>(std::floor(ratio));
  plan.tail = span - static_cast<double>(plan.full_steps) * cfg.step;
  plan.has_tail = plan.tail > 1e-12 * std::max(1.0, span);
  if (plan.full_steps == 0 && !plan.has_tail) {
    plan.tail = span;  // span shorter than one step
    plan.has_tail = true;
  }
  return plan;
}

}  // namespace

void TrajectoryConfig::validate() const {
  if (!(kappa >= 0.0)) fail("TrajectoryConfig: kappa must be non-negative");
  if (!(t_end > t_start)) fail("TrajectoryConfig: t_end must exceed t_start");
  if (!(step > 0.0)) fail("TrajectoryConfig: step must be positive");
  if (record_every < 1) fail("TrajectoryConfig: record_every must be >= 1");
  if (step * kappa > 0.1 + 1e-15) {
    std::ostringstream os;
    os << "TrajectoryConfig: step too large for explicit integration "
          "(step * kappa = "
       << step * kappa << " > 0.1)";
    fail(os.str());
  }
}

std::vector<double> recording_times(const TrajectoryConfig& cfg) {
  cfg.validate();
  const StepPlan plan = plan_steps(cfg);
  std::vector<double> times;
  for (std::int64_t i = 0; i <= plan.full_steps; i += cfg.record_every) {
    times.push_back(cfg.t_start + static_cast<double>(i) * cfg.step);
  }
  if (plan.has_tail || plan.full_steps % cfg.record_every != 0) {
    times.push_back(cfg.t_end);
  } else {
    times.back() = cfg.t_end;  // label the final full step with t_end
  }
  return times;
}

Matrix master_rhs(const DensityMatrix& rho, const MeasurementContext& ctx,
                  const LindbladSet& ops, bool include_hamiltonian) {
  if (rho.dim() != ctx.dim() || ops.dim() != ctx.dim()) {
    fail("master_rhs: dimension mismatch");
  }
  const bool transform = !ctx.has_computational_basis();
  const Matrix& b = ctx.basis();
  Matrix state =
      transform ? Matrix(b.adjoint() * rho.matrix() * b) : rho.matrix();
  const MasterOperator op(ops, ctx, ctx.kappa(), include_hamiltonian);
  Matrix out(ctx.dim(), ctx.dim());
  Matrix scratch(ctx.dim(), ctx.dim());
  op.eval(state, out, scratch);
  if (transform) out = b * out * b.adjoint();
  return out;
}

Trajectory integrate(const DensityMatrix& rho0, const MeasurementContext& ctx,
                     const HiddenVariables& hv, const TrajectoryConfig& cfg) {
  check_common(rho0, ctx, cfg);
  const BranchAmplitudes alphas =
      compute_branch_amplitudes(rho0.principal_state(), ctx);
  const SigmaCascade sig = compute_sigma_cascade(alphas, hv);
  return integrate(rho0, ctx, build_lindblad_set(sig, ctx), cfg,
                   predict_outcome(sig), hv);
}

Trajectory integrate(const DensityMatrix& rho0, const MeasurementContext& ctx,
                     const LindbladSet& ops, const TrajectoryConfig& cfg,
                     std::optional<int> predicted_outcome,
                     std::optional<HiddenVariables> hv) {
  check_common(rho0, ctx, cfg);
  if (ops.dim() != ctx.dim()) fail("integrate: operator set dimension mismatch");

  const int n = ctx.dim();
  const bool transform = !ctx.has_computational_basis();
  const Matrix& b = ctx.basis();

  Trajectory traj;
  traj.hidden = std::move(hv);
  traj.outcome_predicted = predicted_outcome;
  traj.basis = b;

  Matrix rho = transform ? Matrix(b.adjoint() * rho0.matrix() * b)
                         : rho0.matrix();
  const MasterOperator op(ops, ctx, cfg.kappa, cfg.include_hamiltonian);

  Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n), scratch(n, n);

  auto record = [&](double t) {
    Matrix out = transform ? Matrix(b * rho * b.adjoint()) : rho;
    const double drift = std::abs(out.trace() - Complex(1.0, 0.0));
    if (drift > tol::kTraceDrift) {
      std::ostringstream os;
      os << "integrate: trace drift " << drift << " at t = " << t;
      throw IntegrationError(os.str(), t);
    }
    try {
      traj.states.push_back(DensityMatrix::from_matrix(std::move(out)));
    } catch (const std::invalid_argument& e) {
      std::ostringstream os;
      os << "integrate: invalid state at t = " << t << ": " << e.what();
      throw IntegrationError(os.str(), t);
    }
    traj.times.push_back(t);
  };

  auto rk4_step = [&](double h) {
    op.eval(rho, k1, scratch);
    stage = rho + (0.5 * h) * k1;
    op.eval(stage, k2, scratch);
    stage = rho + (0.5 * h) * k2;
    op.eval(stage, k3, scratch);
    stage = rho + h * k3;
    op.eval(stage, k4, scratch);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const StepPlan plan = plan_steps(cfg);
  record(cfg.t_start);
  for (std::int64_t i = 1; i <= plan.full_steps; ++i) {
    rk4_step(cfg.step);
    const bool last = (i == plan.full_steps) && !plan.has_tail;
    if (i % cfg.record_every == 0 && !last) {
      record(cfg.t_start + static_cast<double>(i) * cfg.step);
    } else if (last) {
      record(cfg.t_end);
    }
  }
  if (plan.has_tail) {
    rk4_step(plan.tail);
    record(cfg.t_end);
  }
  return traj;
}

std::optional<int> asymptotic_outcome(const Trajectory& traj, double tol) {
  const DensityMatrix& final = traj.final_state();
  std::optional<int> found;
  for (int k = 1; k <= final.dim(); ++k) {
    const DensityMatrix projector =
        DensityMatrix::pure(StateVector(traj.basis.col(k - 1)));
    if (trace_distance(final, projector) <= tol) {
      if (found) return std::nullopt;  // ambiguous
      found = k;
    }
  }
  return found;
}

}  // namespace detcol
