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

#include "detcol/statistics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "detcol/rng.hpp"

namespace detcol {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

// Samples are processed in fixed chunks; chunk accumulators are merged in
// chunk order so that any thread schedule reproduces the serial result
// bit for bit.
constexpr std::int64_t kChunkSamples = 64;

// Welford running moments per matrix element; exact zero spread for
// bit-identical samples, no cancellation in the variance.
struct MomentSeries {
  std::vector<Matrix> mean;
  std::vector<RealMatrix> m2_re, m2_im;

  void init(std::size_t n_times, int rows) {
    mean.assign(n_times, Matrix::Zero(rows, rows));
    m2_re.assign(n_times, RealMatrix::Zero(rows, rows));
    m2_im.assign(n_times, RealMatrix::Zero(rows, rows));
  }

  void reset() {
    for (auto& m : mean) m.setZero();
    for (auto& m : m2_re) m.setZero();
    for (auto& m : m2_im) m.setZero();
  }

  void add(std::size_t k, const Matrix& x, std::int64_t n) {
    const Matrix delta = x - mean[k];
    mean[k] += delta / static_cast<double>(n);
    const Matrix delta2 = x - mean[k];
    m2_re[k].array() += delta.real().array() * delta2.real().array();
    m2_im[k].array() += delta.imag().array() * delta2.imag().array();
  }

  void merge(const MomentSeries& o, std::int64_t n_mine, std::int64_t n_other) {
    if (n_other == 0) return;
    const double na = static_cast<double>(n_mine);
    const double nb = static_cast<double>(n_other);
    const double n = na + nb;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const Matrix delta = o.mean[k] - mean[k];
      mean[k] += delta * (nb / n);
      m2_re[k].array() += o.m2_re[k].array() +
                          delta.real().array().square() * (na * nb / n);
      m2_im[k].array() += o.m2_im[k].array() +
                          delta.imag().array().square() * (na * nb / n);
    }
  }
};

struct Accumulator {
  std::vector<std::int64_t> counts;
  std::int64_t collapsed = 0;
  std::int64_t not_collapsed = 0;
  std::int64_t mismatches = 0;
  std::int64_t n_stats = 0;  // samples folded into the moment series
  double max_final_distance = 0.0;

  MomentSeries states, reduced_a, reduced_b;
  bool with_reduced = false;

  void init(int dim, std::size_t n_times, std::optional<std::pair<int, int>> parts) {
    counts.assign(dim, 0);
    states.init(n_times, dim);
    with_reduced = parts.has_value();
    if (parts) {
      reduced_a.init(n_times, parts->first);
      reduced_b.init(n_times, parts->second);
    }
  }

  void reset() {
    std::fill(counts.begin(), counts.end(), 0);
    collapsed = not_collapsed = mismatches = 0;
    n_stats = 0;
    max_final_distance = 0.0;
    states.reset();
    reduced_a.reset();
    reduced_b.reset();
  }

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    collapsed += o.collapsed;
    not_collapsed += o.not_collapsed;
    mismatches += o.mismatches;
    max_final_distance = std::max(max_final_distance, o.max_final_distance);
    states.merge(o.states, n_stats, o.n_stats);
    if (with_reduced) {
      reduced_a.merge(o.reduced_a, n_stats, o.n_stats);
      reduced_b.merge(o.reduced_b, n_stats, o.n_stats);
    }
    n_stats += o.n_stats;
  }
};

struct EnsembleJob {
  const StateVector& psi_p;
  const MeasurementContext& ctx;
  const EnsembleConfig& cfg;
  BranchAmplitudes alpha;
  std::optional<DensityMatrix> rho0;
  std::vector<DensityMatrix> projectors;
  std::size_t n_times = 0;
  std::vector<int> part_dims;

  EnsembleJob(const StateVector& psi, const MeasurementContext& context,
              const EnsembleConfig& config)
      : psi_p(psi),
        ctx(context),
        cfg(config),
        alpha(compute_branch_amplitudes(psi, context)) {
    if (cfg.mode == EnsembleMode::FullIntegration) {
      rho0 = DensityMatrix::pure(psi_p);
      n_times = recording_times(cfg.dynamics).size();
      projectors.reserve(ctx.dim());
      for (int k = 1; k <= ctx.dim(); ++k) {
        projectors.push_back(DensityMatrix::pure(ctx.basis_state(k)));
      }
      if (cfg.bipartition) {
        part_dims = {cfg.bipartition->first, cfg.bipartition->second};
      }
    }
  }

  void run_sample(std::int64_t index, Accumulator& acc) const {
    auto rng = make_sample_rng(cfg.seed, static_cast<std::uint64_t>(index));
    const HiddenVariables hv =
        sample_hidden_variables(ctx.dim(), rng, cfg.sampler);
    const SigmaCascade sig = compute_sigma_cascade(alpha, hv);
    const int predicted = predict_outcome(sig);

    if (cfg.mode == EnsembleMode::CascadeOnly) {
      ++acc.counts[predicted - 1];
      return;
    }

    Trajectory traj;
    try {
      traj = integrate(*rho0, ctx, build_lindblad_set(sig, ctx), cfg.dynamics,
                       predicted, hv);
    } catch (const IntegrationError& e) {
      std::ostringstream os;
      os << "sample " << index << ": " << e.what();
      throw IntegrationError(os.str(), e.time());
    }

    ++acc.n_stats;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const Matrix& s = traj.states[k].matrix();
      acc.states.add(k, s, acc.n_stats);
      if (!part_dims.empty()) {
        acc.reduced_a.add(k, partial_trace(s, part_dims, 0), acc.n_stats);
        acc.reduced_b.add(k, partial_trace(s, part_dims, 1), acc.n_stats);
      }
    }

    const double dist =
        trace_distance(traj.final_state(), projectors[predicted - 1]);
    acc.max_final_distance = std::max(acc.max_final_distance, dist);
    if (const auto outcome = asymptotic_outcome(traj)) {
      ++acc.collapsed;
      ++acc.counts[*outcome - 1];
      if (*outcome != predicted) ++acc.mismatches;
    } else {
      ++acc.not_collapsed;
      ++acc.counts[predicted - 1];
    }
  }

  void run_chunk(std::int64_t chunk, Accumulator& acc) const {
    const std::int64_t begin = chunk * kChunkSamples;
    const std::int64_t end = std::min(begin + kChunkSamples, cfg.samples);
    for (std::int64_t i = begin; i < end; ++i) run_sample(i, acc);
  }
};

ElementStats finalize_stats(const MomentSeries& series, std::size_t k,
                            std::int64_t m) {
  ElementStats stats;
  stats.mean = series.mean[k];
  const double inv = 1.0 / static_cast<double>(m);
  // standard error of the mean: sqrt(population variance / m)
  stats.se_real = (series.m2_re[k] * inv * inv).cwiseMax(0.0).cwiseSqrt();
  stats.se_imag = (series.m2_im[k] * inv * inv).cwiseMax(0.0).cwiseSqrt();
  return stats;
}

void run_chunks_serial(const EnsembleJob& job, std::int64_t n_chunks,
                       Accumulator& global) {
  Accumulator local;
  local.init(job.ctx.dim(), job.n_times, job.cfg.bipartition);
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    local.reset();
    job.run_chunk(c, local);
    global.merge(local);
  }
}

void run_chunks_parallel(const EnsembleJob& job, std::int64_t n_chunks,
                         Accumulator& global) {
  std::atomic<std::int64_t> next_chunk{0};
  std::atomic<std::int64_t> next_merge{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::int64_t error_sample = std::numeric_limits<std::int64_t>::max();

#pragma omp parallel
  {
    Accumulator local;
    local.init(job.ctx.dim(), job.n_times, job.cfg.bipartition);
    while (!failed.load(std::memory_order_acquire)) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      local.reset();
      try {
        job.run_chunk(c, local);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        const std::int64_t first_sample = c * kChunkSamples;
        if (first_sample < error_sample) {
          error_sample = first_sample;
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_release);
        break;
      }
      // Merge strictly in chunk order.
      while (next_merge.load(std::memory_order_acquire) != c) {
        if (failed.load(std::memory_order_acquire)) break;
        std::this_thread::yield();
      }
      if (failed.load(std::memory_order_acquire)) break;
      global.merge(local);
      next_merge.store(c + 1, std::memory_order_release);
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void EnsembleConfig::validate() const {
  if (samples < 1) fail("EnsembleConfig: samples must be >= 1");
  sampler.validate();
  if (mode == EnsembleMode::FullIntegration) dynamics.validate();
  if (bipartition) {
    if (bipartition->first < 2 || bipartition->second < 2) {
      fail("EnsembleConfig: bipartition factors must have dimension >= 2");
    }
  }
}

int EnsembleResult::time_index(double t) const {
  if (times.empty()) fail("EnsembleResult: no recorded times");
  int best = 0;
  for (int k = 1; k < static_cast<int>(times.size()); ++k) {
    if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
  }
  return best;
}

EnsembleResult run_ensemble(const StateVector& psi_p,
                            const MeasurementContext& ctx,
                            const EnsembleConfig& cfg, Execution exec) {
  cfg.validate();
  if (psi_p.dim() != ctx.dim()) fail("run_ensemble: dimension mismatch");
  if (cfg.bipartition &&
      cfg.bipartition->first * cfg.bipartition->second != ctx.dim()) {
    fail("run_ensemble: bipartition does not factor the dimension");
  }

  const EnsembleJob job(psi_p, ctx, cfg);
  Accumulator global;
  global.init(ctx.dim(), job.n_times, cfg.bipartition);

  const std::int64_t n_chunks =
      (cfg.samples + kChunkSamples - 1) / kChunkSamples;
  if (exec == Execution::Parallel) {
    run_chunks_parallel(job, n_chunks, global);
  } else {
    run_chunks_serial(job, n_chunks, global);
  }

  EnsembleResult result;
  result.dim = ctx.dim();
  result.samples = cfg.samples;
  result.mode = cfg.mode;
  result.counts = global.counts;
  result.born_reference.resize(ctx.dim());
  for (int k = 1; k <= ctx.dim(); ++k) {
    result.born_reference[k - 1] = exact_outcome_probability(job.alpha, k);
  }
  const ChiSquareResult chi = chi_square_gof(result.counts, result.born_reference);
  result.chi_square = chi.statistic;
  result.p_value = chi.p_value;

  if (cfg.mode == EnsembleMode::FullIntegration) {
    result.times = recording_times(cfg.dynamics);
    result.hamiltonian_included = cfg.dynamics.include_hamiltonian;
    result.collapsed = global.collapsed;
    result.not_collapsed = global.not_collapsed;
    result.prediction_mismatches = global.mismatches;
    result.max_final_distance = global.max_final_distance;
    result.averaged_states.reserve(job.n_times);
    for (std::size_t k = 0; k < job.n_times; ++k) {
      result.averaged_states.push_back(
          finalize_stats(global.states, k, cfg.samples));
    }
    if (cfg.bipartition) {
      result.reduced_a.reserve(job.n_times);
      result.reduced_b.reserve(job.n_times);
      for (std::size_t k = 0; k < job.n_times; ++k) {
        result.reduced_a.push_back(finalize_stats(global.reduced_a, k, cfg.samples));
        result.reduced_b.push_back(finalize_stats(global.reduced_b, k, cfg.samples));
      }
    }
  }
  return result;
}

DensityMatrix averaged_density_matrix(const EnsembleResult& result, double t) {
  if (result.mode != EnsembleMode::FullIntegration) {
    fail("averaged_density_matrix: requires a full-integration ensemble");
  }
  return DensityMatrix::from_matrix(
      result.averaged_states[result.time_index(t)].mean);
}

NoSignallingReport no_signalling_check(const EnsembleResult& result,
                                       std::pair<int, int> dims) {
  if (result.mode != EnsembleMode::FullIntegration) {
    fail("no_signalling_check: requires a full-integration ensemble");
  }
  if (result.reduced_a.empty() ||
      dims.first * dims.second != result.dim ||
      static_cast<int>(result.reduced_a[0].mean.rows()) != dims.first ||
      static_cast<int>(result.reduced_b[0].mean.rows()) != dims.second) {
    fail("no_signalling_check: dims mismatch with the ensemble bipartition");
  }
  if (result.hamiltonian_included) {
    fail("no_signalling_check: reference is defined for kappa-dominated runs "
         "(Hamiltonian omitted)");
  }

  NoSignallingReport report;
  report.max_excess = -std::numeric_limits<double>::infinity();

  const auto scan = [&report](const std::vector<ElementStats>& series,
                              double& max_dev) {
    const Matrix& ref = series[0].mean;
    for (const ElementStats& stats : series) {
      for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        for (Eigen::Index j = 0; j < ref.cols(); ++j) {
          const Complex delta = stats.mean(i, j) - ref(i, j);
          max_dev = std::max(max_dev, std::abs(delta));
          const double band_re =
              report.band_sigmas * stats.se_real(i, j) + report.band_floor;
          const double band_im =
              report.band_sigmas * stats.se_imag(i, j) + report.band_floor;
          report.max_excess = std::max(
              {report.max_excess, std::abs(delta.real()) - band_re,
               std::abs(delta.imag()) - band_im});
        }
      }
    }
  };
  scan(result.reduced_a, report.max_deviation_a);
  scan(result.reduced_b, report.max_deviation_b);
  report.pass = report.max_excess <= 0.0;
  return report;
}

double skewed_outcome_probability(const BranchAmplitudes& alphas, double r) {
  if (alphas.dim() != 2) {
    fail("skewed_outcome_probability: defined for two-level systems");
  }
  if (!(r > 0.0 && r <= 1.0)) {
    fail("skewed_outcome_probability: radius must be in (0, 1]");
  }
  const double threshold = 1.0 - alphas.weight(2);  // ring |lambda|^2 > this
  return std::max(0.0, (r * r - threshold) / (r * r));
}

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts,
                               const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty()) {
    fail("chi_square_gof: counts and probabilities must match");
  }
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  if (total < 1) fail("chi_square_gof: empty histogram");

  bool impossible_outcome = false;
  std::vector<std::pair<double, double>> bins;  // (expected, observed)
  double pooled_expected = 0.0, pooled_observed = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double expected = probs[k] * static_cast<double>(total);
    const double observed = static_cast<double>(counts[k]);
    if (expected <= 0.0) {
      if (observed > 0.0) impossible_outcome = true;
      continue;
    }
    if (expected < 5.0) {
      pooled_expected += expected;
      pooled_observed += observed;
    } else {
      bins.emplace_back(expected, observed);
    }
  }
  if (pooled_expected > 0.0) {
    if (pooled_expected < 5.0 && !bins.empty()) {
      // fold the small pool into the smallest regular bin
      auto smallest = std::min_element(bins.begin(), bins.end());
      smallest->first += pooled_expected;
      smallest->second += pooled_observed;
    } else {
      bins.emplace_back(pooled_expected, pooled_observed);
    }
  }

  ChiSquareResult result;
  if (impossible_outcome) {
    result.statistic = std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    result.dof = std::max<int>(1, static_cast<int>(bins.size()) - 1);
    return result;
  }
  for (const auto& [expected, observed] : bins) {
    const double diff = observed - expected;
    result.statistic += diff * diff / expected;
  }
  result.dof = static_cast<int>(bins.size()) - 1;
  result.p_value =
      result.dof >= 1
          ? boost::math::gamma_q(0.5 * result.dof, 0.5 * result.statistic)
          : 1.0;
  return result;
}

}  // namespace detcol
