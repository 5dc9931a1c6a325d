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

#include "detcol/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "detcol/closed_form.hpp"
#include "detcol/dynamics.hpp"
#include "detcol/rng.hpp"

namespace detcol {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Document parsing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

struct RawValue {
  std::string text;
  int line = 0;
};

class KeyTable {
 public:
  explicit KeyTable(const std::string& text) {
    int line_no = 0;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
      ++line_no;
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected 'key = value'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": empty key");
      }
      if (entries_.count(key)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": duplicate key '" + key + "'");
      }
      entries_[key] = RawValue{value, line_no};
    }
  }

  std::optional<RawValue> take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    RawValue v = it->second;
    entries_.erase(it);
    return v;
  }

  RawValue require(const std::string& key, const std::string& kind) {
    auto v = take(key);
    if (!v) {
      throw SpecError("missing required key '" + key + "' for " + kind);
    }
    return *v;
  }

  void reject_leftovers() const {
    if (entries_.empty()) return;
    const auto& [key, value] = *entries_.begin();
    throw ParseError("line " + std::to_string(value.line) +
                     ": unknown key '" + key + "'");
  }

  /// Semantic rejection of keys that exist but make no sense for the kind.
  void reject(const std::string& key, const std::string& kind) {
    if (auto v = take(key)) {
      throw SpecError("key '" + key + "' (line " + std::to_string(v->line) +
                      ") is not applicable to " + kind);
    }
  }

 private:
  std::map<std::string, RawValue> entries_;
};

[[noreturn]] void bad_value(const std::string& key, const RawValue& raw,
                            const std::string& why) {
  throw ParseError("line " + std::to_string(raw.line) + ": key '" + key +
                   "': " + why + " (got '" + raw.text + "')");
}

double parse_double(const std::string& key, const RawValue& raw) {
  const std::string t = trim(raw.text);
  double value = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc() || ptr != end) bad_value(key, raw, "expected a number");
  return value;
}

template <typename Int>
Int parse_integer(const std::string& key, const RawValue& raw) {
  const std::string t = trim(raw.text);
  Int value = 0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    bad_value(key, raw, "expected an integer");
  }
  return value;
}

bool parse_bool(const std::string& key, const RawValue& raw) {
  const std::string t = trim(raw.text);
  if (t == "true") return true;
  if (t == "false") return false;
  bad_value(key, raw, "expected true or false");
}

Complex parse_complex(const std::string& key, const RawValue& raw,
                      const std::string& token) {
  const auto parts = split(token, ',');
  if (parts.size() != 2) {
    bad_value(key, raw, "expected 're,im' but found '" + trim(token) + "'");
  }
  const auto number = [&](const std::string& p) {
    return parse_double(key, RawValue{trim(p), raw.line});
  };
  return Complex(number(parts[0]), number(parts[1]));
}

std::vector<Complex> parse_complex_list(const std::string& key,
                                        const RawValue& raw) {
  std::vector<Complex> values;
  for (const std::string& token : split(raw.text, ';')) {
    values.push_back(parse_complex(key, raw, token));
  }
  return values;
}

Matrix parse_matrix(const std::string& key, const RawValue& raw, int dim) {
  const auto rows = split(raw.text, ';');
  if (static_cast<int>(rows.size()) != dim) {
    bad_value(key, raw, "expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    std::istringstream row(rows[i]);
    std::string token;
    int j = 0;
    while (row >> token) {
      if (j >= dim) bad_value(key, raw, "too many entries in a row");
      m(i, j++) = parse_complex(key, raw, token);
    }
    if (j != dim) bad_value(key, raw, "too few entries in a row");
  }
  return m;
}

ExperimentKind parse_kind(const RawValue& raw) {
  const std::string t = trim(raw.text);
  if (t == "born-test") return ExperimentKind::BornTest;
  if (t == "collapse-trajectory") return ExperimentKind::CollapseTrajectory;
  if (t == "singlet-nosignal") return ExperimentKind::SingletNoSignal;
  if (t == "skewed-born") return ExperimentKind::SkewedBorn;
  bad_value("kind", raw, "expected one of born-test, collapse-trajectory, "
                         "singlet-nosignal, skewed-born");
}

EnsembleMode parse_mode(const RawValue& raw) {
  const std::string t = trim(raw.text);
  if (t == "cascade") return EnsembleMode::CascadeOnly;
  if (t == "full") return EnsembleMode::FullIntegration;
  bad_value("mode", raw, "expected cascade or full");
}

void normalize_amplitudes(ExperimentSpec& spec) {
  double total = 0.0;
  for (const Complex& a : spec.amplitudes) total += std::norm(a);
  const double defect = std::abs(total - 1.0);
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "amplitudes: norm defect " << defect << " exceeds 1e-9";
    throw SpecError(os.str());
  }
  const double inv = 1.0 / std::sqrt(total);
  for (Complex& a : spec.amplitudes) a *= inv;
  if (defect > 1e-12) {
    std::ostringstream os;
    os << "amplitudes renormalized (norm defect " << defect << ")";
    spec.warnings.push_back(os.str());
  }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string utc_now_iso() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

json finite_or_string(double value) {
  if (std::isfinite(value)) return value;
  std::ostringstream os;
  os << value;
  return os.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_matrix_header(std::ostream& out, const std::string& prefix, int dim) {
  for (int i = 1; i <= dim; ++i) {
    for (int j = 1; j <= dim; ++j) {
      out << ',' << prefix << "re_" << i << '_' << j << ',' << prefix << "im_"
          << i << '_' << j;
    }
  }
}

void write_matrix_row(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ',' << format_float(m(i, j).real()) << ','
          << format_float(m(i, j).imag());
    }
  }
}

void write_real_matrix_row(std::ostream& out, const RealMatrix& re,
                           const RealMatrix& im) {
  for (Eigen::Index i = 0; i < re.rows(); ++i) {
    for (Eigen::Index j = 0; j < re.cols(); ++j) {
      out << ',' << format_float(re(i, j)) << ',' << format_float(im(i, j));
    }
  }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  auto out = open_output(path);
  const int dim = traj.final_state().dim();
  out << "time";
  write_matrix_header(out, "", dim);
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_float(traj.times[k]);
    write_matrix_row(out, traj.states[k].matrix());
    out << '\n';
  }
}

void write_averaged_csv(const fs::path& path, const EnsembleResult& result) {
  auto out = open_output(path);
  const int dim = result.dim;
  out << "time";
  write_matrix_header(out, "mean_", dim);
  for (int i = 1; i <= dim; ++i) {
    for (int j = 1; j <= dim; ++j) {
      out << ",se_re_" << i << '_' << j << ",se_im_" << i << '_' << j;
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    const ElementStats& stats = result.averaged_states[k];
    out << format_float(result.times[k]);
    write_matrix_row(out, stats.mean);
    write_real_matrix_row(out, stats.se_real, stats.se_imag);
    out << '\n';
  }
}

void write_reduced_csv(const fs::path& path, const EnsembleResult& result) {
  auto out = open_output(path);
  const int da = static_cast<int>(result.reduced_a[0].mean.rows());
  const int db = static_cast<int>(result.reduced_b[0].mean.rows());
  out << "time";
  write_matrix_header(out, "a_mean_", da);
  for (int i = 1; i <= da; ++i) {
    for (int j = 1; j <= da; ++j) {
      out << ",a_se_re_" << i << '_' << j << ",a_se_im_" << i << '_' << j;
    }
  }
  write_matrix_header(out, "b_mean_", db);
  for (int i = 1; i <= db; ++i) {
    for (int j = 1; j <= db; ++j) {
      out << ",b_se_re_" << i << '_' << j << ",b_se_im_" << i << '_' << j;
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    out << format_float(result.times[k]);
    write_matrix_row(out, result.reduced_a[k].mean);
    write_real_matrix_row(out, result.reduced_a[k].se_real,
                          result.reduced_a[k].se_imag);
    write_matrix_row(out, result.reduced_b[k].mean);
    write_real_matrix_row(out, result.reduced_b[k].se_real,
                          result.reduced_b[k].se_imag);
    out << '\n';
  }
}

json complex_list_json(const std::vector<Complex>& values) {
  json list = json::array();
  for (const Complex& v : values) list.push_back({v.real(), v.imag()});
  return list;
}

json manifest_json(const ExperimentSpec& spec) {
  json doc;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["created_utc"] = utc_now_iso();
  json s;
  s["kind"] = to_string(spec.kind);
  s["dimension"] = spec.dimension;
  s["amplitudes"] = complex_list_json(spec.amplitudes);
  if (spec.hamiltonian) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < spec.hamiltonian->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < spec.hamiltonian->cols(); ++j) {
        row.push_back({(*spec.hamiltonian)(i, j).real(),
                       (*spec.hamiltonian)(i, j).imag()});
      }
      rows.push_back(row);
    }
    s["hamiltonian"] = rows;
  }
  s["include_hamiltonian"] = spec.include_hamiltonian;
  if (spec.kind == ExperimentKind::SingletNoSignal) s["q"] = spec.q;
  s["kappa"] = spec.kappa;
  s["t_end_over_kappa"] = spec.t_end;
  s["step_over_kappa"] = spec.step;
  s["record_every"] = spec.record_every;
  s["samples"] = spec.samples;
  s["seed"] = spec.seed;
  s["sampler"] = spec.sampler.describe();
  s["mode"] = spec.mode == EnsembleMode::CascadeOnly ? "cascade" : "full";
  if (spec.lambda) s["lambda"] = complex_list_json(*spec.lambda);
  s["out"] = spec.out_dir;
  doc["spec"] = s;
  doc["warnings"] = spec.warnings;
  return doc;
}

// ---------------------------------------------------------------------------
// Experiment construction
// ---------------------------------------------------------------------------

TrajectoryConfig dynamics_config(const ExperimentSpec& spec) {
  TrajectoryConfig cfg;
  cfg.kappa = spec.kappa;
  cfg.t_start = 0.0;
  cfg.t_end = spec.t_end / spec.kappa;
  cfg.step = spec.step / spec.kappa;
  cfg.record_every = spec.record_every;
  cfg.include_hamiltonian = spec.include_hamiltonian;
  return cfg;
}

MeasurementContext make_context(const ExperimentSpec& spec, Matrix basis) {
  const int n = spec.dimension;
  const Matrix h = spec.hamiltonian ? *spec.hamiltonian : Matrix::Zero(n, n);
  return MeasurementContext(std::move(basis), h, 0.0,
                            spec.t_end / spec.kappa, spec.kappa);
}

/// Detector eigenstates of the two-qubit pair in computational
/// coordinates (qubit A slow, 0 = up): states 1..4 are up/down, down/up,
/// down/down, up/up.
Matrix singlet_basis() {
  Matrix b = Matrix::Zero(4, 4);
  b(1, 0) = 1.0;
  b(2, 1) = 1.0;
  b(3, 2) = 1.0;
  b(0, 3) = 1.0;
  return b;
}

double sampler_outcome2_probability(const BranchAmplitudes& alpha,
                                    const Sampler& sampler) {
  switch (sampler.kind) {
    case Sampler::Kind::UniformDisk:
      return alpha.weight(2);
    case Sampler::Kind::Disk:
      return skewed_outcome_probability(alpha, sampler.radius);
    case Sampler::Kind::Annulus: {
      const double threshold = 1.0 - alpha.weight(2);
      if (threshold >= 1.0) return 0.0;
      const double inner2 = sampler.inner * sampler.inner;
      return (1.0 - std::max(threshold, inner2)) / (1.0 - inner2);
    }
  }
  return 0.0;
}

double binomial_band(double p, std::int64_t m) {
  return tol::kBandSigmas * std::sqrt(p * (1.0 - p) / static_cast<double>(m));
}

json histogram_json(const EnsembleResult& result) {
  json doc;
  doc["counts"] = result.counts;
  json freqs = json::array(), bands = json::array();
  for (int k = 0; k < result.dim; ++k) {
    freqs.push_back(static_cast<double>(result.counts[k]) /
                    static_cast<double>(result.samples));
    bands.push_back(binomial_band(result.born_reference[k], result.samples));
  }
  doc["frequencies"] = freqs;
  doc["born_reference"] = result.born_reference;
  doc["bands"] = bands;
  doc["band_sigmas"] = tol::kBandSigmas;
  doc["chi_square"] = finite_or_string(result.chi_square);
  doc["p_value"] = result.p_value;
  return doc;
}

bool histogram_within_bands(const EnsembleResult& result) {
  for (int k = 0; k < result.dim; ++k) {
    const double p = result.born_reference[k];
    const double freq = static_cast<double>(result.counts[k]) /
                        static_cast<double>(result.samples);
    if (std::abs(freq - p) > binomial_band(p, result.samples)) return false;
  }
  return true;
}

json provenance_json(const ExperimentSpec& spec) {
  json doc;
  doc["kind"] = to_string(spec.kind);
  doc["seed"] = spec.seed;
  doc["samples"] = spec.samples;
  doc["sampler"] = spec.sampler.describe();
  doc["mode"] = spec.mode == EnsembleMode::CascadeOnly ? "cascade" : "full";
  doc["kappa"] = spec.kappa;
  doc["warnings"] = spec.warnings;
  return doc;
}

// ---------------------------------------------------------------------------
// Experiment runners
// ---------------------------------------------------------------------------

int run_born_test(const ExperimentSpec& spec, const fs::path& dir) {
  const MeasurementContext ctx =
      make_context(spec, Matrix::Identity(spec.dimension, spec.dimension));
  const StateVector psi(Eigen::Map<const Vector>(
      spec.amplitudes.data(), static_cast<Eigen::Index>(spec.amplitudes.size())));

  EnsembleConfig cfg;
  cfg.samples = spec.samples;
  cfg.seed = spec.seed;
  cfg.sampler = spec.sampler;
  cfg.dynamics = dynamics_config(spec);
  cfg.mode = spec.mode;
  const EnsembleResult result = run_ensemble(psi, ctx, cfg);

  json summary = provenance_json(spec);
  summary["dimension"] = spec.dimension;
  summary["histogram"] = histogram_json(result);
  const bool in_band = histogram_within_bands(result);
  if (spec.mode == EnsembleMode::FullIntegration) {
    summary["collapse"] = {
        {"collapsed", result.collapsed},
        {"not_collapsed", result.not_collapsed},
        {"prediction_mismatches", result.prediction_mismatches},
        {"max_final_distance", result.max_final_distance},
    };
    write_averaged_csv(dir / "averaged_trajectory.csv", result);
  }
  summary["verdict"] = in_band ? "PASS" : "FAIL";
  write_json(dir / "summary.json", summary);
  std::cout << "born-test: " << summary["verdict"].get<std::string>()
            << " (chi_square=" << result.chi_square
            << ", p_value=" << result.p_value << ")\n";
  return 0;
}

int run_collapse_trajectory(const ExperimentSpec& spec, const fs::path& dir) {
  const MeasurementContext ctx =
      make_context(spec, Matrix::Identity(spec.dimension, spec.dimension));
  const StateVector psi(Eigen::Map<const Vector>(
      spec.amplitudes.data(), static_cast<Eigen::Index>(spec.amplitudes.size())));

  std::optional<HiddenVariables> hv;
  if (spec.lambda) {
    hv.emplace(*spec.lambda);
  } else {
    auto rng = make_sample_rng(spec.seed, 0);
    hv = sample_hidden_variables(spec.dimension, rng, spec.sampler);
  }

  const Trajectory traj =
      integrate(DensityMatrix::pure(psi), ctx, *hv, dynamics_config(spec));
  write_trajectory_csv(dir / "trajectory.csv", traj);

  const int predicted = *traj.outcome_predicted;
  const auto outcome = asymptotic_outcome(traj);
  const double final_distance = trace_distance(
      traj.final_state(), DensityMatrix::pure(ctx.basis_state(predicted)));

  json summary = provenance_json(spec);
  summary["dimension"] = spec.dimension;
  summary["lambda"] = complex_list_json(hv->values());
  summary["outcome_predicted"] = predicted;
  summary["asymptotic_outcome"] =
      outcome ? json(*outcome) : json("not collapsed");
  summary["final_distance_to_predicted"] = final_distance;
  summary["collapse_tolerance"] = tol::kCollapse;
  std::string verdict;
  if (!outcome) {
    verdict = "NOT-COLLAPSED";
  } else {
    verdict = *outcome == predicted ? "COLLAPSED-AS-PREDICTED" : "MISMATCH";
  }
  summary["verdict"] = verdict;
  write_json(dir / "summary.json", summary);
  std::cout << "collapse-trajectory: " << verdict
            << " (outcome_predicted=" << predicted
            << ", final_distance=" << final_distance << ")\n";
  return 0;
}

int run_singlet_nosignal(const ExperimentSpec& spec, const fs::path& dir) {
  const MeasurementContext ctx = make_context(spec, singlet_basis());
  const StateVector detector_state = singlet_state(spec.q);
  const StateVector psi(Vector(ctx.basis() * detector_state.amplitudes()));

  EnsembleConfig cfg;
  cfg.samples = spec.samples;
  cfg.seed = spec.seed;
  cfg.sampler = spec.sampler;
  cfg.dynamics = dynamics_config(spec);
  cfg.mode = spec.mode;
  if (spec.mode == EnsembleMode::FullIntegration) cfg.bipartition = {2, 2};
  const EnsembleResult result = run_ensemble(psi, ctx, cfg);

  json summary = provenance_json(spec);
  summary["q"] = spec.q;
  summary["histogram"] = histogram_json(result);
  bool pass = histogram_within_bands(result);

  if (spec.mode == EnsembleMode::FullIntegration) {
    // Detector-labelled elements sit at permuted computational indices.
    const int map[4] = {1, 2, 3, 0};
    const double q2 = spec.q * spec.q;
    const double off_magnitude = spec.q * std::sqrt(1.0 - q2);
    double max_diag_excess = -1.0, max_off_excess = -1.0;
    for (std::size_t k = 0; k < result.times.size(); ++k) {
      const ElementStats& stats = result.averaged_states[k];
      const double rho11 = stats.mean(map[0], map[0]).real();
      const double band11 =
          tol::kBandSigmas * stats.se_real(map[0], map[0]) + tol::kBandFloor;
      max_diag_excess =
          std::max(max_diag_excess, std::abs(rho11 - q2) - band11);
      const double expected_off =
          off_magnitude * std::exp(-0.5 * spec.kappa * result.times[k]);
      const double off = std::abs(stats.mean(map[0], map[1]));
      const double band12 =
          tol::kBandSigmas * stats.se_real(map[0], map[1]) + tol::kBandFloor;
      max_off_excess =
          std::max(max_off_excess, std::abs(off - expected_off) - band12);
    }
    const NoSignallingReport nosignal = no_signalling_check(result, {2, 2});
    summary["averaged"] = {
        {"rho11_target", q2},
        {"max_diag_excess", max_diag_excess},
        {"off_magnitude_target_t0", off_magnitude},
        {"max_offdiag_excess", max_off_excess},
        {"band_floor", tol::kBandFloor},
    };
    summary["no_signalling"] = {
        {"pass", nosignal.pass},
        {"max_deviation_a", nosignal.max_deviation_a},
        {"max_deviation_b", nosignal.max_deviation_b},
        {"max_excess", nosignal.max_excess},
    };
    summary["collapse"] = {
        {"collapsed", result.collapsed},
        {"not_collapsed", result.not_collapsed},
        {"prediction_mismatches", result.prediction_mismatches},
        {"max_final_distance", result.max_final_distance},
    };
    pass = pass && nosignal.pass && max_diag_excess <= 0.0 &&
           max_off_excess <= 0.0;
    write_averaged_csv(dir / "averaged_trajectory.csv", result);
    write_reduced_csv(dir / "reduced_trajectory.csv", result);
  }

  summary["verdict"] = pass ? "PASS" : "FAIL";
  write_json(dir / "summary.json", summary);
  std::cout << "singlet-nosignal: " << (pass ? "PASS" : "FAIL")
            << " (P(outcome 1) target=" << spec.q * spec.q << ")\n";
  return 0;
}

int run_skewed_born(const ExperimentSpec& spec, const fs::path& dir) {
  const MeasurementContext ctx = make_context(spec, Matrix::Identity(2, 2));
  const StateVector psi(Eigen::Map<const Vector>(
      spec.amplitudes.data(), static_cast<Eigen::Index>(spec.amplitudes.size())));
  const BranchAmplitudes alpha = compute_branch_amplitudes(psi, ctx);

  EnsembleConfig cfg;
  cfg.samples = spec.samples;
  cfg.seed = spec.seed;
  cfg.sampler = spec.sampler;
  cfg.dynamics = dynamics_config(spec);
  cfg.mode = spec.mode;
  const EnsembleResult result = run_ensemble(psi, ctx, cfg);

  const double measured = static_cast<double>(result.counts[1]) /
                          static_cast<double>(result.samples);
  const double predicted = sampler_outcome2_probability(alpha, spec.sampler);
  const double born = alpha.weight(2);
  const double band_predicted = binomial_band(predicted, result.samples);
  const double band_born = binomial_band(born, result.samples);

  std::string verdict;
  if (std::abs(measured - predicted) <= band_predicted) {
    const bool deviates =
        std::abs(predicted - born) > band_predicted + band_born;
    verdict = deviates ? "DEVIATES-AS-PREDICTED" : "MATCHES-BORN";
  } else {
    verdict = "UNEXPECTED";
  }

  json summary = provenance_json(spec);
  summary["histogram"] = histogram_json(result);
  summary["outcome2"] = {
      {"measured", measured},
      {"predicted", predicted},
      {"born", born},
      {"band", band_predicted},
  };
  summary["verdict"] = verdict;
  write_json(dir / "summary.json", summary);
  std::cout << "skewed-born: " << verdict << " (measured=" << measured
            << ", predicted=" << predicted << ", born=" << born << ")\n";
  return 0;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BornTest:
      return "born-test";
    case ExperimentKind::CollapseTrajectory:
      return "collapse-trajectory";
    case ExperimentKind::SingletNoSignal:
      return "singlet-nosignal";
    case ExperimentKind::SkewedBorn:
      return "skewed-born";
  }
  return "unknown";
}

const std::vector<std::string>& experiment_kind_names() {
  static const std::vector<std::string> names = {
      "born-test", "collapse-trajectory", "singlet-nosignal", "skewed-born"};
  return names;
}

std::string format_float(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", value);
  return buffer;
}

ExperimentSpec parse_spec(const std::string& text) {
  KeyTable keys(text);
  ExperimentSpec spec;
  spec.kind = parse_kind(keys.require("kind", "every experiment"));
  const std::string kind_name = to_string(spec.kind);

  // Defaults that depend on the experiment kind.
  switch (spec.kind) {
    case ExperimentKind::BornTest:
      spec.mode = EnsembleMode::CascadeOnly;
      break;
    case ExperimentKind::CollapseTrajectory:
      spec.mode = EnsembleMode::FullIntegration;
      spec.samples = 1;
      break;
    case ExperimentKind::SingletNoSignal:
      spec.mode = EnsembleMode::FullIntegration;
      spec.samples = 10000;
      break;
    case ExperimentKind::SkewedBorn:
      spec.mode = EnsembleMode::CascadeOnly;
      spec.dimension = 2;
      break;
  }

  // Keys shared by all kinds.
  if (auto v = keys.take("seed")) spec.seed = parse_integer<std::uint64_t>("seed", *v);
  if (auto v = keys.take("kappa")) spec.kappa = parse_double("kappa", *v);
  if (auto v = keys.take("t_end")) spec.t_end = parse_double("t_end", *v);
  if (auto v = keys.take("step")) spec.step = parse_double("step", *v);
  if (auto v = keys.take("record_every")) {
    spec.record_every = parse_integer<int>("record_every", *v);
  }
  if (auto v = keys.take("out")) {
    spec.out_dir = trim(v->text);
    if (spec.out_dir.empty()) bad_value("out", *v, "expected a directory path");
  }

  std::optional<RawValue> amplitudes_raw, hamiltonian_raw, lambda_raw;
  switch (spec.kind) {
    case ExperimentKind::BornTest:
    case ExperimentKind::CollapseTrajectory:
      spec.dimension = parse_integer<int>("dimension",
                                          keys.require("dimension", kind_name));
      amplitudes_raw = keys.require("amplitudes", kind_name);
      hamiltonian_raw = keys.take("hamiltonian");
      if (auto v = keys.take("include_hamiltonian")) {
        spec.include_hamiltonian = parse_bool("include_hamiltonian", *v);
      }
      keys.reject("q", kind_name);
      break;
    case ExperimentKind::SingletNoSignal:
      spec.dimension = 4;
      spec.q = parse_double("q", keys.require("q", kind_name));
      keys.reject("dimension", kind_name);
      keys.reject("amplitudes", kind_name);
      keys.reject("hamiltonian", kind_name);
      keys.reject("include_hamiltonian", kind_name);
      break;
    case ExperimentKind::SkewedBorn:
      if (auto v = keys.take("dimension")) {
        spec.dimension = parse_integer<int>("dimension", *v);
      }
      amplitudes_raw = keys.require("amplitudes", kind_name);
      keys.reject("hamiltonian", kind_name);
      keys.reject("include_hamiltonian", kind_name);
      keys.reject("q", kind_name);
      break;
  }

  if (spec.kind == ExperimentKind::CollapseTrajectory) {
    lambda_raw = keys.take("lambda");
    keys.reject("samples", kind_name);
    keys.reject("mode", kind_name);
    if (auto v = keys.take("sampler")) {
      try {
        spec.sampler = Sampler::parse(trim(v->text));
      } catch (const std::invalid_argument& e) {
        throw ParseError("line " + std::to_string(v->line) + ": " + e.what());
      }
    }
  } else {
    keys.reject("lambda", kind_name);
    if (auto v = keys.take("samples")) {
      spec.samples = parse_integer<std::int64_t>("samples", *v);
    }
    if (auto v = keys.take("mode")) spec.mode = parse_mode(*v);
    std::optional<RawValue> sampler_raw =
        spec.kind == ExperimentKind::SkewedBorn
            ? std::optional<RawValue>(keys.require("sampler", kind_name))
            : keys.take("sampler");
    if (sampler_raw) {
      try {
        spec.sampler = Sampler::parse(trim(sampler_raw->text));
      } catch (const std::invalid_argument& e) {
        throw ParseError("line " + std::to_string(sampler_raw->line) + ": " +
                         e.what());
      }
    }
  }
  keys.reject_leftovers();

  // Semantic validation.
  if (spec.kind != ExperimentKind::SingletNoSignal) {
    if (spec.dimension < 2 || spec.dimension > 64) {
      throw SpecError("dimension must be in 2..64");
    }
    if (spec.kind == ExperimentKind::SkewedBorn && spec.dimension != 2) {
      throw SpecError("skewed-born is defined for dimension 2");
    }
  }
  if (!(spec.kappa > 0.0)) throw SpecError("kappa must be positive");
  if (!(spec.t_end > 0.0)) throw SpecError("t_end must be positive");
  if (!(spec.step > 0.0)) throw SpecError("step must be positive");
  if (spec.step > 0.1) {
    throw SpecError("step must be at most 0.1 (in units of 1/kappa)");
  }
  if (spec.record_every < 1) throw SpecError("record_every must be >= 1");
  if (spec.samples < 1) throw SpecError("samples must be >= 1");
  if (spec.kind == ExperimentKind::SingletNoSignal &&
      !(spec.q >= 0.0 && spec.q <= 1.0)) {
    throw SpecError("q must be in [0, 1]");
  }

  if (amplitudes_raw) {
    spec.amplitudes = parse_complex_list("amplitudes", *amplitudes_raw);
    if (static_cast<int>(spec.amplitudes.size()) != spec.dimension) {
      throw SpecError("amplitudes: expected " + std::to_string(spec.dimension) +
                      " entries, found " +
                      std::to_string(spec.amplitudes.size()));
    }
    normalize_amplitudes(spec);
  }
  if (hamiltonian_raw) {
    Matrix h = parse_matrix("hamiltonian", *hamiltonian_raw, spec.dimension);
    if (!is_hermitian(h, tol::kOrthonormality)) {
      throw SpecError("hamiltonian must be Hermitian");
    }
    spec.hamiltonian = std::move(h);
  }
  if (lambda_raw) {
    std::vector<Complex> values = parse_complex_list("lambda", *lambda_raw);
    if (static_cast<int>(values.size()) != spec.dimension - 1) {
      throw SpecError("lambda: expected " + std::to_string(spec.dimension - 1) +
                      " entries (lambda_2 .. lambda_N)");
    }
    for (const Complex& v : values) {
      if (std::abs(v) > 1.0) {
        throw SpecError("lambda: entries must lie in the closed unit disk");
      }
    }
    spec.lambda = std::move(values);
  }
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

int run(const ExperimentSpec& spec) {
  const fs::path dir(spec.out_dir);
  fs::create_directories(dir);
  write_json(dir / "manifest.json", manifest_json(spec));
  switch (spec.kind) {
    case ExperimentKind::BornTest:
      return run_born_test(spec, dir);
    case ExperimentKind::CollapseTrajectory:
      return run_collapse_trajectory(spec, dir);
    case ExperimentKind::SingletNoSignal:
      return run_singlet_nosignal(spec, dir);
    case ExperimentKind::SkewedBorn:
      return run_skewed_born(spec, dir);
  }
  throw SpecError("unhandled experiment kind");
}

}  // namespace detcol
