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

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "detcol/closed_form.hpp"
#include "detcol/model.hpp"
#include "detcol/rng.hpp"
#include "test_support.hpp"

using namespace detcol;

namespace {

BranchAmplitudes amplitudes_from(std::initializer_list<double> weights) {
  std::vector<Complex> alphas;
  for (double w : weights) alphas.emplace_back(std::sqrt(w), 0.0);
  return BranchAmplitudes(std::move(alphas));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("disk sampling obeys the area law") {
  std::mt19937_64 rng(101);
  const int draws = 1000000;
  const std::array<double, 3> cuts = {0.1, 0.5, 0.9};
  std::array<int, 3> above = {0, 0, 0};
  Complex mean(0, 0);
  Sampler uniform;
  for (int i = 0; i < draws; ++i) {
    const Complex lambda = uniform.draw(rng);
    mean += lambda;
    const double mod2 = std::norm(lambda);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (mod2 > cuts[c]) ++above[c];
    }
  }
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const double frequency = static_cast<double>(above[c]) / draws;
    CHECK(std::abs(frequency - (1.0 - cuts[c])) <= 0.003);
  }
  mean /= static_cast<double>(draws);
  CHECK(std::abs(mean.real()) <= 0.002);
  CHECK(std::abs(mean.imag()) <= 0.002);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  auto a = make_sample_rng(99, 7);
  auto b = make_sample_rng(99, 7);
  const HiddenVariables ha = sample_hidden_variables(5, a);
  const HiddenVariables hb = sample_hidden_variables(5, b);
  for (int j = 2; j <= 5; ++j) {
    CHECK(ha.lambda(j) == hb.lambda(j));
  }
  auto c = make_sample_rng(99, 8);
  CHECK(sample_hidden_variables(5, c).lambda(2) != ha.lambda(2));
}

TEST_CASE("hidden variables stay on the closed unit disk") {
  std::mt19937_64 rng(102);
  for (int rep = 0; rep < 1000; ++rep) {
    const HiddenVariables hv = sample_hidden_variables(4, rng);
    for (int j = 2; j <= 4; ++j) CHECK(std::abs(hv.lambda(j)) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(HiddenVariables({Complex(1.1, 0.0)}), std::invalid_argument);
}

TEST_CASE("branch amplitudes of a basis state are a unit coordinate") {
  const MeasurementContext ctx = MeasurementContext::standard(3, 1.0);
  Vector v = Vector::Zero(3);
  v(1) = 1.0;
  const BranchAmplitudes alpha = compute_branch_amplitudes(StateVector(v), ctx);
  CHECK(std::abs(alpha.alpha(1)) == 0.0);
  CHECK(std::abs(alpha.alpha(2)) == 1.0);
  CHECK(std::abs(alpha.alpha(3)) == 0.0);
}

TEST_CASE("branch amplitudes of the entangled pair match the weights") {
  // detector states at permuted two-qubit coordinates
  Matrix basis = Matrix::Zero(4, 4);
  basis(1, 0) = basis(2, 1) = basis(3, 2) = basis(0, 3) = 1.0;
  const MeasurementContext ctx(basis, Matrix::Zero(4, 4), 0.0, 0.0, 1.0);
  const double q = 0.5;
  const StateVector psi(Vector(basis * singlet_state(q).amplitudes()));
  const BranchAmplitudes alpha = compute_branch_amplitudes(psi, ctx);
  CHECK(alpha.alpha(1).real() == doctest::Approx(q).epsilon(1e-14));
  CHECK(alpha.alpha(2).real() ==
        doctest::Approx(-std::sqrt(1 - q * q)).epsilon(1e-14));
  CHECK(alpha.weight(3) == 0.0);
  CHECK(alpha.weight(4) == 0.0);
}

TEST_CASE("a quarter-period pauli-x rotation moves all weight to the second state") {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 1) = 1.0;
  h(1, 0) = 1.0;
  const MeasurementContext ctx(Matrix::Identity(2, 2), h, 0.0,
                               std::numbers::pi / 2, 1.0);
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  const BranchAmplitudes alpha = compute_branch_amplitudes(StateVector(v), ctx);
  CHECK(alpha.weight(1) <= 1e-20);
  CHECK(alpha.weight(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sigma evaluates the weighted disk condition") {
  const BranchAmplitudes alpha = amplitudes_from({0.5, 0.5});
  const HiddenVariables hv({Complex(0.9, 0.0)});
  const SigmaCascade sig = compute_sigma_cascade(alpha, hv);
  CHECK(sig.sigma(2) == doctest::Approx(0.31).epsilon(1e-14));
}

TEST_CASE("a zero-amplitude branch never has positive sigma") {
  std::mt19937_64 rng(103);
  const BranchAmplitudes alpha = amplitudes_from({0.4, 0.6, 0.0});
  for (int rep = 0; rep < 2000; ++rep) {
    const HiddenVariables hv = sample_hidden_variables(3, rng);
    const SigmaCascade sig = compute_sigma_cascade(alpha, hv);
    CHECK(sig.sigma(3) <= 0.0);
    CHECK(predict_outcome(sig) != 3);
  }
}

TEST_CASE("singlet sigma reduces to the disk-radius threshold") {
  std::mt19937_64 rng(104);
  const double q = 0.6;
  std::vector<Complex> alphas = {Complex(q, 0), Complex(-std::sqrt(1 - q * q), 0),
                                 Complex(0, 0), Complex(0, 0)};
  const BranchAmplitudes alpha(std::move(alphas));
  for (int rep = 0; rep < 200; ++rep) {
    const HiddenVariables hv = sample_hidden_variables(4, rng);
    const SigmaCascade sig = compute_sigma_cascade(alpha, hv);
    CHECK(sig.sigma(2) ==
          doctest::Approx(std::norm(hv.lambda(2)) - q * q).epsilon(1e-13));
    CHECK(sig.sigma(3) <= 0.0);
    CHECK(sig.sigma(4) <= 0.0);
  }
}

TEST_CASE("sigma values stay inside [-1, 1]") {
  std::mt19937_64 rng(105);
  for (int rep = 0; rep < 500; ++rep) {
    const BranchAmplitudes alpha = test::random_amplitudes(4, rng);
    const HiddenVariables hv = sample_hidden_variables(4, rng);
    const SigmaCascade sig = compute_sigma_cascade(alpha, hv);
    for (int j = 2; j <= 4; ++j) {
      CHECK(sig.sigma(j) <= 1.0 + 1e-12);
      CHECK(sig.sigma(j) >= -1.0 - 1e-12);
    }
  }
}

TEST_CASE("jump operators follow the sigma signs") {
  const MeasurementContext ctx2 = MeasurementContext::standard(2, 1.0);
  const LindbladSet up = build_lindblad_set(SigmaCascade({0.31}), ctx2);
  REQUIRE(up.size() == 1);
  CHECK(up.transitions()[0].to == 2);
  CHECK(up.transitions()[0].from == 1);

  // the boundary sigma = 0 transitions downward
  const LindbladSet down = build_lindblad_set(SigmaCascade({0.0}), ctx2);
  CHECK(down.transitions()[0].to == 1);
  CHECK(down.transitions()[0].from == 2);

  const MeasurementContext ctx3 = MeasurementContext::standard(3, 1.0);
  const LindbladSet set3 = build_lindblad_set(SigmaCascade({0.2, -0.4}), ctx3);
  REQUIRE(set3.size() == 3);
  CHECK(set3.transitions()[0].to == 2);   // |2><1|
  CHECK(set3.transitions()[0].from == 1);
  CHECK(set3.transitions()[1].to == 1);   // |1><3|
  CHECK(set3.transitions()[1].from == 3);
  CHECK(set3.transitions()[2].to == 2);   // |2><3|
  CHECK(set3.transitions()[2].from == 3);
}

TEST_CASE("jump operator matrices are single unit transitions") {
  std::mt19937_64 rng(106);
  const MeasurementContext ctx = MeasurementContext::standard(4, 1.0);
  const BranchAmplitudes alpha = test::random_amplitudes(4, rng);
  const HiddenVariables hv = sample_hidden_variables(4, rng);
  const LindbladSet ops =
      build_lindblad_set(compute_sigma_cascade(alpha, hv), ctx);
  CHECK(ops.size() == 6);
  for (int k = 0; k < ops.size(); ++k) {
    const Matrix l = ops.operator_matrix(k, ctx);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.cols(); ++j) {
        if (std::abs(l(i, j)) > 0.0) {
          ++nonzero;
          CHECK(std::abs(l(i, j)) == doctest::Approx(1.0).epsilon(1e-15));
        }
      }
    }
    CHECK(nonzero == 1);
  }
}

TEST_CASE("the outcome is the highest positive sigma, else the first state") {
  CHECK(predict_outcome(SigmaCascade({-0.1, -0.2, 0.0})) == 1);
  CHECK(predict_outcome(SigmaCascade({-0.1, 0.2, 0.3})) == 4);
  CHECK(predict_outcome(SigmaCascade({0.5, -0.2, -0.3})) == 2);
}

TEST_CASE("outcome probabilities evaluate the conditional product") {
  const BranchAmplitudes alpha = amplitudes_from({0.2, 0.3, 0.5});
  CHECK(exact_outcome_probability(alpha, 2) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(exact_outcome_probability(alpha, 1) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(exact_outcome_probability(alpha, 3) ==
        doctest::Approx(0.5).epsilon(1e-14));

  const BranchAmplitudes sure = amplitudes_from({1.0, 0.0});
  CHECK(exact_outcome_probability(sure, 2) == 0.0);
  CHECK(exact_outcome_probability(sure, 1) == 1.0);
  const BranchAmplitudes flipped = amplitudes_from({0.0, 1.0});
  CHECK(exact_outcome_probability(flipped, 2) == 1.0);
  CHECK(exact_outcome_probability(flipped, 1) == 0.0);
}

TEST_CASE("outcome probabilities reproduce the squared amplitudes") {
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < 100; ++rep) {
    const BranchAmplitudes alpha = test::random_amplitudes(5, rng);
    double total = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double p = exact_outcome_probability(alpha, k);
      CHECK(std::abs(p - alpha.weight(k)) <= 1e-12);
      total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("sign probabilities renormalise by the partial sums") {
  const BranchAmplitudes alpha2 = amplitudes_from({0.7, 0.3});
  CHECK(analytic_sigma_sign_probability(alpha2, 2) ==
        doctest::Approx(0.3).epsilon(1e-14));

  const double q = 0.5;
  std::vector<Complex> sv = {Complex(q, 0), Complex(-std::sqrt(1 - q * q), 0),
                             Complex(0, 0), Complex(0, 0)};
  const BranchAmplitudes singlet(std::move(sv));
  CHECK(analytic_sigma_sign_probability(singlet, 2) ==
        doctest::Approx(1.0 - q * q).epsilon(1e-14));
  CHECK(analytic_sigma_sign_probability(singlet, 3) == 0.0);
  CHECK(analytic_sigma_sign_probability(singlet, 4) == 0.0);
}

TEST_CASE("disk quadrature reproduces the outcome probabilities") {
  // the cascade depends on the draws only through |lambda_J|^2, which are
  // independent uniforms on [0,1]; a midpoint grid over them enumerates
  // the outcome regions deterministically (no sampling involved)
  const int grid = 1500;
  const double cell = 1.0 / grid;
  for (const BranchAmplitudes& alpha :
       {amplitudes_from({0.2, 0.3, 0.5}), amplitudes_from({0.5, 0.0, 0.5})}) {
    std::array<double, 3> mass = {0.0, 0.0, 0.0};
    for (int i = 0; i < grid; ++i) {
      const double u2 = (i + 0.5) * cell;
      for (int j = 0; j < grid; ++j) {
        const double u3 = (j + 0.5) * cell;
        const HiddenVariables hv(
            {Complex(std::sqrt(u2), 0), Complex(std::sqrt(u3), 0)});
        mass[predict_outcome(compute_sigma_cascade(alpha, hv)) - 1] +=
            cell * cell;
      }
    }
    for (int k = 1; k <= 3; ++k) {
      // midpoint quadrature error is bounded by the boundary cells
      CHECK(std::abs(mass[k - 1] - exact_outcome_probability(alpha, k)) <=
            5.0 / grid);
    }
    if (alpha.weight(2) == 0.0) CHECK(mass[1] == 0.0);
  }
}

TEST_CASE("cascade frequencies agree with the exact probabilities") {
  std::mt19937_64 rng(108);
  const BranchAmplitudes alpha = test::random_amplitudes(4, rng);
  const int draws = 100000;
  std::array<int, 4> counts = {0, 0, 0, 0};
  for (int i = 0; i < draws; ++i) {
    auto sample_rng = make_sample_rng(2024, static_cast<std::uint64_t>(i));
    const HiddenVariables hv = sample_hidden_variables(4, sample_rng);
    ++counts[predict_outcome(compute_sigma_cascade(alpha, hv)) - 1];
  }
  for (int k = 1; k <= 4; ++k) {
    const double p = exact_outcome_probability(alpha, k);
    const double frequency = static_cast<double>(counts[k - 1]) / draws;
    const double band = 4.0 * std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(frequency - p) <= band);
  }
}

TEST_CASE("relabelling the basis permutes the outcome distribution") {
  const int draws = 100000;
  const BranchAmplitudes alpha = amplitudes_from({0.2, 0.3, 0.5});
  // cyclic permutation: new index 1,2,3 carries old 3,1,2
  const BranchAmplitudes permuted = amplitudes_from({0.5, 0.2, 0.3});
  const std::array<int, 3> to_new = {2, 3, 1};  // old k -> new position

  std::array<int, 3> counts{}, counts_permuted{};
  for (int i = 0; i < draws; ++i) {
    auto rng_a = make_sample_rng(5150, static_cast<std::uint64_t>(i));
    auto rng_b = make_sample_rng(6160, static_cast<std::uint64_t>(i));
    const HiddenVariables ha = sample_hidden_variables(3, rng_a);
    const HiddenVariables hb = sample_hidden_variables(3, rng_b);
    ++counts[predict_outcome(compute_sigma_cascade(alpha, ha)) - 1];
    ++counts_permuted[predict_outcome(compute_sigma_cascade(permuted, hb)) - 1];
  }
  for (int k = 1; k <= 3; ++k) {
    const double p = alpha.weight(k);
    const double f_old = static_cast<double>(counts[k - 1]) / draws;
    const double f_new =
        static_cast<double>(counts_permuted[to_new[k - 1] - 1]) / draws;
    const double band = 4.0 * std::sqrt(2.0 * p * (1.0 - p) / draws);
    CHECK(std::abs(f_old - f_new) <= band);
  }
}

TEST_CASE("sampler specifications parse and validate") {
  CHECK(Sampler::parse("uniform").kind == Sampler::Kind::UniformDisk);
  const Sampler disk = Sampler::parse("disk:0.8");
  CHECK(disk.kind == Sampler::Kind::Disk);
  CHECK(disk.radius == doctest::Approx(0.8));
  const Sampler annulus = Sampler::parse("annulus:0.25");
  CHECK(annulus.kind == Sampler::Kind::Annulus);
  CHECK(annulus.inner == doctest::Approx(0.25));
  CHECK_THROWS_AS(Sampler::parse("disk:1.5"), std::invalid_argument);
  CHECK_THROWS_AS(Sampler::parse("disk"), std::invalid_argument);
  CHECK_THROWS_AS(Sampler::parse("wedge:0.3"), std::invalid_argument);
}

TEST_CASE("restricted samplers stay inside their regions") {
  std::mt19937_64 rng(109);
  Sampler disk;
  disk.kind = Sampler::Kind::Disk;
  disk.radius = 0.6;
  Sampler annulus;
  annulus.kind = Sampler::Kind::Annulus;
  annulus.inner = 0.7;
  for (int rep = 0; rep < 5000; ++rep) {
    CHECK(std::abs(disk.draw(rng)) <= 0.6 + 1e-12);
    const double mod = std::abs(annulus.draw(rng));
    CHECK(mod >= 0.7 - 1e-12);
    CHECK(mod <= 1.0 + 1e-12);
  }
}

TEST_CASE("measurement context validates its inputs") {
  Matrix skewed = Matrix::Identity(2, 2);
  skewed(0, 1) = 0.1;
  CHECK_THROWS_AS(MeasurementContext(skewed, Matrix::Zero(2, 2), 0, 1, 1.0),
                  std::invalid_argument);
  Matrix nonherm = Matrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  CHECK_THROWS_AS(
      MeasurementContext(Matrix::Identity(2, 2), nonherm, 0, 1, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      MeasurementContext(Matrix::Identity(2, 2), Matrix::Zero(2, 2), 1, 0, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      MeasurementContext(Matrix::Identity(2, 2), Matrix::Zero(2, 2), 0, 1, -1.0),
      std::invalid_argument);
}

}  // TEST_SUITE
