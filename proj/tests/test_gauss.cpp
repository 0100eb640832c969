// Copyright 2026 The GMKL Authors. All Rights Reserved.
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

#include <doctest.h>

#include <cmath>
#include <random>

#include "gmkl/errors.hpp"
#include "gmkl/gauss.hpp"
#include "support.hpp"

using namespace gmkl;
using gmkl::testing::quadrature_kl;
using gmkl::testing::quadrature_log_el;
using gmkl::testing::random_gaussian;

namespace {

const double kPi = std::acos(-1.0);

DiagGaussian g1(double mean, double var) { return DiagGaussian({mean}, {std::log(var)}); }

}  // namespace

TEST_SUITE("gauss") {

TEST_CASE("log_el_kernel worked values") {
  CHECK(log_el_kernel(g1(0, 1), g1(0, 1)) == doctest::Approx(-0.5 * std::log(4 * kPi)).epsilon(1e-14));
  CHECK(log_el_kernel(g1(0, 1), g1(0, 1)) == doctest::Approx(-1.26551).epsilon(1e-5));
  CHECK(log_el_kernel(g1(0, 1), g1(1, 1)) ==
        doctest::Approx(-0.5 * std::log(4 * kPi) - 0.25).epsilon(1e-14));
  CHECK(log_el_kernel(g1(0, 1), g1(1, 1)) == doctest::Approx(-1.51551).epsilon(1e-5));
}

TEST_CASE("log_el_kernel matches quadrature, D = 3") {
  std::mt19937_64 rng(7);
  const auto a = random_gaussian(rng, 3, 2.0, 0.2, 3.0);
  const auto b = random_gaussian(rng, 3, 2.0, 0.2, 3.0);
  CHECK(std::abs(log_el_kernel(a, b) - quadrature_log_el(a, b)) < 1e-6);
}

TEST_CASE("kl_diag worked values") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_gaussian(rng, 4, 3.0, 1e-3, 1e3);
    CHECK(kl_diag(a, a) == 0.0);
  }
  CHECK(std::abs(kl_diag(g1(0, 1), g1(1, 1)) - 0.5) < 1e-12);
}

TEST_CASE("kl_diag agrees with a Monte-Carlo estimate, D = 2") {
  std::mt19937_64 rng(11);
  const auto a = random_gaussian(rng, 2, 1.5, 0.3, 3.0);
  const auto b = random_gaussian(rng, 2, 1.5, 0.3, 3.0);

  // Sampling and densities written out here, independent of the library.
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double log_ratio = 0.0;
    for (std::size_t d = 0; d < 2; ++d) {
      const double va = std::exp(a.log_var[d]);
      const double vb = std::exp(b.log_var[d]);
      const double x = a.mean[d] + std::sqrt(va) * normal(rng);
      const double za = x - a.mean[d];
      const double zb = x - b.mean[d];
      log_ratio += -0.5 * za * za / va - 0.5 * std::log(va) + 0.5 * zb * zb / vb + 0.5 * std::log(vb);
    }
    sum += log_ratio;
    sum_sq += log_ratio * log_ratio;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(kl_diag(a, b) - mean) <= 3.0 * se);
}

TEST_CASE("entropy worked values") {
  CHECK(entropy(g1(0, 1)) == doctest::Approx(0.5 * std::log(2 * kPi * std::exp(1.0))).epsilon(1e-14));
  CHECK(entropy(g1(0, 1)) == doctest::Approx(1.41894).epsilon(1e-5));
  CHECK(entropy(DiagGaussian::standard(2)) == doctest::Approx(2.83788).epsilon(1e-5));
  CHECK(entropy(g1(0, 4)) == doctest::Approx(2.11208).epsilon(1e-5));
  // Small variances give negative differential entropy.
  CHECK(entropy(g1(0, 1e-3)) < 0.0);
}

TEST_CASE("dimension mismatch is a usage error") {
  const auto a = DiagGaussian::standard(2);
  const auto b = DiagGaussian::standard(3);
  CHECK_THROWS_AS(log_el_kernel(a, b), UsageError);
  CHECK_THROWS_AS(kl_diag(a, b), UsageError);
  CHECK_THROWS_AS(DiagGaussian({0.0, 1.0}, {0.0}), UsageError);
  CHECK_THROWS_AS(DiagGaussian({}, {}), UsageError);
}

TEST_CASE("symmetry, non-negativity, asymmetry and translation invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 1 + i % 6;
    const auto a = random_gaussian(rng, dim, 3.0, 1e-3, 1e2);
    const auto b = random_gaussian(rng, dim, 3.0, 1e-3, 1e2);
    CHECK(log_el_kernel(a, b) == log_el_kernel(b, a));
    CHECK(kl_diag(a, b) >= -1e-12);

    const double c = shift(rng);
    auto a2 = a, b2 = b;
    for (auto& m : a2.mean) m += c;
    for (auto& m : b2.mean) m += c;
    CHECK(log_el_kernel(a2, b2) == doctest::Approx(log_el_kernel(a, b)).epsilon(1e-9));
    CHECK(kl_diag(a2, b2) == doctest::Approx(kl_diag(a, b)).epsilon(1e-9));
    CHECK(entropy(a2) == entropy(a));
  }
  const auto narrow = g1(0, 1);
  const auto wide = g1(0, 9);
  CHECK(std::abs(kl_diag(narrow, wide) - kl_diag(wide, narrow)) > 0.1);
}

TEST_CASE("100 random pairs match quadrature oracles") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 1 + i % 3;
    const auto a = random_gaussian(rng, dim, 2.0, 0.2, 4.0);
    const auto b = random_gaussian(rng, dim, 2.0, 0.2, 4.0);
    CHECK(std::abs(log_el_kernel(a, b) - quadrature_log_el(a, b)) < 1e-6);
    CHECK(std::abs(kl_diag(a, b) - quadrature_kl(a, b)) < 1e-6);
  }
}

}  // TEST_SUITE
