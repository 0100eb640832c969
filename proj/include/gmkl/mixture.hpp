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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmkl/gauss.hpp"

namespace gmkl {

// A word as a weighted mixture of C diagonal Gaussians sharing dimension D.
struct MixtureEmbedding {
  std::vector<double> weights;
  std::vector<DiagGaussian> components;

  MixtureEmbedding() = default;
  // Validates the simplex and dimension invariants.
  MixtureEmbedding(std::vector<double> weights_, std::vector<DiagGaussian> components_);

  // Weights are softmax(scores).
  static MixtureEmbedding from_scores(std::span<const double> scores,
                                      std::vector<DiagGaussian> components);

  std::size_t size() const noexcept { return components.size(); }
  std::size_t dim() const noexcept { return components.empty() ? 0 : components.front().dim(); }
};

// Numerically stable log(sum_k exp(x_k)). Shifts by the first maximal entry.
double log_sum_exp(std::span<const double> x);

// Softmax of unconstrained scores.
std::vector<double> softmax(std::span<const double> scores);

// Log density of the mixture at x.
double log_density(const MixtureEmbedding& f, const std::vector<double>& x);

struct KlBounds {
  double lower = 0.0;
  double upper = 0.0;

  double mean() const noexcept { return 0.5 * (lower + upper); }
};

// Both KL(f || g) bounds from one pass over the component pairs. The
// upper bound pairs the product-of-Gaussians bound on E_f[log f] with the
// variational bound on E_f[log g]; the lower bound swaps the two.
KlBounds kl_bounds(const MixtureEmbedding& f, const MixtureEmbedding& g);

double kl_upper(const MixtureEmbedding& f, const MixtureEmbedding& g);
double kl_lower(const MixtureEmbedding& f, const MixtureEmbedding& g);

// Mean of the two bounds. Entropy terms cancel here. May be negative.
double kl_approx(const MixtureEmbedding& f, const MixtureEmbedding& g);

// log E(f, g) where E = exp(-KL); this is just -kl_approx.
double log_energy(const MixtureEmbedding& f, const MixtureEmbedding& g);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Sample-mean estimate of E_{x~f}[log f(x) - log g(x)] with its standard
// error. Reference oracle only; n must be at least 1000.
MonteCarloEstimate mc_kl_oracle(const MixtureEmbedding& f, const MixtureEmbedding& g,
                                std::size_t n, std::uint64_t seed);

}  // namespace gmkl
