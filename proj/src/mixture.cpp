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

#include "gmkl/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

void check_pair(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  if (f.size() == 0 || g.size() == 0) throw UsageError("empty mixture");
  if (f.dim() != g.dim()) {
    throw UsageError("mixture dimension mismatch: " + std::to_string(f.dim()) + " vs " +
                     std::to_string(g.dim()));
  }
}

}  // namespace

MixtureEmbedding::MixtureEmbedding(std::vector<double> weights_,
                                   std::vector<DiagGaussian> components_)
    : weights(std::move(weights_)), components(std::move(components_)) {
  if (components.empty()) throw UsageError("mixture needs at least one component");
  if (weights.size() != components.size()) {
    throw UsageError("mixture weights and components differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw UsageError("mixture weight outside [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) throw UsageError("mixture weights do not sum to 1");
  const std::size_t dim = components.front().dim();
  for (const auto& c : components) {
    if (c.dim() != dim || c.mean.size() != c.log_var.size() || dim == 0) {
      throw UsageError("mixture components disagree on dimension");
    }
  }
}

MixtureEmbedding MixtureEmbedding::from_scores(std::span<const double> scores,
                                               std::vector<DiagGaussian> components) {
  return MixtureEmbedding(softmax(scores), std::move(components));
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k] > x[arg]) arg = k;
  }
  const double shift = x[arg];
  if (!std::isfinite(shift)) return shift;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - shift);
  return shift + std::log(acc);
}

std::vector<double> softmax(std::span<const double> scores) {
  const double lse = log_sum_exp(scores);
  std::vector<double> out(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) out[k] = std::exp(scores[k] - lse);
  return out;
}

double log_density(const MixtureEmbedding& f, const std::vector<double>& x) {
  std::vector<double> terms(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    terms[k] = std::log(f.weights[k]) + log_density(f.components[k], x);
  }
  return log_sum_exp(terms);
}

KlBounds kl_bounds(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  check_pair(f, g);
  const std::size_t cf = f.size();
  const std::size_t cg = g.size();

  std::vector<double> log_p(cf), log_q(cg);
  for (std::size_t k = 0; k < cf; ++k) log_p[k] = std::log(f.weights[k]);
  for (std::size_t j = 0; j < cg; ++j) log_q[j] = std::log(g.weights[j]);

  // Entropies are computed once and enter the two bounds with opposite sign.
  double weighted_entropy = 0.0;
  for (std::size_t i = 0; i < cf; ++i) weighted_entropy += f.weights[i] * entropy(f.components[i]);

  std::vector<double> self_overlap(cf), self_kl(cf), cross_kl(cg), cross_overlap(cg);
  double upper = 0.0;
  double lower = 0.0;
  for (std::size_t i = 0; i < cf; ++i) {
    const DiagGaussian& fi = f.components[i];
    for (std::size_t k = 0; k < cf; ++k) {
      self_overlap[k] = log_p[k] + log_el_kernel(fi, f.components[k]);
      self_kl[k] = log_p[k] - kl_diag(fi, f.components[k]);
    }
    for (std::size_t j = 0; j < cg; ++j) {
      cross_kl[j] = log_q[j] - kl_diag(fi, g.components[j]);
      cross_overlap[j] = log_q[j] + log_el_kernel(fi, g.components[j]);
    }
    // Upper: sum_k p_k EL_ik(f,f) over sum_j q_j exp(-KL(f_i||g_j)).
    upper += f.weights[i] * (log_sum_exp(self_overlap) - log_sum_exp(cross_kl));
    // Lower: sum_k p_k exp(-KL(f_i||f_k)) over sum_j q_j EL_ij(f,g).
    lower += f.weights[i] * (log_sum_exp(self_kl) - log_sum_exp(cross_overlap));
  }
  return KlBounds{lower - weighted_entropy, upper + weighted_entropy};
}

double kl_upper(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  return kl_bounds(f, g).upper;
}

double kl_lower(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  return kl_bounds(f, g).lower;
}

double kl_approx(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  return kl_bounds(f, g).mean();
}

double log_energy(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  return -kl_approx(f, g);
}

MonteCarloEstimate mc_kl_oracle(const MixtureEmbedding& f, const MixtureEmbedding& g,
                                std::size_t n, std::uint64_t seed) {
  check_pair(f, g);
  if (n < 1000) throw UsageError("mc_kl_oracle needs at least 1000 samples");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(f.weights.begin(), f.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t dim = f.dim();
  std::vector<double> stddev_f;
  stddev_f.reserve(f.size() * dim);
  for (const auto& c : f.components) {
    for (double lv : c.log_var) stddev_f.push_back(std::exp(0.5 * lv));
  }

  std::vector<double> x(dim);
  // Welford accumulation of the per-sample log ratio.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t k = pick(rng);
    const DiagGaussian& comp = f.components[k];
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = comp.mean[d] + stddev_f[k * dim + d] * normal(rng);
    }
    const double r = log_density(f, x) - log_density(g, x);
    const double delta = r - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (r - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return MonteCarloEstimate{mean, std::sqrt(variance / static_cast<double>(n))};
}

}  // namespace gmkl
