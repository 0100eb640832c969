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
#include <vector>

namespace gmkl {

// One sense of a word: a Gaussian with diagonal covariance. Variances are
// kept as natural logs so they stay positive under unconstrained updates.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_var;

  DiagGaussian() = default;
  DiagGaussian(std::vector<double> mean_, std::vector<double> log_var_);

  // Standard normal in `dim` dimensions.
  static DiagGaussian standard(std::size_t dim);

  std::size_t dim() const noexcept { return mean.size(); }
};

// log of the expected likelihood kernel, log \int N_a(x) N_b(x) dx, which is
// log N(mu_a; mu_b, Sigma_a + Sigma_b).
double log_el_kernel(const DiagGaussian& a, const DiagGaussian& b);

// KL(a || b) in closed form.
double kl_diag(const DiagGaussian& a, const DiagGaussian& b);

// Differential entropy, 0.5 * log((2 pi e)^D |Sigma|).
double entropy(const DiagGaussian& a);

// Log density of `a` at `x`.
double log_density(const DiagGaussian& a, const std::vector<double>& x);

}  // namespace gmkl
