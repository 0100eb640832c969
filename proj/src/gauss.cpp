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

#include "gmkl/gauss.hpp"

#include <cmath>
#include <string>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void check_valid(const DiagGaussian& a) {
  if (a.mean.empty() || a.mean.size() != a.log_var.size()) {
    throw UsageError("DiagGaussian: mean and log_var must have equal, nonzero length");
  }
}

void check_same_dim(const DiagGaussian& a, const DiagGaussian& b) {
  check_valid(a);
  check_valid(b);
  if (a.dim() != b.dim()) {
    throw UsageError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
}

}  // namespace

DiagGaussian::DiagGaussian(std::vector<double> mean_, std::vector<double> log_var_)
    : mean(std::move(mean_)), log_var(std::move(log_var_)) {
  check_valid(*this);
}

DiagGaussian DiagGaussian::standard(std::size_t dim) {
  return DiagGaussian(std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0));
}

double log_el_kernel(const DiagGaussian& a, const DiagGaussian& b) {
  check_same_dim(a, b);
  const std::size_t dim = a.dim();
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double s = std::exp(a.log_var[d]) + std::exp(b.log_var[d]);
    const double diff = a.mean[d] - b.mean[d];
    acc += std::log(s) + diff * diff / s;
  }
  return -0.5 * static_cast<double>(dim) * kLog2Pi - 0.5 * acc;
}

double kl_diag(const DiagGaussian& a, const DiagGaussian& b) {
  check_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double diff = a.mean[d] - b.mean[d];
    // Variance ratio as exp of the log difference keeps kl(a, a) exactly 0.
    const double ratio = std::exp(a.log_var[d] - b.log_var[d]);
    acc += (b.log_var[d] - a.log_var[d]) + ratio + diff * diff * std::exp(-b.log_var[d]) - 1.0;
  }
  return 0.5 * acc;
}

double entropy(const DiagGaussian& a) {
  check_valid(a);
  double sum_log_var = 0.0;
  for (double lv : a.log_var) sum_log_var += lv;
  return 0.5 * static_cast<double>(a.dim()) * (kLog2Pi + 1.0) + 0.5 * sum_log_var;
}

double log_density(const DiagGaussian& a, const std::vector<double>& x) {
  check_valid(a);
  if (x.size() != a.dim()) throw UsageError("log_density: dimension mismatch");
  double acc = 0.0;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double diff = x[d] - a.mean[d];
    acc += a.log_var[d] + diff * diff * std::exp(-a.log_var[d]);
  }
  return -0.5 * static_cast<double>(a.dim()) * kLog2Pi - 0.5 * acc;
}

}  // namespace gmkl
