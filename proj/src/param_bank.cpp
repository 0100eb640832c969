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

#include "gmkl/param_bank.hpp"

#include <string>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  if (dst.size() != src.size()) throw UsageError("gradient shape mismatch");
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

bool zero(const std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace

WordGradient& WordGradient::operator+=(const WordGradient& other) {
  add_into(scores, other.scores);
  add_into(means, other.means);
  add_into(log_vars, other.log_vars);
  return *this;
}

bool WordGradient::all_zero() const noexcept {
  return zero(scores) && zero(means) && zero(log_vars);
}

WordGradient& SparseGradient::at(WordId word) {
  auto it = words_.find(word);
  if (it == words_.end()) it = words_.emplace(word, WordGradient(components_, dim_)).first;
  return it->second;
}

const WordGradient* SparseGradient::find(WordId word) const {
  auto it = words_.find(word);
  return it == words_.end() ? nullptr : &it->second;
}

void SparseGradient::merge(const SparseGradient& other) {
  for (const auto& [word, grad] : other.words_) at(word) += grad;
}

void SparseGradient::scale(double factor) {
  for (auto& [word, grad] : words_) {
    for (double& x : grad.scores) x *= factor;
    for (double& x : grad.means) x *= factor;
    for (double& x : grad.log_vars) x *= factor;
  }
}

ParameterBank::ParameterBank(std::size_t vocab_size, std::size_t components, std::size_t dim)
    : vocab_size_(vocab_size),
      components_(components),
      dim_(dim),
      scores_(vocab_size * components, 0.0f),
      means_(vocab_size * components * dim, 0.0f),
      log_vars_(vocab_size * components * dim, 0.0f),
      score_accum_(vocab_size * components, 0.0f),
      mean_accum_(vocab_size * components * dim, 0.0f),
      log_var_accum_(vocab_size * components * dim, 0.0f) {
  if (components == 0 || dim == 0) throw UsageError("ParameterBank needs C >= 1 and D >= 1");
}

void ParameterBank::check_word(WordId w) const {
  if (w >= vocab_size_) {
    throw UsageError("word id " + std::to_string(w) + " out of range (V = " +
                     std::to_string(vocab_size_) + ")");
  }
}

#define GMKL_ROW(name, array, width)                                      \
  std::span<float> ParameterBank::name(WordId w) {                        \
    check_word(w);                                                        \
    return std::span<float>(array).subspan(w * (width), (width));         \
  }

GMKL_ROW(score_accum, score_accum_, components_)
GMKL_ROW(mean_accum, mean_accum_, components_ * dim_)
GMKL_ROW(log_var_accum, log_var_accum_, components_ * dim_)

#undef GMKL_ROW

std::span<float> ParameterBank::scores(WordId w) {
  check_word(w);
  return std::span<float>(scores_).subspan(w * components_, components_);
}
std::span<const float> ParameterBank::scores(WordId w) const {
  check_word(w);
  return std::span<const float>(scores_).subspan(w * components_, components_);
}
std::span<float> ParameterBank::means(WordId w) {
  check_word(w);
  return std::span<float>(means_).subspan(w * components_ * dim_, components_ * dim_);
}
std::span<const float> ParameterBank::means(WordId w) const {
  check_word(w);
  return std::span<const float>(means_).subspan(w * components_ * dim_, components_ * dim_);
}
std::span<float> ParameterBank::log_vars(WordId w) {
  check_word(w);
  return std::span<float>(log_vars_).subspan(w * components_ * dim_, components_ * dim_);
}
std::span<const float> ParameterBank::log_vars(WordId w) const {
  check_word(w);
  return std::span<const float>(log_vars_).subspan(w * components_ * dim_, components_ * dim_);
}

std::span<const float> ParameterBank::component_mean(WordId w, std::size_t component) const {
  if (component >= components_) throw UsageError("component index out of range");
  return means(w).subspan(component * dim_, dim_);
}

std::vector<double> ParameterBank::scores_as_double(WordId w) const {
  auto s = scores(w);
  return std::vector<double>(s.begin(), s.end());
}

MixtureEmbedding ParameterBank::mixture(WordId w) const {
  auto mu = means(w);
  auto lv = log_vars(w);
  std::vector<DiagGaussian> comps;
  comps.reserve(components_);
  for (std::size_t c = 0; c < components_; ++c) {
    comps.emplace_back(std::vector<double>(mu.begin() + c * dim_, mu.begin() + (c + 1) * dim_),
                       std::vector<double>(lv.begin() + c * dim_, lv.begin() + (c + 1) * dim_));
  }
  const auto s = scores_as_double(w);
  return MixtureEmbedding::from_scores(s, std::move(comps));
}

}  // namespace gmkl
