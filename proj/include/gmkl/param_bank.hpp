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
#include <map>
#include <span>
#include <vector>

#include "gmkl/mixture.hpp"

namespace gmkl {

using WordId = std::uint32_t;

// Dense gradient for one word: C scores, C*D means, C*D log-variances,
// component-major.
struct WordGradient {
  std::vector<double> scores;
  std::vector<double> means;
  std::vector<double> log_vars;

  WordGradient() = default;
  WordGradient(std::size_t components, std::size_t dim)
      : scores(components, 0.0), means(components * dim, 0.0), log_vars(components * dim, 0.0) {}

  WordGradient& operator+=(const WordGradient& other);
  bool all_zero() const noexcept;
};

// Gradient entries for the words touched by a set of triples. Words are
// kept ordered by id so updates are applied in a fixed order.
class SparseGradient {
 public:
  SparseGradient() = default;
  SparseGradient(std::size_t components, std::size_t dim) : components_(components), dim_(dim) {}

  // Zero-initialised entry for `word`, created on first access.
  WordGradient& at(WordId word);
  const WordGradient* find(WordId word) const;

  void merge(const SparseGradient& other);
  void scale(double factor);
  void clear() { words_.clear(); }

  bool empty() const noexcept { return words_.empty(); }
  std::size_t size() const noexcept { return words_.size(); }
  std::size_t components() const noexcept { return components_; }
  std::size_t dim() const noexcept { return dim_; }

  auto begin() const { return words_.begin(); }
  auto end() const { return words_.end(); }

 private:
  std::size_t components_ = 0;
  std::size_t dim_ = 0;
  std::map<WordId, WordGradient> words_;
};

// All trainable tensors for a vocabulary of V words, stored as 32-bit floats
// in word-id-major order, plus Adagrad accumulators of the same shapes.
class ParameterBank {
 public:
  ParameterBank() = default;
  ParameterBank(std::size_t vocab_size, std::size_t components, std::size_t dim);

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t components() const noexcept { return components_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<float> scores(WordId w);
  std::span<const float> scores(WordId w) const;
  std::span<float> means(WordId w);
  std::span<const float> means(WordId w) const;
  std::span<float> log_vars(WordId w);
  std::span<const float> log_vars(WordId w) const;

  std::span<float> score_accum(WordId w);
  std::span<float> mean_accum(WordId w);
  std::span<float> log_var_accum(WordId w);

  // Mean vector of one component.
  std::span<const float> component_mean(WordId w, std::size_t component) const;

  // Double-precision mixture for `w` (weights = softmax(scores)).
  MixtureEmbedding mixture(WordId w) const;
  std::vector<double> scores_as_double(WordId w) const;

  // Whole arrays, used by serialization.
  std::vector<float>& all_scores() noexcept { return scores_; }
  std::vector<float>& all_means() noexcept { return means_; }
  std::vector<float>& all_log_vars() noexcept { return log_vars_; }
  const std::vector<float>& all_scores() const noexcept { return scores_; }
  const std::vector<float>& all_means() const noexcept { return means_; }
  const std::vector<float>& all_log_vars() const noexcept { return log_vars_; }

  void check_word(WordId w) const;

 private:
  std::size_t vocab_size_ = 0;
  std::size_t components_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> scores_;
  std::vector<float> means_;
  std::vector<float> log_vars_;
  std::vector<float> score_accum_;
  std::vector<float> mean_accum_;
  std::vector<float> log_var_accum_;
};

}  // namespace gmkl
