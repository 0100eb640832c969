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
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gmkl/param_bank.hpp"

namespace gmkl {

// Streams whitespace-separated tokens from a Text8-style file: lowercase
// letters separated by spaces (newlines are tolerated as separators). Any
// other byte is an InputError carrying its offset.
class Text8Reader {
 public:
  explicit Text8Reader(const std::string& path);

  // Next token into `token`; false at end of file.
  bool next(std::string& token);

  // Byte offset of the next unread byte.
  std::int64_t offset() const noexcept { return offset_; }

 private:
  bool fill();

  std::string path_;
  std::ifstream in_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::int64_t offset_ = 0;
};

// Reads every token of a Text8 file.
std::vector<std::string> read_text8(const std::string& path);

// Token <-> id map with counts. Ids are dense, in descending count order,
// ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr WordId kNotFound = static_cast<WordId>(-1);

  Vocabulary() = default;
  // Tokens and counts in id order; validates ordering.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(WordId id) const;
  std::uint64_t count(WordId id) const;
  std::uint64_t total_tokens() const noexcept { return total_; }
  WordId find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token) != kNotFound; }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  // "token<TAB>count" per line, id order.
  void export_tsv(const std::string& path) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::unordered_map<std::string, WordId> index_;
};

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count);
Vocabulary build_vocab(Text8Reader& reader, std::uint64_t min_count);

// Map tokens to ids, dropping out-of-vocabulary tokens.
std::vector<WordId> encode(std::span<const std::string> tokens, const Vocabulary& vocab);
std::vector<WordId> encode(Text8Reader& reader, const Vocabulary& vocab);

enum class SubsampleRule {
  kSqrt,          // min(1, sqrt(t / f))
  kSqrtPlusLinear // min(1, sqrt(t / f) + t / f)
};

struct SamplerConfig {
  double subsample_t = 1e-5;  // <= 0 disables subsampling
  SubsampleRule rule = SubsampleRule::kSqrt;
  double neg_exponent = 0.75;
};

// Keep probabilities and the negative-sampling CDF for one vocabulary.
class SamplerTables {
 public:
  SamplerTables(const Vocabulary& vocab, const SamplerConfig& cfg);

  double keep_prob(WordId id) const { return keep_prob_.at(id); }
  const std::vector<double>& keep_probs() const noexcept { return keep_prob_; }
  // Cumulative proposal distribution; last entry is 1.
  const std::vector<double>& neg_cdf() const noexcept { return neg_cdf_; }
  std::size_t vocab_size() const noexcept { return keep_prob_.size(); }

 private:
  std::vector<double> keep_prob_;
  std::vector<double> neg_cdf_;
};

// Draws a negative id != exclude from the count^exponent proposal.
WordId draw_negative(const SamplerTables& tables, WordId exclude, std::mt19937_64& rng);

// Applies frequency subsampling to an id sequence.
std::vector<WordId> subsample(std::span<const WordId> ids, const SamplerTables& tables,
                              std::mt19937_64& rng);

struct TrainingPair {
  WordId center_id = 0;
  WordId context_id = 0;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// Skip-gram pairs over an already subsampled id sequence. With a dynamic
// window each center draws its radius uniformly from 1..window.
class PairGenerator {
 public:
  PairGenerator(std::span<const WordId> kept, std::size_t window, bool dynamic_window,
                std::uint64_t seed);

  bool next(TrainingPair& pair);

 private:
  void start_center();

  std::span<const WordId> kept_;
  std::size_t window_;
  bool dynamic_;
  std::mt19937_64 rng_;
  std::size_t center_ = 0;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
  std::size_t cursor_ = 0;
  bool started_ = false;
};

// Subsamples `ids` and collects every pair. Convenience for tests and small
// corpora.
std::vector<TrainingPair> gen_pairs(std::span<const WordId> ids, const SamplerTables& tables,
                                    std::size_t window, bool dynamic_window, std::uint64_t seed);

}  // namespace gmkl
