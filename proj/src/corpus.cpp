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

#include "gmkl/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

constexpr std::size_t kReadChunk = 1 << 16;

bool is_separator(char c) { return c == ' ' || c == '\n'; }
bool is_letter(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace

Text8Reader::Text8Reader(const std::string& path)
    : path_(path), in_(path, std::ios::binary), buffer_(kReadChunk) {
  if (!in_) throw IoError("cannot open corpus file: " + path);
}

bool Text8Reader::fill() {
  if (pos_ < len_) return true;
  in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  len_ = static_cast<std::size_t>(in_.gcount());
  pos_ = 0;
  if (len_ == 0 && in_.bad()) throw IoError("read failure on " + path_);
  return len_ > 0;
}

bool Text8Reader::next(std::string& token) {
  token.clear();
  while (fill()) {
    const char c = buffer_[pos_];
    if (is_letter(c)) {
      token.push_back(c);
    } else if (is_separator(c)) {
      if (!token.empty()) {
        ++pos_;
        ++offset_;
        return true;
      }
    } else {
      throw InputError(path_ + ": byte outside [a-z ] in Text8 input", offset_);
    }
    ++pos_;
    ++offset_;
  }
  return !token.empty();
}

std::vector<std::string> read_text8(const std::string& path) {
  Text8Reader reader(path);
  std::vector<std::string> out;
  std::string tok;
  while (reader.next(tok)) out.push_back(tok);
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  if (tokens_.size() != counts_.size()) throw UsageError("vocabulary tokens/counts length mismatch");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0) {
      const bool ordered = counts_[i - 1] > counts_[i] ||
                           (counts_[i - 1] == counts_[i] && tokens_[i - 1] < tokens_[i]);
      if (!ordered) throw UsageError("vocabulary not in (count desc, token asc) order");
    }
    if (!index_.emplace(tokens_[i], static_cast<WordId>(i)).second) {
      throw UsageError("duplicate vocabulary token: " + tokens_[i]);
    }
    total_ += counts_[i];
  }
}

const std::string& Vocabulary::token(WordId id) const {
  if (id >= tokens_.size()) throw UsageError("word id out of range: " + std::to_string(id));
  return tokens_[id];
}

std::uint64_t Vocabulary::count(WordId id) const {
  if (id >= counts_.size()) throw UsageError("word id out of range: " + std::to_string(id));
  return counts_[id];
}

WordId Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kNotFound : it->second;
}

void Vocabulary::export_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
  if (!out) throw IoError("write failure on " + path);
}

namespace {

Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                       std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  if (kept.empty()) throw InputError("no token reaches min_count " + std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> ns;
  tokens.reserve(kept.size());
  ns.reserve(kept.size());
  for (auto& [tok, n] : kept) {
    tokens.push_back(std::move(tok));
    ns.push_back(n);
  }
  return Vocabulary(std::move(tokens), std::move(ns));
}

}  // namespace

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count) {
  if (tokens.empty()) throw InputError("cannot build a vocabulary from an empty token stream");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& t : tokens) ++counts[t];
  return from_counts(counts, min_count);
}

Vocabulary build_vocab(Text8Reader& reader, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string tok;
  while (reader.next(tok)) ++counts[tok];
  if (counts.empty()) throw InputError("cannot build a vocabulary from an empty token stream");
  return from_counts(counts, min_count);
}

std::vector<WordId> encode(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const WordId id = vocab.find(t);
    if (id != Vocabulary::kNotFound) ids.push_back(id);
  }
  return ids;
}

std::vector<WordId> encode(Text8Reader& reader, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  std::string tok;
  while (reader.next(tok)) {
    const WordId id = vocab.find(tok);
    if (id != Vocabulary::kNotFound) ids.push_back(id);
  }
  return ids;
}

SamplerTables::SamplerTables(const Vocabulary& vocab, const SamplerConfig& cfg) {
  const std::size_t n = vocab.size();
  keep_prob_.resize(n, 1.0);
  const double total = static_cast<double>(vocab.total_tokens());
  if (cfg.subsample_t > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ratio = cfg.subsample_t / (static_cast<double>(vocab.counts()[i]) / total);
      double keep = std::sqrt(ratio);
      if (cfg.rule == SubsampleRule::kSqrtPlusLinear) keep += ratio;
      keep_prob_[i] = std::min(1.0, keep);
    }
  }

  neg_cdf_.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::pow(static_cast<double>(vocab.counts()[i]), cfg.neg_exponent);
    neg_cdf_[i] = acc;
  }
  for (double& c : neg_cdf_) c /= acc;
  if (n > 0) neg_cdf_.back() = 1.0;
}

WordId draw_negative(const SamplerTables& tables, WordId exclude, std::mt19937_64& rng) {
  const auto& cdf = tables.neg_cdf();
  if (cdf.size() < 2) throw UsageError("negative sampling needs a vocabulary of at least 2 words");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double u = unit(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto id = static_cast<WordId>(it - cdf.begin());
    if (id != exclude) return id;
  }
}

std::vector<WordId> subsample(std::span<const WordId> ids, const SamplerTables& tables,
                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WordId> kept;
  kept.reserve(ids.size());
  for (WordId id : ids) {
    const double keep = tables.keep_prob(id);
    if (keep >= 1.0 || unit(rng) < keep) kept.push_back(id);
  }
  return kept;
}

PairGenerator::PairGenerator(std::span<const WordId> kept, std::size_t window,
                             bool dynamic_window, std::uint64_t seed)
    : kept_(kept), window_(window), dynamic_(dynamic_window), rng_(seed) {
  if (window == 0) throw UsageError("window must be at least 1");
}

void PairGenerator::start_center() {
  std::size_t radius = window_;
  if (dynamic_) radius = std::uniform_int_distribution<std::size_t>(1, window_)(rng_);
  lo_ = center_ >= radius ? center_ - radius : 0;
  hi_ = std::min(kept_.size() - 1, center_ + radius);
  cursor_ = lo_;
}

bool PairGenerator::next(TrainingPair& pair) {
  while (center_ < kept_.size()) {
    if (!started_) {
      start_center();
      started_ = true;
    }
    while (cursor_ <= hi_) {
      const std::size_t pos = cursor_++;
      if (pos == center_) continue;
      pair = TrainingPair{kept_[center_], kept_[pos]};
      return true;
    }
    ++center_;
    started_ = false;
  }
  return false;
}

std::vector<TrainingPair> gen_pairs(std::span<const WordId> ids, const SamplerTables& tables,
                                    std::size_t window, bool dynamic_window, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<WordId> kept = subsample(ids, tables, rng);
  PairGenerator gen(kept, window, dynamic_window, rng());
  std::vector<TrainingPair> out;
  TrainingPair p;
  while (gen.next(p)) out.push_back(p);
  return out;
}

}  // namespace gmkl
