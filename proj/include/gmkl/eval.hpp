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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmkl/mixture.hpp"
#include "gmkl/model_io.hpp"

namespace gmkl {

// Maximum cosine similarity over all component-mean pairs.
double max_cos(const MixtureEmbedding& f, const MixtureEmbedding& g);

// Mean cosine over all C_f * C_g component pairs. With `per_c` the double
// sum is divided by C_f instead (the form printed for AvgCos).
double avg_cos(const MixtureEmbedding& f, const MixtureEmbedding& g, bool per_c = false);

// max_{i,j} -KL(f_i || g_j).
double kl_comp(const MixtureEmbedding& f, const MixtureEmbedding& g);

// Pearson correlation of average ranks.
double spearman(std::span<const double> model_scores, std::span<const double> human_scores);

// Ranks starting at 1; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

enum class SimilarityMetric { kMaxCos, kAvgCos, kKlApprox, kKlComp };

SimilarityMetric parse_metric(std::string_view name);
const char* metric_name(SimilarityMetric m);

struct SimilarityRecord {
  std::string word1;
  std::string word2;
  double human_score = 0.0;
};

struct EntailmentRecord {
  std::string premise;
  std::string hypothesis;
  bool label = false;
};

// "word1<TAB>word2<TAB>score"; '#' lines and blank lines skipped.
std::vector<SimilarityRecord> read_similarity_tsv(const std::string& path);
// SCWS: id, word1, pos1, word2, pos2, context1, context2, 10 ratings, average.
std::vector<SimilarityRecord> read_scws(const std::string& path);
// "premise<TAB>hypothesis<TAB>label", label in {0, 1, true, false}.
std::vector<EntailmentRecord> read_entailment_tsv(const std::string& path);

struct SimilarityOptions {
  bool avg_cos_per_c = false;
};

struct SimilarityResult {
  double rho_times_100 = 0.0;
  std::size_t n_used = 0;
  std::size_t n_oov = 0;
};

// Pair score under `metric`, oriented so that higher means more similar.
double similarity_score(const MixtureEmbedding& f, const MixtureEmbedding& g,
                        SimilarityMetric metric, const SimilarityOptions& opts = {});

SimilarityResult eval_similarity(const Model& model, std::span<const SimilarityRecord> records,
                                 SimilarityMetric metric, const SimilarityOptions& opts = {});

struct EntailmentResult {
  double best_precision = 0.0;
  double best_f1 = 0.0;
  double precision_threshold = 0.0;
  double f1_threshold = 0.0;
  std::size_t n_used = 0;
  std::size_t n_oov = 0;
};

// Threshold sweep over already computed scores (predict entailed iff
// score >= threshold). Candidate thresholds are the distinct scores and
// +infinity; `max_thresholds` thins them evenly when there are more.
EntailmentResult sweep_thresholds(std::span<const double> scores, const std::vector<bool>& labels,
                                  std::size_t max_thresholds = 0);

// MaxCos scores for each usable record, then sweep_thresholds.
EntailmentResult eval_entailment(const Model& model, std::span<const EntailmentRecord> records,
                                 std::size_t threshold_steps = 0);

struct Neighbor {
  std::string token;
  WordId word = 0;
  std::size_t component = 0;
  double cosine = 0.0;
};

// The k (word, component) means closest in cosine to the query component,
// descending; ties by (word id, component). The query itself is always
// first, with cosine exactly 1.
std::vector<Neighbor> neighbors(const Model& model, std::string_view query, std::size_t component,
                                std::size_t k);

}  // namespace gmkl
