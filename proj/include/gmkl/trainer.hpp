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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmkl/corpus.hpp"
#include "gmkl/objective.hpp"
#include "gmkl/param_bank.hpp"

#include <json.hpp>

namespace gmkl {

// Hyperparameters. Defaults: D=50, C=2, window 10, batch 128, lr 0.05 and
// subsampling threshold 1e-5 as published for Text8; the rest are ours.
struct TrainConfig {
  std::size_t dim = 50;
  std::size_t components = 2;
  std::size_t window = 10;
  bool dynamic_window = true;
  std::size_t batch_size = 128;
  double lr = 0.05;
  double margin = 1.0;
  double subsample_t = 1e-5;
  SubsampleRule subsample_rule = SubsampleRule::kSqrt;
  std::uint64_t min_count = 5;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  double var_min = 1e-4;
  double var_max = 1e2;
  double neg_exponent = 0.75;
  std::size_t negatives = 1;
  double adagrad_eps = 1e-8;
  bool mean_batch_gradient = false;
  bool untied_context = false;
  std::size_t threads = 1;

  // Throws UsageError naming the first offending field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
// Missing keys keep their current value; unknown keys are a UsageError.
void from_json(const nlohmann::json& j, TrainConfig& cfg);

// Means ~ U(-sqrt(3/D), sqrt(3/D)), log-variances 0, scores 0, accumulators 0.
ParameterBank init_bank(std::size_t vocab_size, const TrainConfig& cfg, std::uint64_t seed);

struct AdagradConfig {
  double lr = 0.05;
  double eps = 1e-8;
  double log_var_min = -9.210340371976182;  // log(1e-4)
  double log_var_max = 4.605170185988092;   // log(1e2)
};

AdagradConfig adagrad_config(const TrainConfig& cfg);

// accum += g^2; theta -= lr * g / (sqrt(accum) + eps); then log-variances are
// clamped. Every entry is checked for finiteness before anything is written.
void adagrad_step(ParameterBank& bank, const SparseGradient& grads, const AdagradConfig& cfg);

struct TrainProgress {
  std::size_t epoch = 0;
  std::size_t batch = 0;       // batches completed in this epoch
  std::size_t total_batches = 0;
  double mean_loss = 0.0;      // mean triple loss since the previous report
};

struct TrainOptions {
  std::function<void(const TrainProgress&)> on_progress;
  std::size_t log_every = 1000;
  bool keep_batch_losses = false;
};

struct TrainResult {
  Vocabulary vocab;
  ParameterBank bank;
  std::optional<ParameterBank> context_bank;
  TrainConfig config;
  // Mean triple loss of each batch, in order, when requested.
  std::vector<double> batch_losses;
  std::size_t triples = 0;
};

// Full pipeline: vocabulary, sampler tables, initialization and cfg.epochs
// passes of Adagrad over (word, context, negative) triples.
TrainResult train(const std::string& corpus_path, const TrainConfig& cfg,
                  const TrainOptions& options = {});

// Same, over an in-memory id sequence with a prebuilt vocabulary.
TrainResult train_ids(std::span<const WordId> ids, Vocabulary vocab, const TrainConfig& cfg,
                      const TrainOptions& options = {});

}  // namespace gmkl
