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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmkl/corpus.hpp"
#include "gmkl/param_bank.hpp"
#include "gmkl/trainer.hpp"

namespace gmkl {

// A trained model as stored on disk. Only the center bank is persisted;
// Adagrad accumulators are not.
struct Model {
  TrainConfig config;
  Vocabulary vocab;
  ParameterBank bank;

  // Mixture for a token; EvaluationError-free lookup is done by the caller.
  MixtureEmbedding mixture(WordId w) const { return bank.mixture(w); }
};

inline constexpr char kModelMagic[4] = {'G', 'M', 'K', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// Little-endian layout: "GMKL", u32 version, u32 V, u32 C, u32 D, u64 config
// length, config JSON, V x (u32 length, bytes, u64 count), f32 scores[V*C],
// f32 means[V*C*D], f32 log_vars[V*C*D], u64 FNV-1a of everything before it.
std::vector<std::uint8_t> serialize_model(const ParameterBank& bank, const Vocabulary& vocab,
                                          const TrainConfig& cfg);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ParameterBank& bank, const Vocabulary& vocab, const TrainConfig& cfg,
                const std::string& path);
Model load_model(const std::string& path);

// "token comp v1 ... vD" per (word, component), word-id order.
void export_means(const Model& model, const std::string& path);

}  // namespace gmkl
