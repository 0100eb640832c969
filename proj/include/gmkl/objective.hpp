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

#include <vector>

#include "gmkl/mixture.hpp"
#include "gmkl/param_bank.hpp"

namespace gmkl {

// (w, c, c'): a word, a context seen with it, and a sampled negative context.
struct TrainingTriple {
  WordId word_id = 0;
  WordId pos_id = 0;
  WordId neg_id = 0;
};

struct LossConfig {
  double margin = 1.0;
};

// Gradient of a scalar with respect to one mixture, in the softmax-score
// parametrization used by the parameter bank.
struct MixtureGradient {
  std::vector<double> scores;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> log_vars;

  MixtureGradient() = default;
  MixtureGradient(std::size_t components, std::size_t dim);
};

// Adds scale * d kl_approx(f, g) into df and dg, returns kl_approx(f, g).
// df and dg may alias when f and g are the same word.
double kl_approx_with_grad(const MixtureEmbedding& f, const MixtureEmbedding& g, double scale,
                           MixtureGradient& df, MixtureGradient& dg);

// Hinge max(0, m + KL(w||c) - KL(w||c')) with KL = kl_approx.
double triple_loss(const MixtureEmbedding& word, const MixtureEmbedding& pos,
                   const MixtureEmbedding& neg, const LossConfig& cfg);

// Loss plus gradients. The three gradients are zeroed first and stay zero
// when the hinge is inactive (including exactly at the kink).
double triple_loss_grad(const MixtureEmbedding& word, const MixtureEmbedding& pos,
                        const MixtureEmbedding& neg, const LossConfig& cfg,
                        MixtureGradient& d_word, MixtureGradient& d_pos, MixtureGradient& d_neg);

double triple_loss(const ParameterBank& bank, const TrainingTriple& t, const LossConfig& cfg);
// Contexts read from `context_bank`, the word from `center_bank`.
double triple_loss(const ParameterBank& center_bank, const ParameterBank& context_bank,
                   const TrainingTriple& t, const LossConfig& cfg);

// Gradient entries for the three words of `t`; empty when the hinge is off.
SparseGradient triple_grad(const ParameterBank& bank, const TrainingTriple& t,
                           const LossConfig& cfg);

struct SplitGradient {
  SparseGradient center;
  SparseGradient context;
};

SplitGradient triple_grad(const ParameterBank& center_bank, const ParameterBank& context_bank,
                          const TrainingTriple& t, const LossConfig& cfg);

// Adds the gradient of the triple to `out` (tied bank) and returns the loss.
double accumulate_triple(const ParameterBank& bank, const TrainingTriple& t, const LossConfig& cfg,
                         SparseGradient& out);
double accumulate_triple(const ParameterBank& center_bank, const ParameterBank& context_bank,
                         const TrainingTriple& t, const LossConfig& cfg, SparseGradient& center_out,
                         SparseGradient& context_out);

// Converts a mixture gradient to the bank's flat per-word layout and adds it.
void add_to(WordGradient& dst, const MixtureGradient& src);

}  // namespace gmkl
