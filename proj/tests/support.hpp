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
#include <random>
#include <string>
#include <vector>

#include "gmkl/eval.hpp"
#include "gmkl/gauss.hpp"
#include "gmkl/mixture.hpp"
#include "gmkl/model_io.hpp"
#include "gmkl/objective.hpp"

namespace gmkl::testing {

// Lowercase name: prefix followed by `index` in base 26 (two letters minimum).
std::string word_name(const std::string& prefix, std::size_t index);

// Unique path under the system temp directory.
std::string temp_path(const std::string& stem);

void write_text(const std::string& path, const std::string& content);
void write_tokens(const std::string& path, const std::vector<std::string>& tokens);

// Random Gaussian with means in [-mean_range, mean_range] and variances in
// [var_lo, var_hi] (log-uniform).
DiagGaussian random_gaussian(std::mt19937_64& rng, std::size_t dim, double mean_range,
                             double var_lo, double var_hi);
MixtureEmbedding random_mixture(std::mt19937_64& rng, std::size_t components, std::size_t dim,
                                double mean_range, double var_lo, double var_hi);

// Oracles independent of gauss.cpp: per-dimension trapezoidal quadrature.
double quadrature_log_el(const DiagGaussian& a, const DiagGaussian& b);
double quadrature_kl(const DiagGaussian& a, const DiagGaussian& b);

// Unconstrained parameters of one mixture, as the trainer sees them.
struct MixtureParams {
  std::vector<double> scores;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> log_vars;
  MixtureEmbedding build() const;
};

MixtureParams random_params(std::mt19937_64& rng, std::size_t components, std::size_t dim,
                            double mean_range, double var_lo, double var_hi);

struct FdReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_excess = 0.0;  // largest error divided by its tolerance
};

// Central differences of triple_loss over every parameter of the three
// mixtures against triple_loss_grad. An entry passes when its relative error
// is within rel_tol, or, where both values are below small_grad, its absolute
// error is within abs_tol.
FdReport fd_check_triple(const MixtureParams& word, const MixtureParams& pos,
                         const MixtureParams& neg, double margin, double h, double rel_tol,
                         double abs_tol, double small_grad);

// Model whose word w has the given component means (unit variances, uniform
// weights). Counts descend with the word index.
Model toy_model(const std::vector<std::string>& words,
                const std::vector<std::vector<std::vector<double>>>& means);

struct TwoTopicCorpus {
  std::vector<std::string> tokens;
  std::vector<std::string> topic_a;
  std::vector<std::string> topic_b;
  std::vector<std::string> polysemous;
};

// Two disjoint topic vocabularies, alternating in fixed-length blocks, with
// shared polysemous tokens sprinkled into both.
TwoTopicCorpus make_two_topic_corpus(std::uint64_t seed, std::size_t total_tokens = 200000,
                                     std::size_t block = 1000, std::size_t topic_size = 50,
                                     std::size_t num_polysemous = 10,
                                     double polysemous_rate = 0.1);

struct HypernymCorpus {
  std::vector<std::string> tokens;
  std::vector<std::string> parents;
  // children[p] are the hyponyms of parents[p].
  std::vector<std::vector<std::string>> children;
};

// Parents draw their neighbors from a per-parent pool of context words;
// each child draws only from a fixed subset of its parent's pool.
HypernymCorpus make_hypernym_corpus(std::uint64_t seed, std::size_t occurrences = 40000,
                                    std::size_t num_parents = 10, std::size_t children_per_parent = 5,
                                    std::size_t pool_size = 10, std::size_t subset_size = 3,
                                    std::size_t contexts_per_side = 2);

}  // namespace gmkl::testing
