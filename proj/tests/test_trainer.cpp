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

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gmkl/errors.hpp"
#include "gmkl/model_io.hpp"
#include "gmkl/trainer.hpp"
#include "support.hpp"

using namespace gmkl;
using gmkl::testing::make_two_topic_corpus;
using gmkl::testing::temp_path;
using gmkl::testing::write_tokens;

namespace {

// Small two-topic run shared by several cases.
TrainConfig small_config() {
  TrainConfig cfg;
  cfg.dim = 5;
  cfg.components = 2;
  cfg.window = 3;
  cfg.batch_size = 32;
  cfg.subsample_t = 0.0;
  cfg.min_count = 1;
  cfg.epochs = 1;
  cfg.seed = 3;
  return cfg;
}

struct EncodedCorpus {
  Vocabulary vocab;
  std::vector<WordId> ids;
};

EncodedCorpus small_corpus(std::size_t tokens) {
  const auto corpus = make_two_topic_corpus(5, tokens, 200, 10, 2, 0.1);
  EncodedCorpus e;
  e.vocab = build_vocab(corpus.tokens, 1);
  e.ids = encode(corpus.tokens, e.vocab);
  return e;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("initialization") {
  TrainConfig cfg;
  cfg.dim = 3;
  cfg.components = 2;
  const auto bank = init_bank(100, cfg, 7);
  for (float m : bank.all_means()) {
    CHECK(m >= -1.0f);
    CHECK(m <= 1.0f);
  }
  for (float s : bank.all_scores()) CHECK(s == 0.0f);
  for (float l : bank.all_log_vars()) CHECK(l == 0.0f);
  const auto mix = bank.mixture(42);
  CHECK(mix.weights[0] == 0.5);
  CHECK(mix.weights[1] == 0.5);

  // Per-entry variance 1/D, so the expected squared norm of a mean is 1.
  cfg.dim = 50;
  const auto big = init_bank(2000, cfg, 8);
  double sum_sq = 0.0;
  for (float m : big.all_means()) sum_sq += static_cast<double>(m) * m;
  const double n = static_cast<double>(big.all_means().size());
  CHECK(sum_sq / n == doctest::Approx(1.0 / 50.0).epsilon(0.02));
  CHECK(sum_sq / (2000.0 * 2.0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("adagrad hand iteration") {
  ParameterBank bank(1, 1, 1);
  SparseGradient g(1, 1);
  g.at(0).means[0] = 1.0;
  AdagradConfig cfg;
  cfg.lr = 0.05;
  adagrad_step(bank, g, cfg);
  CHECK(bank.means(0)[0] == doctest::Approx(-0.05 / (1.0 + 1e-8)).epsilon(1e-6));
  CHECK(bank.mean_accum(0)[0] == 1.0f);
  adagrad_step(bank, g, cfg);
  CHECK(bank.means(0)[0] == doctest::Approx(-0.05 * (1.0 + 1.0 / std::sqrt(2.0))).epsilon(1e-6));
  CHECK(std::abs(bank.means(0)[0] + 0.0854) < 1e-4);
}

TEST_CASE("zero gradient is a no-op") {
  ParameterBank bank(2, 2, 2);
  bank.means(1)[0] = 0.25f;
  SparseGradient g(2, 2);
  g.at(1);
  adagrad_step(bank, g, AdagradConfig{});
  CHECK(bank.means(1)[0] == 0.25f);
  CHECK(bank.mean_accum(1)[0] == 0.0f);
  CHECK(bank.score_accum(1)[0] == 0.0f);
}

TEST_CASE("log-variances are clamped") {
  ParameterBank bank(1, 1, 2);
  SparseGradient g(1, 2);
  g.at(0).log_vars = {-1.0, 1.0};
  AdagradConfig cfg;
  cfg.lr = 100.0;
  adagrad_step(bank, g, cfg);
  CHECK(bank.log_vars(0)[0] == static_cast<float>(cfg.log_var_max));
  CHECK(bank.log_vars(0)[1] == static_cast<float>(cfg.log_var_min));
  const auto mix = bank.mixture(0);
  CHECK(std::exp(mix.components[0].log_var[0]) <= 1e2 * (1 + 1e-6));
  CHECK(std::exp(mix.components[0].log_var[1]) >= 1e-4 * (1 - 1e-6));
}

TEST_CASE("non-finite gradients are training errors") {
  ParameterBank bank(4, 1, 1);
  SparseGradient g(1, 1);
  g.at(1).means[0] = 0.5;
  g.at(3).log_vars[0] = NAN;
  try {
    adagrad_step(bank, g, AdagradConfig{});
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    CHECK(what.find("word id 3") != std::string::npos);
    CHECK(what.find("log_var") != std::string::npos);
  }
  // Nothing was written.
  CHECK(bank.means(1)[0] == 0.0f);
}

TEST_CASE("config validation and JSON") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.var_min = 10.0;
  cfg.var_max = 1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.lr = -0.1;
  CHECK_THROWS_AS(cfg.validate(), UsageError);

  TrainConfig custom;
  custom.dim = 7;
  custom.subsample_rule = SubsampleRule::kSqrtPlusLinear;
  custom.untied_context = true;
  custom.seed = 123456789012345ULL;
  nlohmann::json j = custom;
  CHECK(j.get<TrainConfig>() == custom);
  CHECK(j["subsample_rule"] == "sqrt_plus_linear");

  nlohmann::json partial = {{"dim", 9}};
  TrainConfig from_partial;
  from_json(partial, from_partial);
  CHECK(from_partial.dim == 9);
  CHECK(from_partial.components == 2);

  nlohmann::json unknown = {{"dimension", 9}};
  TrainConfig target;
  CHECK_THROWS_AS(from_json(unknown, target), UsageError);
}

TEST_CASE("defaults") {
  const TrainConfig cfg;
  CHECK(cfg.dim == 50);
  CHECK(cfg.components == 2);
  CHECK(cfg.window == 10);
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.lr == 0.05);
  CHECK(cfg.subsample_t == 1e-5);
  CHECK(cfg.var_min == 1e-4);
  CHECK(cfg.var_max == 1e2);
}

TEST_CASE("zero epochs leaves the initialization") {
  const auto corpus = small_corpus(2000);
  auto cfg = small_config();
  cfg.epochs = 0;
  const auto result = train_ids(corpus.ids, corpus.vocab, cfg);
  const auto init = init_bank(corpus.vocab.size(), cfg, cfg.seed);
  CHECK(serialize_model(result.bank, result.vocab, cfg) ==
        serialize_model(init, corpus.vocab, cfg));
  CHECK(result.triples == 0);
}

TEST_CASE("single-threaded training is deterministic") {
  const auto corpus = small_corpus(4000);
  const auto cfg = small_config();
  const auto a = train_ids(corpus.ids, corpus.vocab, cfg);
  const auto b = train_ids(corpus.ids, corpus.vocab, cfg);
  CHECK(serialize_model(a.bank, a.vocab, cfg) == serialize_model(b.bank, b.vocab, cfg));
  CHECK(a.triples > 0);

  auto other = cfg;
  other.seed = 4;
  const auto c = train_ids(corpus.ids, corpus.vocab, other);
  CHECK(a.bank.all_means() != c.bank.all_means());
}

TEST_CASE("training lowers the loss and keeps parameters valid") {
  const auto corpus = small_corpus(20000);
  auto cfg = small_config();
  cfg.epochs = 2;
  TrainOptions opts;
  opts.keep_batch_losses = true;
  std::size_t reports = 0;
  opts.log_every = 50;
  opts.on_progress = [&](const TrainProgress& p) {
    ++reports;
    CHECK(std::isfinite(p.mean_loss));
  };
  const auto result = train_ids(corpus.ids, corpus.vocab, cfg, opts);
  REQUIRE(result.batch_losses.size() >= 40);
  double first = 0.0, last = 0.0;
  const std::size_t n = result.batch_losses.size();
  for (std::size_t i = 0; i < 10; ++i) first += result.batch_losses[i];
  for (std::size_t i = n - 10; i < n; ++i) last += result.batch_losses[i];
  CHECK(last < first);
  CHECK(reports > 0);

  const double lv_min = std::log(cfg.var_min), lv_max = std::log(cfg.var_max);
  for (float v : result.bank.all_log_vars()) {
    CHECK(v >= static_cast<float>(lv_min));
    CHECK(v <= static_cast<float>(lv_max));
  }
  for (float v : result.bank.all_means()) CHECK(std::isfinite(v));
  for (WordId w = 0; w < result.bank.vocab_size(); ++w) {
    const auto mix = result.bank.mixture(w);
    double sum = 0.0;
    for (double p : mix.weights) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
}

TEST_CASE("untied context bank and parallel training") {
  const auto corpus = small_corpus(6000);
  auto cfg = small_config();
  cfg.untied_context = true;
  const auto untied = train_ids(corpus.ids, corpus.vocab, cfg);
  REQUIRE(untied.context_bank.has_value());
  CHECK(untied.context_bank->all_means() != untied.bank.all_means());

  cfg.untied_context = false;
  cfg.threads = 3;
  cfg.mean_batch_gradient = true;
  const auto parallel = train_ids(corpus.ids, corpus.vocab, cfg);
  CHECK(parallel.triples > 0);
  for (float v : parallel.bank.all_means()) CHECK(std::isfinite(v));
}

TEST_CASE("train from a corpus file") {
  const auto corpus = make_two_topic_corpus(9, 3000, 200, 10, 2, 0.1);
  const auto path = temp_path("train_corpus");
  write_tokens(path, corpus.tokens);
  auto cfg = small_config();
  cfg.min_count = 5;
  const auto result = train(path, cfg);
  CHECK(result.vocab.size() == 22);
  CHECK(result.bank.vocab_size() == 22);
  CHECK_THROWS_AS(train(path + ".missing", cfg), IoError);
}

}  // TEST_SUITE
