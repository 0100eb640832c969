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

#include "gmkl/trainer.hpp"

#include <cmath>
#include <mutex>
#include <algorithm>
#include <exception>
#include <thread>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

constexpr std::size_t kLockStripes = 1024;
constexpr std::uint64_t kContextSeedSalt = 0x9e3779b97f4a7c15ULL;

const char* rule_name(SubsampleRule r) {
  return r == SubsampleRule::kSqrt ? "sqrt" : "sqrt_plus_linear";
}

SubsampleRule parse_rule(const std::string& s) {
  if (s == "sqrt") return SubsampleRule::kSqrt;
  if (s == "sqrt_plus_linear") return SubsampleRule::kSqrtPlusLinear;
  throw UsageError("unknown subsample_rule '" + s + "' (expected sqrt or sqrt_plus_linear)");
}

void require(bool ok, const char* field) {
  if (!ok) throw UsageError(std::string("invalid TrainConfig field: ") + field);
}

const char* kind_name(int kind) {
  switch (kind) {
    case 0: return "score";
    case 1: return "mean";
    default: return "log_var";
  }
}

// Shared-bank access for parallel training. Each word maps to one stripe;
// no thread ever holds more than one stripe at a time.
class StripedLocks {
 public:
  explicit StripedLocks(bool enabled) : enabled_(enabled) {}

  std::unique_lock<std::mutex> lock(WordId w) {
    if (!enabled_) return {};
    return std::unique_lock<std::mutex>(stripes_[w % kLockStripes]);
  }

 private:
  bool enabled_;
  std::mutex stripes_[kLockStripes];
};

void check_finite(const WordGradient& g, WordId word) {
  const std::vector<double>* parts[3] = {&g.scores, &g.means, &g.log_vars};
  for (int kind = 0; kind < 3; ++kind) {
    for (double x : *parts[kind]) {
      if (!std::isfinite(x)) {
        throw TrainingError("non-finite gradient for word id " + std::to_string(word) + " (" +
                            kind_name(kind) + ")");
      }
    }
  }
}

void update(std::span<float> theta, std::span<float> accum, const std::vector<double>& g,
            double lr, double eps) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k] == 0.0) continue;
    const double a = static_cast<double>(accum[k]) + g[k] * g[k];
    accum[k] = static_cast<float>(a);
    theta[k] = static_cast<float>(theta[k] - lr * g[k] / (std::sqrt(a) + eps));
  }
}

void apply_word(ParameterBank& bank, WordId word, const WordGradient& g, const AdagradConfig& cfg) {
  update(bank.scores(word), bank.score_accum(word), g.scores, cfg.lr, cfg.eps);
  update(bank.means(word), bank.mean_accum(word), g.means, cfg.lr, cfg.eps);
  auto lv = bank.log_vars(word);
  update(lv, bank.log_var_accum(word), g.log_vars, cfg.lr, cfg.eps);
  const auto lo = static_cast<float>(cfg.log_var_min);
  const auto hi = static_cast<float>(cfg.log_var_max);
  for (float& x : lv) x = std::min(hi, std::max(lo, x));
}

void apply_locked(ParameterBank& bank, const SparseGradient& grads, const AdagradConfig& cfg,
                  StripedLocks& locks) {
  for (const auto& [word, g] : grads) check_finite(g, word);
  for (const auto& [word, g] : grads) {
    auto guard = locks.lock(word);
    apply_word(bank, word, g, cfg);
  }
}

MixtureEmbedding read_mixture(const ParameterBank& bank, WordId w, StripedLocks& locks) {
  auto guard = locks.lock(w);
  return bank.mixture(w);
}

struct Batch {
  std::vector<TrainingTriple> triples;
};

// One worker's view: bank(s), locks and the loss config.
struct StepContext {
  ParameterBank& center;
  ParameterBank* context;  // null when tied
  StripedLocks& center_locks;
  StripedLocks& context_locks;
  LossConfig loss;
  AdagradConfig adagrad;
  bool mean_gradient;
};

// Gradient of every triple in the batch against the current parameters,
// then one Adagrad step. Returns the summed loss.
double run_batch(const Batch& batch, StepContext& ctx) {
  const std::size_t components = ctx.center.components();
  const std::size_t dim = ctx.center.dim();
  SparseGradient center_grad(components, dim);
  SparseGradient context_grad(components, dim);
  SparseGradient& ctx_grad = ctx.context ? context_grad : center_grad;
  const ParameterBank& ctx_bank = ctx.context ? *ctx.context : ctx.center;
  StripedLocks& ctx_locks = ctx.context ? ctx.context_locks : ctx.center_locks;

  MixtureGradient d_word, d_pos, d_neg;
  double loss_sum = 0.0;
  for (const TrainingTriple& t : batch.triples) {
    const MixtureEmbedding word = read_mixture(ctx.center, t.word_id, ctx.center_locks);
    const MixtureEmbedding pos = read_mixture(ctx_bank, t.pos_id, ctx_locks);
    const MixtureEmbedding neg = read_mixture(ctx_bank, t.neg_id, ctx_locks);
    const double loss = triple_loss_grad(word, pos, neg, ctx.loss, d_word, d_pos, d_neg);
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite loss on triple (" + std::to_string(t.word_id) + ", " +
                          std::to_string(t.pos_id) + ", " + std::to_string(t.neg_id) + ")");
    }
    loss_sum += loss;
    if (loss > 0.0) {
      add_to(center_grad.at(t.word_id), d_word);
      add_to(ctx_grad.at(t.pos_id), d_pos);
      add_to(ctx_grad.at(t.neg_id), d_neg);
    }
  }
  if (ctx.mean_gradient && !batch.triples.empty()) {
    const double inv = 1.0 / static_cast<double>(batch.triples.size());
    center_grad.scale(inv);
    context_grad.scale(inv);
  }
  apply_locked(ctx.center, center_grad, ctx.adagrad, ctx.center_locks);
  if (ctx.context) apply_locked(*ctx.context, context_grad, ctx.adagrad, ctx.context_locks);
  return loss_sum;
}

// Walks the pairs of one kept-token shard, forming triples and batches.
class ShardRunner {
 public:
  ShardRunner(std::span<const WordId> kept, const SamplerTables& tables, const TrainConfig& cfg,
              std::uint64_t seed)
      : tables_(tables), cfg_(cfg), rng_(seed), pairs_(kept, cfg.window, cfg.dynamic_window, rng_()) {}

  // Fills `batch` with up to batch_size triples; false when exhausted.
  bool next_batch(Batch& batch) {
    batch.triples.clear();
    while (batch.triples.size() < cfg_.batch_size) {
      if (pending_ == 0) {
        if (!pairs_.next(pair_)) break;
        pending_ = cfg_.negatives;
      }
      const WordId neg = draw_negative(tables_, pair_.context_id, rng_);
      batch.triples.push_back(TrainingTriple{pair_.center_id, pair_.context_id, neg});
      --pending_;
    }
    return !batch.triples.empty();
  }

 private:
  const SamplerTables& tables_;
  const TrainConfig& cfg_;
  std::mt19937_64 rng_;
  PairGenerator pairs_;
  TrainingPair pair_;
  std::size_t pending_ = 0;
};

}  // namespace

void TrainConfig::validate() const {
  require(dim >= 1, "dim");
  require(components >= 1, "components");
  require(window >= 1, "window");
  require(batch_size >= 1, "batch_size");
  require(std::isfinite(lr) && lr > 0.0, "lr");
  require(std::isfinite(margin) && margin > 0.0, "margin");
  require(std::isfinite(subsample_t) && subsample_t >= 0.0, "subsample_t");
  require(min_count >= 1, "min_count");
  require(std::isfinite(var_min) && var_min > 0.0, "var_min");
  require(std::isfinite(var_max) && var_max >= var_min, "var_max");
  require(std::isfinite(neg_exponent), "neg_exponent");
  require(negatives >= 1, "negatives");
  require(std::isfinite(adagrad_eps) && adagrad_eps >= 0.0, "adagrad_eps");
  require(threads >= 1, "threads");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"dim", c.dim},
                     {"components", c.components},
                     {"window", c.window},
                     {"dynamic_window", c.dynamic_window},
                     {"batch_size", c.batch_size},
                     {"lr", c.lr},
                     {"margin", c.margin},
                     {"subsample_t", c.subsample_t},
                     {"subsample_rule", rule_name(c.subsample_rule)},
                     {"min_count", c.min_count},
                     {"epochs", c.epochs},
                     {"seed", c.seed},
                     {"var_min", c.var_min},
                     {"var_max", c.var_max},
                     {"neg_exponent", c.neg_exponent},
                     {"negatives", c.negatives},
                     {"adagrad_eps", c.adagrad_eps},
                     {"mean_batch_gradient", c.mean_batch_gradient},
                     {"untied_context", c.untied_context},
                     {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "dim") c.dim = value.get<std::size_t>();
      else if (key == "components") c.components = value.get<std::size_t>();
      else if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "dynamic_window") c.dynamic_window = value.get<bool>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "margin") c.margin = value.get<double>();
      else if (key == "subsample_t") c.subsample_t = value.get<double>();
      else if (key == "subsample_rule") c.subsample_rule = parse_rule(value.get<std::string>());
      else if (key == "min_count") c.min_count = value.get<std::uint64_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "var_min") c.var_min = value.get<double>();
      else if (key == "var_max") c.var_max = value.get<double>();
      else if (key == "neg_exponent") c.neg_exponent = value.get<double>();
      else if (key == "negatives") c.negatives = value.get<std::size_t>();
      else if (key == "adagrad_eps") c.adagrad_eps = value.get<double>();
      else if (key == "mean_batch_gradient") c.mean_batch_gradient = value.get<bool>();
      else if (key == "untied_context") c.untied_context = value.get<bool>();
      else if (key == "threads") c.threads = value.get<std::size_t>();
      else throw UsageError("unknown config key: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("bad value for config key '" + key + "': " + e.what());
    }
  }
}

ParameterBank init_bank(std::size_t vocab_size, const TrainConfig& cfg, std::uint64_t seed) {
  ParameterBank bank(vocab_size, cfg.components, cfg.dim);
  const double bound = std::sqrt(3.0 / static_cast<double>(cfg.dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (float& m : bank.all_means()) m = static_cast<float>(unif(rng));
  return bank;
}

AdagradConfig adagrad_config(const TrainConfig& cfg) {
  return AdagradConfig{cfg.lr, cfg.adagrad_eps, std::log(cfg.var_min), std::log(cfg.var_max)};
}

void adagrad_step(ParameterBank& bank, const SparseGradient& grads, const AdagradConfig& cfg) {
  for (const auto& [word, g] : grads) {
    bank.check_word(word);
    check_finite(g, word);
  }
  for (const auto& [word, g] : grads) apply_word(bank, word, g, cfg);
}

TrainResult train_ids(std::span<const WordId> ids, Vocabulary vocab, const TrainConfig& cfg,
                      const TrainOptions& options) {
  cfg.validate();
  const SamplerTables tables(vocab, SamplerConfig{cfg.subsample_t, cfg.subsample_rule,
                                                  cfg.neg_exponent});
  if (vocab.size() < 2) throw UsageError("training needs a vocabulary of at least 2 words");

  TrainResult result;
  result.config = cfg;
  result.bank = init_bank(vocab.size(), cfg, cfg.seed);
  if (cfg.untied_context) result.context_bank = init_bank(vocab.size(), cfg, cfg.seed ^ kContextSeedSalt);
  result.vocab = std::move(vocab);

  const bool parallel = cfg.threads > 1;
  StripedLocks center_locks(parallel);
  StripedLocks context_locks(parallel);
  StepContext step{result.bank,
                   result.context_bank ? &*result.context_bank : nullptr,
                   center_locks,
                   context_locks,
                   LossConfig{cfg.margin},
                   adagrad_config(cfg),
                   cfg.mean_batch_gradient};

  std::mt19937_64 rng(cfg.seed);
  std::mutex report_mu;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<WordId> kept = subsample(ids, tables, rng);
    const std::uint64_t epoch_seed = rng();

    std::size_t batches = 0;
    std::size_t window_batches = 0;
    double window_loss = 0.0;
    std::size_t window_triples = 0;

    auto record = [&](const Batch& batch, double loss_sum) {
      std::lock_guard<std::mutex> guard(report_mu);
      ++batches;
      ++window_batches;
      window_loss += loss_sum;
      window_triples += batch.triples.size();
      result.triples += batch.triples.size();
      if (options.keep_batch_losses) {
        result.batch_losses.push_back(loss_sum / static_cast<double>(batch.triples.size()));
      }
      if (options.on_progress && options.log_every > 0 && window_batches == options.log_every) {
        options.on_progress(TrainProgress{epoch, batches, 0,
                                          window_loss / static_cast<double>(window_triples)});
        window_batches = 0;
        window_loss = 0.0;
        window_triples = 0;
      }
    };

    if (!parallel) {
      ShardRunner runner(kept, tables, cfg, epoch_seed);
      Batch batch;
      while (runner.next_batch(batch)) record(batch, run_batch(batch, step));
    } else {
      const std::size_t shards = std::min<std::size_t>(cfg.threads, std::max<std::size_t>(1, kept.size()));
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(shards);
      for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t lo = kept.size() * s / shards;
        const std::size_t hi = kept.size() * (s + 1) / shards;
        workers.emplace_back([&, s, lo, hi] {
          try {
            std::span<const WordId> shard(kept.data() + lo, hi - lo);
            ShardRunner runner(shard, tables, cfg, epoch_seed + 0x100000001b3ULL * (s + 1));
            Batch batch;
            while (runner.next_batch(batch)) record(batch, run_batch(batch, step));
          } catch (...) {
            errors[s] = std::current_exception();
          }
        });
      }
      for (auto& w : workers) w.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    if (options.on_progress && window_batches > 0) {
      options.on_progress(TrainProgress{epoch, batches, batches,
                                        window_loss / static_cast<double>(window_triples)});
    }
  }
  return result;
}

TrainResult train(const std::string& corpus_path, const TrainConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  Vocabulary vocab;
  {
    Text8Reader reader(corpus_path);
    vocab = build_vocab(reader, cfg.min_count);
  }
  std::vector<WordId> ids;
  {
    Text8Reader reader(corpus_path);
    ids = encode(reader, vocab);
  }
  return train_ids(ids, std::move(vocab), cfg, options);
}

}  // namespace gmkl
