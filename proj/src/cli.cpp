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

#include "gmkl/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmkl/errors.hpp"
#include "gmkl/eval.hpp"
#include "gmkl/model_io.hpp"
#include "gmkl/trainer.hpp"

namespace gmkl::cli {
namespace {

// Shortest round-trip text for a double, always with a decimal point.
std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, end);
  if (ec == std::errc() && s.find_first_of(".einfa") == std::string::npos) s += ".0";
  return s;
}

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// One TrainConfig field exposed as a flag. `apply` copies the flag value
// into the effective config when the flag was given.
struct FieldBinding {
  CLI::Option* option;
  std::function<void(TrainConfig&, const TrainConfig&)> apply;
};

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string config_path;
  std::string vocab_out;
  std::size_t log_every = 1000;
  bool fixed_window = false;
  std::string subsample_rule = "sqrt";
  TrainConfig flags;
  std::vector<FieldBinding> bindings;
};

template <typename T>
void bind(CLI::App* app, TrainArgs& args, const std::string& name, T TrainConfig::*field,
          const std::string& help) {
  CLI::Option* opt = app->add_option(name, args.flags.*field, help)->capture_default_str();
  args.bindings.push_back(
      {opt, [field](TrainConfig& dst, const TrainConfig& src) { dst.*field = src.*field; }});
}

void bind_flag(CLI::App* app, TrainArgs& args, const std::string& name, bool TrainConfig::*field,
               const std::string& help) {
  CLI::Option* opt = app->add_flag(name, args.flags.*field, help);
  args.bindings.push_back(
      {opt, [field](TrainConfig& dst, const TrainConfig& src) { dst.*field = src.*field; }});
}

void setup_train(CLI::App* app, TrainArgs& args) {
  app->add_option("--corpus", args.corpus, "Text8-format corpus file")->required();
  app->add_option("--out", args.out, "Output model file")->required();
  app->add_option("--config", args.config_path,
                  "JSON file with TrainConfig fields (flags take precedence)");
  app->add_option("--vocab-out", args.vocab_out, "Also write the vocabulary as token<TAB>count");
  app->add_option("--log-every", args.log_every, "Report mean loss every N batches")
      ->capture_default_str();

  bind(app, args, "--dim", &TrainConfig::dim, "Embedding dimension D");
  bind(app, args, "--components", &TrainConfig::components, "Mixture components C");
  bind(app, args, "--window", &TrainConfig::window, "Context window length");
  bind(app, args, "--batch-size", &TrainConfig::batch_size, "Triples per Adagrad step");
  bind(app, args, "--lr", &TrainConfig::lr, "Adagrad learning rate");
  bind(app, args, "--margin", &TrainConfig::margin, "Hinge margin m");
  bind(app, args, "--subsample-t", &TrainConfig::subsample_t,
       "Subsampling threshold t (0 disables)");
  bind(app, args, "--min-count", &TrainConfig::min_count, "Minimum token count for the vocabulary");
  bind(app, args, "--epochs", &TrainConfig::epochs, "Passes over the corpus");
  bind(app, args, "--seed", &TrainConfig::seed, "Random seed");
  bind(app, args, "--var-min", &TrainConfig::var_min, "Lower variance clamp");
  bind(app, args, "--var-max", &TrainConfig::var_max, "Upper variance clamp");
  bind(app, args, "--neg-exponent", &TrainConfig::neg_exponent,
       "Exponent of the unigram negative-sampling proposal");
  bind(app, args, "--negatives", &TrainConfig::negatives, "Negative samples per positive pair");
  bind(app, args, "--adagrad-eps", &TrainConfig::adagrad_eps, "Adagrad epsilon");
  bind_flag(app, args, "--mean-batch-gradient", &TrainConfig::mean_batch_gradient,
            "Average (instead of sum) gradients within a batch");
  bind_flag(app, args, "--untied-context", &TrainConfig::untied_context,
            "Separate parameter bank for context words (not saved; evaluation uses the center bank)");

  CLI::Option* threads =
      app->add_option("--threads", args.flags.threads,
                      "Worker threads; more than 1 enables lock-striped parallel updates and "
                      "gives up run-to-run determinism")
          ->capture_default_str()
          ->envname("GMKL_THREADS");
  args.bindings.push_back(
      {threads, [](TrainConfig& dst, const TrainConfig& src) { dst.threads = src.threads; }});

  CLI::Option* fixed = app->add_flag("--fixed-window", args.fixed_window,
                                     "Use the full window for every center (no random shrink)");
  args.bindings.push_back({fixed, [&args](TrainConfig& dst, const TrainConfig&) {
                             dst.dynamic_window = !args.fixed_window;
                           }});
  CLI::Option* rule =
      app->add_option("--subsample-rule", args.subsample_rule,
                      "Keep probability: sqrt = min(1, sqrt(t/f)), sqrt_plus_linear adds t/f")
          ->capture_default_str()
          ->check(CLI::IsMember({"sqrt", "sqrt_plus_linear"}));
  args.bindings.push_back({rule, [&args](TrainConfig& dst, const TrainConfig&) {
                             dst.subsample_rule = args.subsample_rule == "sqrt"
                                                      ? SubsampleRule::kSqrt
                                                      : SubsampleRule::kSqrtPlusLinear;
                           }});
}

TrainConfig effective_config(const TrainArgs& args) {
  TrainConfig cfg;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw IoError("cannot open config file: " + args.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file " + args.config_path + " is not valid JSON: " + e.what());
    }
    from_json(j, cfg);
  }
  for (const auto& b : args.bindings) {
    if (b.option->count() > 0) b.apply(cfg, args.flags);
  }
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  const TrainConfig cfg = effective_config(args);
  if (!std::filesystem::exists(args.corpus)) throw IoError("corpus not found: " + args.corpus);
  TrainOptions opts;
  opts.log_every = args.log_every;
  opts.on_progress = [&out](const TrainProgress& p) {
    out << "epoch " << p.epoch + 1 << " batch " << p.batch << " loss " << fmt(p.mean_loss) << '\n';
  };
  TrainResult result = train(args.corpus, cfg, opts);
  save_model(result.bank, result.vocab, result.config, args.out);
  if (!args.vocab_out.empty()) result.vocab.export_tsv(args.vocab_out);
  out << "model=" << args.out << " vocab=" << result.vocab.size() << " triples=" << result.triples
      << '\n';
  return kOk;
}

WordId lookup(const Model& model, const std::string& token) {
  const WordId id = model.vocab.find(token);
  if (id == Vocabulary::kNotFound) throw UsageError("word not in vocabulary: " + token);
  return id;
}

int map_exception(std::ostream& err) {
  try {
    throw;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian mixture word embeddings trained with an approximate-KL energy"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a Text8-format corpus");
  setup_train(train_cmd, train_args);

  std::string model_path, dataset_path, metric_name_arg = "maxcos", format = "tsv", name;
  bool per_c = false, pretty = false;
  CLI::App* sim_cmd = app.add_subcommand("eval-sim", "Spearman correlation on a word-similarity set");
  sim_cmd->add_option("--model", model_path, "Model file")->required();
  sim_cmd->add_option("--dataset", dataset_path, "Similarity dataset")->required();
  sim_cmd->add_option("--metric", metric_name_arg, "maxcos, avgcos, klapprox or klcomp")
      ->capture_default_str();
  sim_cmd->add_option("--format", format, "tsv (word1 word2 score) or scws")
      ->capture_default_str()
      ->check(CLI::IsMember({"tsv", "scws"}));
  sim_cmd->add_option("--name", name, "Dataset name in the output (default: file stem)");
  sim_cmd->add_flag("--avgcos-per-c", per_c, "Divide the AvgCos double sum by C instead of C^2");
  sim_cmd->add_flag("--pretty", pretty, "Human-readable output");

  std::size_t threshold_steps = 0;
  CLI::App* ent_cmd = app.add_subcommand("eval-entail", "Best precision / F1 threshold sweep");
  ent_cmd->add_option("--model", model_path, "Model file")->required();
  ent_cmd->add_option("--dataset", dataset_path, "premise<TAB>hypothesis<TAB>label file")->required();
  ent_cmd->add_option("--name", name, "Dataset name in the output (default: file stem)");
  ent_cmd->add_option("--threshold-steps", threshold_steps,
                      "Cap on the number of thresholds tried (0 = every observed score)")
      ->capture_default_str();
  ent_cmd->add_flag("--pretty", pretty, "Human-readable output");

  std::string word;
  std::size_t component = 0, k = 10;
  CLI::App* nn_cmd = app.add_subcommand("neighbors", "Nearest (word, component) means by cosine");
  nn_cmd->add_option("--model", model_path, "Model file")->required();
  nn_cmd->add_option("--word", word, "Query word")->required();
  nn_cmd->add_option("--component", component, "Query component")->capture_default_str();
  nn_cmd->add_option("--k", k, "Number of neighbors")->capture_default_str();
  nn_cmd->add_flag("--pretty", pretty, "One comma-separated token:component line");

  std::string w1, w2;
  CLI::App* kl_cmd = app.add_subcommand("kl", "KL bounds between two words, both directions");
  kl_cmd->add_option("--model", model_path, "Model file")->required();
  kl_cmd->add_option("--w1", w1, "First word")->required();
  kl_cmd->add_option("--w2", w2, "Second word")->required();

  std::string export_out;
  CLI::App* export_cmd = app.add_subcommand("export", "Write component means as text");
  export_cmd->add_option("--model", model_path, "Model file")->required();
  export_cmd->add_option("--out", export_out, "Output file (token comp v1..vD per line)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);

    if (*sim_cmd) {
      const SimilarityMetric metric = parse_metric(metric_name_arg);
      const Model model = load_model(model_path);
      const auto records = format == "scws" ? read_scws(dataset_path) : read_similarity_tsv(dataset_path);
      const auto r = eval_similarity(model, records, metric, SimilarityOptions{per_c});
      const std::string label = name.empty() ? dataset_name(dataset_path) : name;
      if (pretty) {
        out << label << "  " << metric_name(metric) << "  rho*100 = " << std::fixed
            << std::setprecision(2) << r.rho_times_100 << "  (" << r.n_used << " pairs, " << r.n_oov
            << " OOV)\n";
      } else {
        out << "dataset=" << label << " metric=" << metric_name(metric)
            << " rho100=" << fmt(r.rho_times_100) << " used=" << r.n_used << " oov=" << r.n_oov
            << '\n';
      }
      return kOk;
    }

    if (*ent_cmd) {
      const Model model = load_model(model_path);
      const auto records = read_entailment_tsv(dataset_path);
      const auto r = eval_entailment(model, records, threshold_steps);
      const std::string label = name.empty() ? dataset_name(dataset_path) : name;
      if (pretty) {
        out << label << "  best precision " << std::fixed << std::setprecision(2)
            << 100.0 * r.best_precision << "  best F1 " << 100.0 * r.best_f1 << '\n';
      } else {
        out << "dataset=" << label << " best_precision=" << fmt(r.best_precision)
            << " best_f1=" << fmt(r.best_f1) << '\n';
      }
      return kOk;
    }

    if (*nn_cmd) {
      const Model model = load_model(model_path);
      const auto result = neighbors(model, word, component, k);
      if (pretty) {
        for (std::size_t i = 0; i < result.size(); ++i) {
          out << (i ? ", " : "") << result[i].token << ':' << result[i].component;
        }
        out << '\n';
      } else {
        for (std::size_t i = 0; i < result.size(); ++i) {
          out << i + 1 << ' ' << result[i].token << ':' << result[i].component << ' '
              << fmt(result[i].cosine) << '\n';
        }
      }
      return kOk;
    }

    if (*kl_cmd) {
      const Model model = load_model(model_path);
      const MixtureEmbedding a = model.mixture(lookup(model, w1));
      const MixtureEmbedding b = model.mixture(lookup(model, w2));
      for (int dir = 0; dir < 2; ++dir) {
        const auto& f = dir == 0 ? a : b;
        const auto& g = dir == 0 ? b : a;
        const KlBounds kb = kl_bounds(f, g);
        out << "from=" << (dir == 0 ? w1 : w2) << " to=" << (dir == 0 ? w2 : w1)
            << " kl_lower=" << fmt(kb.lower) << " kl_upper=" << fmt(kb.upper)
            << " kl_approx=" << fmt(kb.mean()) << '\n';
      }
      return kOk;
    }

    if (*export_cmd) {
      const Model model = load_model(model_path);
      export_means(model, export_out);
      return kOk;
    }
  } catch (...) {
    return map_exception(err);
  }
  return kUsage;
}

}  // namespace gmkl::cli
