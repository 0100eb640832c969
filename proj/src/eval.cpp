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

#include "gmkl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

template <typename A, typename B>
double dot(std::span<A> a, std::span<B> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += static_cast<double>(a[d]) * static_cast<double>(b[d]);
  return s;
}

// Cosine matrix entry for component means of two mixtures.
double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw EvaluationError("zero-norm component mean");
  return dot(std::span<const double>(a), std::span<const double>(b)) / (na * nb);
}

void check_dims(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  if (f.size() == 0 || g.size() == 0) throw UsageError("empty mixture");
  if (f.dim() != g.dim()) throw UsageError("mixture dimension mismatch");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(path + ":" + std::to_string(line_no) + ": bad score '" + s + "'");
  }
}

template <typename Fn>
void for_each_line(const std::string& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(line, line_no);
  }
}

std::string word_name(const Model& model, WordId w) { return model.vocab.token(w); }

MixtureEmbedding checked_mixture(const Model& model, WordId w) {
  MixtureEmbedding m = model.mixture(w);
  for (const auto& c : m.components) {
    if (norm(c.mean) == 0.0) {
      throw EvaluationError("zero-norm component mean for word '" + word_name(model, w) + "'");
    }
  }
  return m;
}

}  // namespace

double max_cos(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  check_dims(f, g);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : f.components) {
    for (const auto& b : g.components) best = std::max(best, cosine(a.mean, b.mean));
  }
  return best;
}

double avg_cos(const MixtureEmbedding& f, const MixtureEmbedding& g, bool per_c) {
  check_dims(f, g);
  double sum = 0.0;
  for (const auto& a : f.components) {
    for (const auto& b : g.components) sum += cosine(a.mean, b.mean);
  }
  const double denom = per_c ? static_cast<double>(f.size())
                             : static_cast<double>(f.size() * g.size());
  return sum / denom;
}

double kl_comp(const MixtureEmbedding& f, const MixtureEmbedding& g) {
  check_dims(f, g);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : f.components) {
    for (const auto& b : g.components) best = std::max(best, -kl_diag(a, b));
  }
  return best;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> model_scores, std::span<const double> human_scores) {
  if (model_scores.size() != human_scores.size()) {
    throw EvaluationError("spearman: length mismatch");
  }
  const std::size_t n = model_scores.size();
  if (n < 3) throw EvaluationError("spearman: need at least 3 pairs");
  const auto rx = average_ranks(model_scores);
  const auto ry = average_ranks(human_scores);
  const double mean = 0.5 * static_cast<double>(n + 1);  // same for both rank vectors
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = rx[k] - mean;
    const double dy = ry[k] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw EvaluationError("spearman: undefined for a constant list");
  return sxy / std::sqrt(sxx * syy);
}

SimilarityMetric parse_metric(std::string_view name) {
  if (name == "maxcos") return SimilarityMetric::kMaxCos;
  if (name == "avgcos") return SimilarityMetric::kAvgCos;
  if (name == "klapprox") return SimilarityMetric::kKlApprox;
  if (name == "klcomp") return SimilarityMetric::kKlComp;
  throw UsageError("unknown metric '" + std::string(name) +
                   "' (valid: maxcos, avgcos, klapprox, klcomp)");
}

const char* metric_name(SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::kMaxCos: return "maxcos";
    case SimilarityMetric::kAvgCos: return "avgcos";
    case SimilarityMetric::kKlApprox: return "klapprox";
    case SimilarityMetric::kKlComp: return "klcomp";
  }
  return "?";
}

std::vector<SimilarityRecord> read_similarity_tsv(const std::string& path) {
  std::vector<SimilarityRecord> out;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_tabs(line);
    if (f.size() != 3) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    out.push_back(SimilarityRecord{f[0], f[1], parse_double(f[2], path, line_no)});
  });
  return out;
}

std::vector<SimilarityRecord> read_scws(const std::string& path) {
  constexpr std::size_t kFields = 18;
  std::vector<SimilarityRecord> out;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_tabs(line);
    if (f.size() != kFields) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(kFields) + " SCWS fields, got " + std::to_string(f.size()));
    }
    // Contexts (fields 5 and 6) and individual ratings are not used.
    out.push_back(SimilarityRecord{f[1], f[3], parse_double(f[17], path, line_no)});
  });
  return out;
}

std::vector<EntailmentRecord> read_entailment_tsv(const std::string& path) {
  std::vector<EntailmentRecord> out;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_tabs(line);
    if (f.size() != 3) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    bool label;
    if (f[2] == "1" || f[2] == "true") {
      label = true;
    } else if (f[2] == "0" || f[2] == "false") {
      label = false;
    } else {
      throw InputError(path + ":" + std::to_string(line_no) + ": bad label '" + f[2] + "'");
    }
    out.push_back(EntailmentRecord{f[0], f[1], label});
  });
  return out;
}

double similarity_score(const MixtureEmbedding& f, const MixtureEmbedding& g,
                        SimilarityMetric metric, const SimilarityOptions& opts) {
  switch (metric) {
    case SimilarityMetric::kMaxCos: return max_cos(f, g);
    case SimilarityMetric::kAvgCos: return avg_cos(f, g, opts.avg_cos_per_c);
    case SimilarityMetric::kKlApprox: return -kl_approx(f, g);
    case SimilarityMetric::kKlComp: return kl_comp(f, g);
  }
  throw UsageError("unknown metric");
}

SimilarityResult eval_similarity(const Model& model, std::span<const SimilarityRecord> records,
                                 SimilarityMetric metric, const SimilarityOptions& opts) {
  SimilarityResult result;
  std::vector<double> model_scores, human_scores;
  for (const auto& r : records) {
    const WordId a = model.vocab.find(r.word1);
    const WordId b = model.vocab.find(r.word2);
    if (a == Vocabulary::kNotFound || b == Vocabulary::kNotFound) {
      ++result.n_oov;
      continue;
    }
    model_scores.push_back(
        similarity_score(checked_mixture(model, a), checked_mixture(model, b), metric, opts));
    human_scores.push_back(r.human_score);
  }
  result.n_used = model_scores.size();
  if (result.n_used < 3) {
    throw EvaluationError("similarity evaluation needs at least 3 in-vocabulary pairs, got " +
                          std::to_string(result.n_used));
  }
  result.rho_times_100 = 100.0 * spearman(model_scores, human_scores);
  return result;
}

EntailmentResult sweep_thresholds(std::span<const double> scores, const std::vector<bool>& labels,
                                  std::size_t max_thresholds) {
  if (scores.size() != labels.size()) throw UsageError("scores and labels differ in length");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0 || positives == labels.size()) {
    throw EvaluationError("entailment evaluation needs both positive and negative records");
  }

  // Scores descending; walking the list lowers the threshold one distinct
  // value at a time.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  struct Point {
    double threshold;
    std::size_t tp;
    std::size_t fp;
  };
  std::vector<Point> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0, 0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    points.push_back({s, tp, fp});
  }

  if (max_thresholds > 0 && points.size() > max_thresholds) {
    std::vector<Point> thinned;
    const std::size_t n = points.size();
    for (std::size_t k = 0; k < max_thresholds; ++k) {
      const std::size_t idx = max_thresholds == 1 ? n - 1 : k * (n - 1) / (max_thresholds - 1);
      if (thinned.empty() || thinned.back().threshold != points[idx].threshold) {
        thinned.push_back(points[idx]);
      }
    }
    points = std::move(thinned);
  }

  EntailmentResult best;
  best.best_precision = -1.0;
  best.best_f1 = -1.0;
  const auto fn_total = static_cast<double>(positives);
  // Points run from high to low thresholds; >= keeps the lowest on ties.
  for (const Point& p : points) {
    const std::size_t predicted = p.tp + p.fp;
    if (predicted > 0) {
      const double precision = static_cast<double>(p.tp) / static_cast<double>(predicted);
      if (precision >= best.best_precision) {
        best.best_precision = precision;
        best.precision_threshold = p.threshold;
      }
    }
    const double f1 = 2.0 * static_cast<double>(p.tp) /
                      (static_cast<double>(predicted) + fn_total);
    if (f1 >= best.best_f1) {
      best.best_f1 = f1;
      best.f1_threshold = p.threshold;
    }
  }
  best.n_used = scores.size();
  return best;
}

EntailmentResult eval_entailment(const Model& model, std::span<const EntailmentRecord> records,
                                 std::size_t threshold_steps) {
  std::vector<double> scores;
  std::vector<bool> labels;
  std::size_t oov = 0;
  for (const auto& r : records) {
    const WordId a = model.vocab.find(r.premise);
    const WordId b = model.vocab.find(r.hypothesis);
    if (a == Vocabulary::kNotFound || b == Vocabulary::kNotFound) {
      ++oov;
      continue;
    }
    scores.push_back(max_cos(checked_mixture(model, a), checked_mixture(model, b)));
    labels.push_back(r.label);
  }
  if (scores.empty()) throw EvaluationError("no usable entailment records");
  EntailmentResult result = sweep_thresholds(scores, labels, threshold_steps);
  result.n_oov = oov;
  return result;
}

std::vector<Neighbor> neighbors(const Model& model, std::string_view query, std::size_t component,
                                std::size_t k) {
  const WordId q = model.vocab.find(query);
  if (q == Vocabulary::kNotFound) {
    throw UsageError("word not in vocabulary: " + std::string(query));
  }
  const std::size_t components = model.bank.components();
  if (component >= components) {
    throw UsageError("component " + std::to_string(component) + " out of range (C = " +
                     std::to_string(components) + ")");
  }
  const auto qv = model.bank.component_mean(q, component);
  const double qn = std::sqrt(dot(qv, qv));
  if (qn == 0.0) throw EvaluationError("zero-norm component mean for word '" + std::string(query) + "'");

  std::vector<Neighbor> all;
  all.reserve(model.vocab.size() * components);
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    for (std::size_t c = 0; c < components; ++c) {
      const auto v = model.bank.component_mean(static_cast<WordId>(w), c);
      const double vn = std::sqrt(dot(v, v));
      if (vn == 0.0) continue;
      const bool self = w == q && c == component;
      const double cos = self ? 1.0 : std::clamp(dot(qv, v) / (qn * vn), -1.0, 1.0);
      all.push_back(Neighbor{{}, static_cast<WordId>(w), c, cos});
    }
  }
  auto better = [&](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    const bool a_self = a.word == q && a.component == component;
    const bool b_self = b.word == q && b.component == component;
    if (a_self != b_self) return a_self;
    if (a.word != b.word) return a.word < b.word;
    return a.component < b.component;
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  for (auto& n : all) n.token = model.vocab.token(n.word);
  return all;
}

}  // namespace gmkl
