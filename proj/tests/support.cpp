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

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <unistd.h>

namespace gmkl::testing {

std::string word_name(const std::string& prefix, std::size_t index) {
  std::string suffix;
  do {
    suffix.insert(suffix.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  } while (index > 0);
  if (suffix.size() < 2) suffix.insert(suffix.begin(), 'a');
  return prefix + suffix;
}

std::string temp_path(const std::string& stem) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() / "gmkl_tests";
  std::filesystem::create_directories(dir);
  return (dir / (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++)))
      .string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_tokens(const std::string& path, const std::vector<std::string>& tokens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out << ' ';
    out << tokens[i];
  }
}

DiagGaussian random_gaussian(std::mt19937_64& rng, std::size_t dim, double mean_range,
                             double var_lo, double var_hi) {
  std::uniform_real_distribution<double> mu(-mean_range, mean_range);
  std::uniform_real_distribution<double> lv(std::log(var_lo), std::log(var_hi));
  std::vector<double> m(dim), l(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    m[d] = mu(rng);
    l[d] = lv(rng);
  }
  return DiagGaussian(std::move(m), std::move(l));
}

MixtureEmbedding random_mixture(std::mt19937_64& rng, std::size_t components, std::size_t dim,
                                double mean_range, double var_lo, double var_hi) {
  std::uniform_real_distribution<double> score(-1.5, 1.5);
  std::vector<double> scores(components);
  std::vector<DiagGaussian> comps;
  for (std::size_t c = 0; c < components; ++c) {
    scores[c] = score(rng);
    comps.push_back(random_gaussian(rng, dim, mean_range, var_lo, var_hi));
  }
  return MixtureEmbedding::from_scores(scores, std::move(comps));
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * kPi * var);
}

double log_normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * z * z / var - 0.5 * std::log(2.0 * kPi * var);
}

// Trapezoid rule on [lo, hi] with n intervals.
template <typename Fn>
double trapezoid(Fn fn, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = 0.5 * (fn(lo) + fn(hi));
  for (std::size_t k = 1; k < n; ++k) acc += fn(lo + h * static_cast<double>(k));
  return acc * h;
}

}  // namespace

double quadrature_log_el(const DiagGaussian& a, const DiagGaussian& b) {
  double log_total = 0.0;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double va = std::exp(a.log_var[d]);
    const double vb = std::exp(b.log_var[d]);
    const double sd = std::sqrt(std::max(va, vb));
    const double lo = std::min(a.mean[d], b.mean[d]) - 14.0 * sd;
    const double hi = std::max(a.mean[d], b.mean[d]) + 14.0 * sd;
    const double integral = trapezoid(
        [&](double x) { return normal_pdf(x, a.mean[d], va) * normal_pdf(x, b.mean[d], vb); }, lo,
        hi, 200000);
    log_total += std::log(integral);
  }
  return log_total;
}

double quadrature_kl(const DiagGaussian& a, const DiagGaussian& b) {
  // KL of product densities is the sum of per-dimension KLs.
  double total = 0.0;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double va = std::exp(a.log_var[d]);
    const double vb = std::exp(b.log_var[d]);
    const double sd = std::sqrt(va);
    const double lo = a.mean[d] - 14.0 * sd;
    const double hi = a.mean[d] + 14.0 * sd;
    total += trapezoid(
        [&](double x) {
          return normal_pdf(x, a.mean[d], va) *
                 (log_normal_pdf(x, a.mean[d], va) - log_normal_pdf(x, b.mean[d], vb));
        },
        lo, hi, 200000);
  }
  return total;
}

MixtureEmbedding MixtureParams::build() const {
  std::vector<DiagGaussian> comps;
  for (std::size_t c = 0; c < scores.size(); ++c) comps.emplace_back(means[c], log_vars[c]);
  return MixtureEmbedding::from_scores(scores, std::move(comps));
}

MixtureParams random_params(std::mt19937_64& rng, std::size_t components, std::size_t dim,
                            double mean_range, double var_lo, double var_hi) {
  std::uniform_real_distribution<double> score(-1.0, 1.0);
  MixtureParams p;
  for (std::size_t c = 0; c < components; ++c) {
    p.scores.push_back(score(rng));
    auto g = random_gaussian(rng, dim, mean_range, var_lo, var_hi);
    p.means.push_back(g.mean);
    p.log_vars.push_back(g.log_var);
  }
  return p;
}

FdReport fd_check_triple(const MixtureParams& word, const MixtureParams& pos,
                         const MixtureParams& neg, double margin, double h, double rel_tol,
                         double abs_tol, double small_grad) {
  const LossConfig cfg{margin};
  const std::size_t components_of[3] = {word.scores.size(), pos.scores.size(), neg.scores.size()};
  const std::size_t dim = word.means[0].size();
  std::vector<MixtureGradient> grads;
  for (std::size_t r = 0; r < 3; ++r) grads.emplace_back(components_of[r], dim);
  triple_loss_grad(word.build(), pos.build(), neg.build(), cfg, grads[0], grads[1], grads[2]);

  MixtureParams params[3] = {word, pos, neg};
  auto loss = [&] {
    return triple_loss(params[0].build(), params[1].build(), params[2].build(), cfg);
  };
  FdReport report;
  auto check = [&](double& theta, double analytic) {
    const double saved = theta;
    theta = saved + h;
    const double up = loss();
    theta = saved - h;
    const double down = loss();
    theta = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic - numeric);
    double excess;
    if (std::abs(analytic) < small_grad && std::abs(numeric) < small_grad) {
      excess = err / abs_tol;
    } else {
      excess = err / (rel_tol * std::max(std::abs(analytic), std::abs(numeric)));
    }
    ++report.checked;
    if (excess > 1.0) ++report.failures;
    report.worst_excess = std::max(report.worst_excess, excess);
  };
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < components_of[r]; ++c) {
      check(params[r].scores[c], grads[r].scores[c]);
      for (std::size_t d = 0; d < dim; ++d) {
        check(params[r].means[c][d], grads[r].means[c][d]);
        check(params[r].log_vars[c][d], grads[r].log_vars[c][d]);
      }
    }
  }
  return report;
}

Model toy_model(const std::vector<std::string>& words,
                const std::vector<std::vector<std::vector<double>>>& means) {
  const std::size_t components = means.at(0).size();
  const std::size_t dim = means.at(0).at(0).size();
  std::vector<std::uint64_t> counts(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) counts[i] = 1000 - i;
  Model m;
  m.config.components = components;
  m.config.dim = dim;
  m.vocab = Vocabulary(words, counts);
  m.bank = ParameterBank(words.size(), components, dim);
  for (std::size_t w = 0; w < words.size(); ++w) {
    auto mu = m.bank.means(static_cast<WordId>(w));
    for (std::size_t c = 0; c < components; ++c) {
      for (std::size_t d = 0; d < dim; ++d) mu[c * dim + d] = static_cast<float>(means[w][c][d]);
    }
  }
  return m;
}

TwoTopicCorpus make_two_topic_corpus(std::uint64_t seed, std::size_t total_tokens,
                                     std::size_t block, std::size_t topic_size,
                                     std::size_t num_polysemous, double polysemous_rate) {
  TwoTopicCorpus c;
  for (std::size_t i = 0; i < topic_size; ++i) {
    c.topic_a.push_back(word_name("ta", i));
    c.topic_b.push_back(word_name("tb", i));
  }
  for (std::size_t i = 0; i < num_polysemous; ++i) c.polysemous.push_back(word_name("poly", i));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> topic_pick(0, topic_size - 1);
  std::uniform_int_distribution<std::size_t> poly_pick(0, num_polysemous - 1);
  c.tokens.reserve(total_tokens);
  for (std::size_t i = 0; i < total_tokens; ++i) {
    const bool topic_a = (i / block) % 2 == 0;
    if (num_polysemous > 0 && unit(rng) < polysemous_rate) {
      c.tokens.push_back(c.polysemous[poly_pick(rng)]);
    } else {
      c.tokens.push_back(topic_a ? c.topic_a[topic_pick(rng)] : c.topic_b[topic_pick(rng)]);
    }
  }
  return c;
}

HypernymCorpus make_hypernym_corpus(std::uint64_t seed, std::size_t occurrences,
                                    std::size_t num_parents, std::size_t children_per_parent,
                                    std::size_t pool_size, std::size_t subset_size,
                                    std::size_t contexts_per_side) {
  HypernymCorpus h;
  std::vector<std::vector<std::string>> pools(num_parents);
  // subsets[p][c] indexes into pools[p].
  std::vector<std::vector<std::vector<std::size_t>>> subsets(num_parents);
  std::mt19937_64 rng(seed);
  for (std::size_t p = 0; p < num_parents; ++p) {
    h.parents.push_back(word_name("par", p));
    h.children.emplace_back();
    for (std::size_t k = 0; k < pool_size; ++k) pools[p].push_back(word_name("ctx", p * pool_size + k));
    for (std::size_t c = 0; c < children_per_parent; ++c) {
      h.children[p].push_back(word_name("chd", p * children_per_parent + c));
      std::vector<std::size_t> idx(pool_size);
      for (std::size_t k = 0; k < pool_size; ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(subset_size);
      subsets[p].push_back(idx);
    }
  }

  std::uniform_int_distribution<std::size_t> parent_pick(0, num_parents - 1);
  std::uniform_int_distribution<std::size_t> child_pick(0, children_per_parent);
  std::uniform_int_distribution<std::size_t> pool_pick(0, pool_size - 1);
  std::uniform_int_distribution<std::size_t> subset_pick(0, subset_size - 1);
  for (std::size_t n = 0; n < occurrences; ++n) {
    const std::size_t p = parent_pick(rng);
    const std::size_t who = child_pick(rng);  // == children_per_parent means the parent
    const bool is_parent = who == children_per_parent;
    auto context = [&]() -> const std::string& {
      if (is_parent) return pools[p][pool_pick(rng)];
      return pools[p][subsets[p][who][subset_pick(rng)]];
    };
    for (std::size_t k = 0; k < contexts_per_side; ++k) h.tokens.push_back(context());
    h.tokens.push_back(is_parent ? h.parents[p] : h.children[p][who]);
    for (std::size_t k = 0; k < contexts_per_side; ++k) h.tokens.push_back(context());
  }
  return h;
}

}  // namespace gmkl::testing
