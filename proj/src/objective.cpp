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

#include "gmkl/objective.hpp"

#include <cmath>
#include <string>

#include "gmkl/errors.hpp"

namespace gmkl {
namespace {

// Per-dimension partials of log_el_kernel(a, b), scaled by `coef`.
void log_el_grad(const DiagGaussian& a, const DiagGaussian& b, double coef,
                 std::vector<double>& da_mean, std::vector<double>& da_lv,
                 std::vector<double>& db_mean, std::vector<double>& db_lv) {
  if (coef == 0.0) return;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double va = std::exp(a.log_var[d]);
    const double vb = std::exp(b.log_var[d]);
    const double s = va + vb;
    const double diff = a.mean[d] - b.mean[d];
    const double d_mean = -diff / s;
    // d/ds of -0.5 * (log s + diff^2 / s)
    const double d_s = -0.5 * (1.0 / s - diff * diff / (s * s));
    da_mean[d] += coef * d_mean;
    db_mean[d] -= coef * d_mean;
    da_lv[d] += coef * d_s * va;
    db_lv[d] += coef * d_s * vb;
  }
}

// Per-dimension partials of kl_diag(a, b), scaled by `coef`.
void kl_grad(const DiagGaussian& a, const DiagGaussian& b, double coef,
             std::vector<double>& da_mean, std::vector<double>& da_lv,
             std::vector<double>& db_mean, std::vector<double>& db_lv) {
  if (coef == 0.0) return;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double inv_vb = std::exp(-b.log_var[d]);
    const double va = std::exp(a.log_var[d]);
    const double diff = a.mean[d] - b.mean[d];
    da_mean[d] += coef * diff * inv_vb;
    db_mean[d] -= coef * diff * inv_vb;
    da_lv[d] += coef * 0.5 * (va * inv_vb - 1.0);
    db_lv[d] += coef * 0.5 * (1.0 - (va + diff * diff) * inv_vb);
  }
}

// Fills `weights` with softmax(x) and returns log_sum_exp(x).
double lse_with_weights(const std::vector<double>& x, std::vector<double>& weights) {
  const double lse = log_sum_exp(x);
  weights.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) weights[k] = std::exp(x[k] - lse);
  return lse;
}

void check_shape(const MixtureGradient& g, const MixtureEmbedding& m) {
  if (g.scores.size() != m.size() || g.means.size() != m.size() ||
      g.log_vars.size() != m.size()) {
    throw UsageError("mixture gradient shape mismatch");
  }
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (g.means[c].size() != m.dim() || g.log_vars[c].size() != m.dim()) {
      throw UsageError("mixture gradient shape mismatch");
    }
  }
}

void reset(MixtureGradient& g, const MixtureEmbedding& m) { g = MixtureGradient(m.size(), m.dim()); }

double hinge_argument(double pos_kl, double neg_kl, const LossConfig& cfg) {
  return cfg.margin + pos_kl - neg_kl;
}

void check_config(const LossConfig& cfg) {
  if (!(cfg.margin > 0.0) || !std::isfinite(cfg.margin)) {
    throw UsageError("margin must be finite and positive");
  }
}

void check_triple(const ParameterBank& center, const ParameterBank& context,
                  const TrainingTriple& t) {
  center.check_word(t.word_id);
  context.check_word(t.pos_id);
  context.check_word(t.neg_id);
  if (t.pos_id == t.neg_id) throw UsageError("negative context equals positive context");
}

}  // namespace

MixtureGradient::MixtureGradient(std::size_t components, std::size_t dim)
    : scores(components, 0.0),
      means(components, std::vector<double>(dim, 0.0)),
      log_vars(components, std::vector<double>(dim, 0.0)) {}

double kl_approx_with_grad(const MixtureEmbedding& f, const MixtureEmbedding& g, double scale,
                           MixtureGradient& df, MixtureGradient& dg) {
  if (f.dim() != g.dim()) throw UsageError("mixture dimension mismatch");
  check_shape(df, f);
  check_shape(dg, g);
  const std::size_t cf = f.size();
  const std::size_t cg = g.size();
  const auto& p = f.weights;
  const auto& q = g.weights;

  std::vector<double> log_p(cf), log_q(cg);
  for (std::size_t k = 0; k < cf; ++k) log_p[k] = std::log(p[k]);
  for (std::size_t j = 0; j < cg; ++j) log_q[j] = std::log(q[j]);

  // For each component i of f the four log-sum-exp terms
  //   A_i = lse_k(log p_k + log EL(f_i, f_k))      alpha = softmax weights
  //   B_i = lse_j(log q_j - KL(f_i || g_j))        beta
  //   C_i = lse_k(log p_k - KL(f_i || f_k))        gamma
  //   D_i = lse_j(log q_j + log EL(f_i, g_j))      delta
  // give kl_approx = 0.5 * sum_i p_i (A_i - B_i + C_i - D_i).
  std::vector<std::vector<double>> alpha(cf), beta(cf), gamma(cf), delta(cf);
  std::vector<double> term(cf);
  std::vector<double> xa(cf), xb(cg), xc(cf), xd(cg);
  double value = 0.0;
  for (std::size_t i = 0; i < cf; ++i) {
    const DiagGaussian& fi = f.components[i];
    for (std::size_t k = 0; k < cf; ++k) {
      xa[k] = log_p[k] + log_el_kernel(fi, f.components[k]);
      xc[k] = log_p[k] - kl_diag(fi, f.components[k]);
    }
    for (std::size_t j = 0; j < cg; ++j) {
      xb[j] = log_q[j] - kl_diag(fi, g.components[j]);
      xd[j] = log_q[j] + log_el_kernel(fi, g.components[j]);
    }
    term[i] = lse_with_weights(xa, alpha[i]) - lse_with_weights(xb, beta[i]) +
              lse_with_weights(xc, gamma[i]) - lse_with_weights(xd, delta[i]);
    value += p[i] * term[i];
  }
  value *= 0.5;

  const double h = 0.5 * scale;

  // Scores of f: outer weights p_i and the log p_k inside A and C.
  double weighted_term = 0.0;
  for (std::size_t i = 0; i < cf; ++i) weighted_term += p[i] * term[i];
  for (std::size_t m = 0; m < cf; ++m) {
    double inner = 0.0;
    for (std::size_t i = 0; i < cf; ++i) inner += p[i] * (alpha[i][m] + gamma[i][m]);
    inner -= 2.0 * p[m];
    df.scores[m] += h * (p[m] * term[m] - p[m] * weighted_term + inner);
  }
  // Scores of g: the log q_j inside B and D, both with negative sign.
  for (std::size_t m = 0; m < cg; ++m) {
    double inner = 0.0;
    for (std::size_t i = 0; i < cf; ++i) inner += p[i] * (beta[i][m] + delta[i][m]);
    inner -= 2.0 * q[m];
    dg.scores[m] -= h * inner;
  }

  // Component parameters through the pairwise kernels.
  for (std::size_t i = 0; i < cf; ++i) {
    const DiagGaussian& fi = f.components[i];
    for (std::size_t k = 0; k < cf; ++k) {
      const DiagGaussian& fk = f.components[k];
      log_el_grad(fi, fk, h * p[i] * alpha[i][k], df.means[i], df.log_vars[i], df.means[k],
                  df.log_vars[k]);
      kl_grad(fi, fk, -h * p[i] * gamma[i][k], df.means[i], df.log_vars[i], df.means[k],
              df.log_vars[k]);
    }
    for (std::size_t j = 0; j < cg; ++j) {
      const DiagGaussian& gj = g.components[j];
      kl_grad(fi, gj, h * p[i] * beta[i][j], df.means[i], df.log_vars[i], dg.means[j],
              dg.log_vars[j]);
      log_el_grad(fi, gj, -h * p[i] * delta[i][j], df.means[i], df.log_vars[i], dg.means[j],
                  dg.log_vars[j]);
    }
  }
  return value;
}

double triple_loss(const MixtureEmbedding& word, const MixtureEmbedding& pos,
                   const MixtureEmbedding& neg, const LossConfig& cfg) {
  check_config(cfg);
  const double arg = hinge_argument(kl_approx(word, pos), kl_approx(word, neg), cfg);
  return arg > 0.0 ? arg : 0.0;
}

double triple_loss_grad(const MixtureEmbedding& word, const MixtureEmbedding& pos,
                        const MixtureEmbedding& neg, const LossConfig& cfg,
                        MixtureGradient& d_word, MixtureGradient& d_pos, MixtureGradient& d_neg) {
  check_config(cfg);
  reset(d_word, word);
  reset(d_pos, pos);
  reset(d_neg, neg);
  const double arg = hinge_argument(kl_approx(word, pos), kl_approx(word, neg), cfg);
  if (!(arg > 0.0)) return 0.0;
  kl_approx_with_grad(word, pos, 1.0, d_word, d_pos);
  kl_approx_with_grad(word, neg, -1.0, d_word, d_neg);
  return arg;
}

void add_to(WordGradient& dst, const MixtureGradient& src) {
  const std::size_t components = src.scores.size();
  if (dst.scores.size() != components) throw UsageError("gradient shape mismatch");
  for (std::size_t c = 0; c < components; ++c) {
    dst.scores[c] += src.scores[c];
    const std::size_t dim = src.means[c].size();
    for (std::size_t d = 0; d < dim; ++d) {
      dst.means[c * dim + d] += src.means[c][d];
      dst.log_vars[c * dim + d] += src.log_vars[c][d];
    }
  }
}

double triple_loss(const ParameterBank& bank, const TrainingTriple& t, const LossConfig& cfg) {
  return triple_loss(bank, bank, t, cfg);
}

double triple_loss(const ParameterBank& center_bank, const ParameterBank& context_bank,
                   const TrainingTriple& t, const LossConfig& cfg) {
  check_triple(center_bank, context_bank, t);
  return triple_loss(center_bank.mixture(t.word_id), context_bank.mixture(t.pos_id),
                     context_bank.mixture(t.neg_id), cfg);
}

double accumulate_triple(const ParameterBank& center_bank, const ParameterBank& context_bank,
                         const TrainingTriple& t, const LossConfig& cfg, SparseGradient& center_out,
                         SparseGradient& context_out) {
  check_triple(center_bank, context_bank, t);
  const MixtureEmbedding word = center_bank.mixture(t.word_id);
  const MixtureEmbedding pos = context_bank.mixture(t.pos_id);
  const MixtureEmbedding neg = context_bank.mixture(t.neg_id);
  MixtureGradient d_word, d_pos, d_neg;
  const double loss = triple_loss_grad(word, pos, neg, cfg, d_word, d_pos, d_neg);
  if (loss > 0.0) {
    add_to(center_out.at(t.word_id), d_word);
    add_to(context_out.at(t.pos_id), d_pos);
    add_to(context_out.at(t.neg_id), d_neg);
  }
  return loss;
}

double accumulate_triple(const ParameterBank& bank, const TrainingTriple& t, const LossConfig& cfg,
                         SparseGradient& out) {
  return accumulate_triple(bank, bank, t, cfg, out, out);
}

SparseGradient triple_grad(const ParameterBank& bank, const TrainingTriple& t,
                           const LossConfig& cfg) {
  SparseGradient out(bank.components(), bank.dim());
  accumulate_triple(bank, t, cfg, out);
  return out;
}

SplitGradient triple_grad(const ParameterBank& center_bank, const ParameterBank& context_bank,
                          const TrainingTriple& t, const LossConfig& cfg) {
  SplitGradient out{SparseGradient(center_bank.components(), center_bank.dim()),
                    SparseGradient(context_bank.components(), context_bank.dim())};
  accumulate_triple(center_bank, context_bank, t, cfg, out.center, out.context);
  return out;
}

}  // namespace gmkl
