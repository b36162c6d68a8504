#include "ease/losses.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "ease/error.h"

namespace ease {

Gradients Gradients::zeros_like(const ModelParams& params) {
  Gradients g;
  g.token_emb = Matrix(params.token_emb.rows(), params.token_emb.dim());
  g.entity_emb = Matrix(params.entity_emb.rows(), params.entity_emb.dim());
  g.projection = Matrix(params.projection.rows(), params.projection.dim());
  g.head = Matrix(params.head.rows(), params.head.dim());
  g.head_bias.assign(params.head_bias.size(), 0.0);
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  auto axpy = [scale](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  axpy(token_emb.data(), other.token_emb.data());
  axpy(entity_emb.data(), other.entity_emb.data());
  axpy(projection.data(), other.projection.data());
  axpy(head.data(), other.head.data());
  axpy(head_bias, other.head_bias);
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kEntity: return "entity";
    case LossKind::kEntityHard: return "entity-hard";
    case LossKind::kSelf: return "self";
    case LossKind::kEase: return "ease";
  }
  return "unknown";
}

namespace {

struct SentencePass {
  Matrix pooled;  // N x d_s, before the head
  Matrix out;     // N x d_s, after the head
  std::vector<DropoutMask> masks;
};

SentencePass forward_sentences(const Batch& batch, const ModelParams& params,
                               const DropoutSource& dropout, std::size_t pass) {
  const std::size_t d = params.sentence_dim();
  SentencePass sp;
  sp.pooled = Matrix(0, d);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& tokens = batch.items[i].tokens;
    if (dropout.active()) {
      sp.masks.push_back(dropout.mask(i, pass, tokens.size(), d));
      sp.pooled.append_row(encode(tokens, params, &sp.masks.back()));
    } else {
      sp.pooled.append_row(encode(tokens, params));
    }
  }
  if (!params.has_head()) {
    sp.out = sp.pooled;
    return sp;
  }
  sp.out = Matrix(batch.size(), d);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      sp.out(i, r) = params.head_bias[r] + dot(params.head.row(r), sp.pooled.row(i));
    }
  }
  return sp;
}

void backward_sentences(const Batch& batch, const ModelParams& params,
                        const SentencePass& sp, const Matrix& g_out,
                        Gradients& g) {
  const std::size_t d = params.sentence_dim();
  Matrix g_pooled = g_out;
  if (params.has_head()) {
    g_pooled.fill(0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t r = 0; r < d; ++r) {
        const double go = g_out(i, r);
        g.head_bias[r] += go;
        for (std::size_t c = 0; c < d; ++c) {
          g.head(r, c) += go * sp.pooled(i, c);
          g_pooled(i, c) += params.head(r, c) * go;
        }
      }
    }
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& tokens = batch.items[i].tokens;
    const double count = static_cast<double>(tokens.size());
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
      auto gt = g.token_emb.row(static_cast<std::size_t>(tokens[pos]));
      for (std::size_t c = 0; c < d; ++c) {
        const double keep = sp.masks.empty() ? 1.0 : sp.masks[i](pos, c);
        gt[c] += g_pooled(i, c) * keep / count;
      }
    }
  }
}

// projection * entity_emb[row] for each requested row.
Matrix project_entities(const ModelParams& params, const std::vector<int>& rows) {
  Matrix out(rows.size(), params.sentence_dim());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j] < 0 || static_cast<std::size_t>(rows[j]) >= params.entity_emb.rows()) {
      throw Error(ErrorKind::kUnknownEntity,
                  "entity row " + std::to_string(rows[j]) + " out of range");
    }
    const auto e = params.entity_emb.row(static_cast<std::size_t>(rows[j]));
    for (std::size_t r = 0; r < params.sentence_dim(); ++r) {
      out(j, r) = dot(params.projection.row(r), e);
    }
  }
  return out;
}

void backward_entities(const ModelParams& params, const std::vector<int>& rows,
                       const Matrix& g_vecs, Gradients& g) {
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto row = static_cast<std::size_t>(rows[j]);
    const auto e = params.entity_emb.row(row);
    auto ge = g.entity_emb.row(row);
    for (std::size_t r = 0; r < params.sentence_dim(); ++r) {
      const double gv = g_vecs(j, r);
      const auto w = params.projection.row(r);
      auto gw = g.projection.row(r);
      for (std::size_t c = 0; c < e.size(); ++c) {
        gw[c] += gv * e[c];
        ge[c] += w[c] * gv;
      }
    }
  }
}

[[noreturn]] void non_finite(const std::string& where, std::size_t row) {
  throw Error(ErrorKind::kNonFinite, where + " produced NaN/Inf at row " + std::to_string(row));
}

// Temperature-scaled cosine softmax contrast. Row i of `anchors` has column i
// of `cands` as its positive; every column is in its denominator. Returns the
// mean loss and accumulates weight * gradient into g_anchors / g_cands.
double contrast(const Matrix& anchors, const Matrix& cands, double tau,
                double weight, Matrix& g_anchors, Matrix& g_cands,
                const char* name) {
  const std::size_t n = anchors.rows();
  const std::size_t m = cands.rows();
  const std::size_t d = anchors.dim();
  const double eps = numeric_options().zero_norm_epsilon;

  std::vector<double> na(n), nc(m);
  Matrix ua(n, d), uc(m, d);
  for (std::size_t i = 0; i < n; ++i) {
    na[i] = norm(anchors.row(i));
    if (!std::isfinite(na[i])) non_finite(std::string(name) + " sentence embedding", i);
    if (!(na[i] > eps)) throw Error(ErrorKind::kZeroVector, std::string(name) + ": zero sentence embedding at row " + std::to_string(i));
    for (std::size_t c = 0; c < d; ++c) ua(i, c) = anchors(i, c) / na[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    nc[j] = norm(cands.row(j));
    if (!std::isfinite(nc[j])) non_finite(std::string(name) + " candidate embedding", j);
    if (!(nc[j] > eps)) throw Error(ErrorKind::kZeroVector, std::string(name) + ": zero candidate embedding at row " + std::to_string(j));
    for (std::size_t c = 0; c < d; ++c) uc(j, c) = cands(j, c) / nc[j];
  }

  double total = 0.0;
  Matrix sims(n, m);
  Matrix coef(n, m);  // dL/dsim, already weighted
  std::vector<double> probs(m);
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = -INFINITY;
    for (std::size_t j = 0; j < m; ++j) {
      sims(i, j) = std::clamp(dot(ua.row(i), uc.row(j)), -1.0, 1.0);
      row_max = std::max(row_max, sims(i, j) / tau);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      probs[j] = std::exp(sims(i, j) / tau - row_max);
      z += probs[j];
    }
    const double row_loss = row_max + std::log(z) - sims(i, i) / tau;
    if (!std::isfinite(row_loss)) non_finite(name, i);
    total += row_loss;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = probs[j] / z;
      coef(i, j) = weight * (p - (i == j ? 1.0 : 0.0)) / (tau * static_cast<double>(n));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto ga = g_anchors.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double k = coef(i, j);
      const double s = sims(i, j);
      for (std::size_t c = 0; c < d; ++c) {
        ga[c] += k * (uc(j, c) - s * ua(i, c)) / na[i];
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto gc = g_cands.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = coef(i, j);
      const double s = sims(i, j);
      for (std::size_t c = 0; c < d; ++c) {
        gc[c] += k * (ua(i, c) - s * uc(j, c)) / nc[j];
      }
    }
  }
  const double mean = total / static_cast<double>(n);
  if (!std::isfinite(mean)) non_finite(name, 0);
  return mean;
}

void require_nonempty(const Batch& batch) {
  if (batch.size() == 0) throw Error(ErrorKind::kConfig, "empty batch");
}

// Entity contrast against pass-0 sentence outputs. Accumulates gradients
// w.r.t. the sentence outputs into g_out and entity-side gradients into g.
double entity_term(const Batch& batch, const ModelParams& params,
                   const SentencePass& sp, bool use_negatives, double weight,
                   Matrix& g_out, Gradients& g) {
  std::vector<int> rows;
  rows.reserve(2 * batch.size());
  for (const auto& item : batch.items) rows.push_back(item.positive);
  if (use_negatives) {
    for (const auto& item : batch.items) {
      if (item.hard_negative >= 0) rows.push_back(item.hard_negative);
    }
  }
  const Matrix vecs = project_entities(params, rows);
  Matrix g_vecs(vecs.rows(), vecs.dim());
  const double loss = contrast(sp.out, vecs, params.tau, weight, g_out, g_vecs,
                               "entity contrast");
  backward_entities(params, rows, g_vecs, g);
  return loss;
}

LossResult entity_loss_impl(const Batch& batch, const ModelParams& params,
                            const DropoutSource& dropout, bool use_negatives) {
  require_nonempty(batch);
  LossResult res;
  res.grads = Gradients::zeros_like(params);
  const SentencePass sp = forward_sentences(batch, params, dropout, 0);
  Matrix g_out(batch.size(), params.sentence_dim());
  res.entity_loss = entity_term(batch, params, sp, use_negatives, 1.0, g_out, res.grads);
  res.loss = res.entity_loss;
  backward_sentences(batch, params, sp, g_out, res.grads);
  return res;
}

}  // namespace

LossResult entity_cl_loss(const Batch& batch, const ModelParams& params,
                          const DropoutSource& dropout) {
  return entity_loss_impl(batch, params, dropout, false);
}

LossResult entity_cl_loss_hard(const Batch& batch, const ModelParams& params,
                               const DropoutSource& dropout) {
  return entity_loss_impl(batch, params, dropout, true);
}

namespace {

// lambda * entity(hard) + self, skipping a term whose weight is zero or which
// is switched off so that its parameters receive exactly zero gradient.
LossResult combined_loss(const Batch& batch, const ModelParams& params,
                         const DropoutSource& dropout, double lambda,
                         bool self_cl) {
  require_nonempty(batch);
  if (!self_cl && lambda == 0.0) {
    throw Error(ErrorKind::kConfig,
                "self contrast disabled and lambda = 0: loss is identically zero");
  }
  LossResult res;
  res.grads = Gradients::zeros_like(params);
  const SentencePass first = forward_sentences(batch, params, dropout, 0);
  Matrix g_first(batch.size(), params.sentence_dim());
  if (lambda != 0.0) {
    res.entity_loss = entity_term(batch, params, first, true, lambda, g_first, res.grads);
    res.loss += lambda * res.entity_loss;
  }
  if (self_cl) {
    const SentencePass second = forward_sentences(batch, params, dropout, 1);
    Matrix g_second(batch.size(), params.sentence_dim());
    res.self_loss = contrast(first.out, second.out, params.tau, 1.0, g_first,
                             g_second, "self contrast");
    res.loss += res.self_loss;
    backward_sentences(batch, params, first, g_first, res.grads);
    backward_sentences(batch, params, second, g_second, res.grads);
  } else {
    backward_sentences(batch, params, first, g_first, res.grads);
  }
  return res;
}

}  // namespace

LossResult self_cl_loss(const Batch& batch, const ModelParams& params,
                        const DropoutSource& dropout) {
  return combined_loss(batch, params, dropout, 0.0, true);
}

LossResult ease_loss(const Batch& batch, const ModelParams& params,
                     const DropoutSource& dropout, EaseOptions options) {
  return combined_loss(batch, params, dropout, params.lambda, options.self_cl);
}

LossResult compute_loss(LossKind kind, const Batch& batch,
                        const ModelParams& params, const DropoutSource& dropout) {
  switch (kind) {
    case LossKind::kEntity: return entity_cl_loss(batch, params, dropout);
    case LossKind::kEntityHard: return entity_cl_loss_hard(batch, params, dropout);
    case LossKind::kSelf: return self_cl_loss(batch, params, dropout);
    case LossKind::kEase: return ease_loss(batch, params, dropout);
  }
  throw Error(ErrorKind::kConfig, "unknown loss kind");
}

double& param_at(ModelParams& params, Coordinate c) {
  switch (c.tensor) {
    case ParamTensor::kToken: return params.token_emb.data().at(c.index);
    case ParamTensor::kEntity: return params.entity_emb.data().at(c.index);
    case ParamTensor::kProjection: return params.projection.data().at(c.index);
    case ParamTensor::kHead: return params.head.data().at(c.index);
    case ParamTensor::kHeadBias: return params.head_bias.at(c.index);
  }
  throw Error(ErrorKind::kConfig, "unknown tensor");
}

double grad_at(const Gradients& grads, Coordinate c) {
  switch (c.tensor) {
    case ParamTensor::kToken: return grads.token_emb.data().at(c.index);
    case ParamTensor::kEntity: return grads.entity_emb.data().at(c.index);
    case ParamTensor::kProjection: return grads.projection.data().at(c.index);
    case ParamTensor::kHead: return grads.head.data().at(c.index);
    case ParamTensor::kHeadBias: return grads.head_bias.at(c.index);
  }
  throw Error(ErrorKind::kConfig, "unknown tensor");
}

double numeric_derivative(LossKind kind, const Batch& batch, ModelParams params,
                          const DropoutSource& dropout, Coordinate c, double eps) {
  double& x = param_at(params, c);
  const double original = x;
  x = original + eps;
  const double up = compute_loss(kind, batch, params, dropout).loss;
  x = original - eps;
  const double down = compute_loss(kind, batch, params, dropout).loss;
  x = original;
  const double d = (up - down) / (2.0 * eps);
  if (!std::isfinite(d)) throw Error(ErrorKind::kNonFinite, "finite difference is not finite");
  return d;
}

GradCheckResult grad_check(LossKind kind, const ModelParams& params,
                           const Batch& batch, const DropoutSource& dropout,
                           const GradCheckOptions& options) {
  const LossResult analytic = compute_loss(kind, batch, params, dropout);

  std::vector<Coordinate> coords;
  const std::size_t ds = params.sentence_dim();
  const std::size_t de = params.entity_dim();
  std::set<int> token_rows, entity_rows;
  for (const auto& item : batch.items) {
    token_rows.insert(item.tokens.begin(), item.tokens.end());
    entity_rows.insert(item.positive);
    if (item.hard_negative >= 0) entity_rows.insert(item.hard_negative);
  }
  for (int r : token_rows)
    for (std::size_t c = 0; c < ds; ++c)
      coords.push_back({ParamTensor::kToken, static_cast<std::size_t>(r) * ds + c});
  for (int r : entity_rows)
    for (std::size_t c = 0; c < de; ++c)
      coords.push_back({ParamTensor::kEntity, static_cast<std::size_t>(r) * de + c});
  for (std::size_t i = 0; i < params.projection.data().size(); ++i)
    coords.push_back({ParamTensor::kProjection, i});
  for (std::size_t i = 0; i < params.head.data().size(); ++i)
    coords.push_back({ParamTensor::kHead, i});
  for (std::size_t i = 0; i < params.head_bias.size(); ++i)
    coords.push_back({ParamTensor::kHeadBias, i});

  if (coords.size() > options.max_coords) {
    Rng rng(options.seed);
    rng.shuffle(std::span<Coordinate>(coords));
    coords.resize(options.max_coords);
  }

  GradCheckResult result;
  for (const Coordinate& c : coords) {
    const double a = grad_at(analytic.grads, c);
    const double n = numeric_derivative(kind, batch, params, dropout, c, options.eps);
    const double rel = std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
    if (rel > result.max_rel_error || result.coords_checked == 0) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      result.worst = c;
    }
    ++result.coords_checked;
  }
  return result;
}

}  // namespace ease
