#include "ease/model.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ease/error.h"

namespace ease {

void ModelParams::validate() const {
  if (!(tau > 0.0)) throw Error(ErrorKind::kConfig, "tau must be > 0");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw Error(ErrorKind::kConfig, "dropout must lie in [0, 1)");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kConfig, "lambda must be >= 0");
  if (projection.rows() != sentence_dim() || projection.dim() != entity_dim()) {
    throw Error(ErrorKind::kDimMismatch, "projection must be d_s x d_e");
  }
  if (has_head() && (head.rows() != sentence_dim() || head.dim() != sentence_dim() ||
                     head_bias.size() != sentence_dim())) {
    throw Error(ErrorKind::kDimMismatch, "head must be d_s x d_s with d_s bias");
  }
  if (!token_emb.all_finite() || !entity_emb.all_finite() ||
      !projection.all_finite() || !head.all_finite() || !all_finite(head_bias)) {
    throw Error(ErrorKind::kNonFinite, "parameters contain NaN or Inf");
  }
}

ModelParams init_params(const InitOptions& options, Rng& rng) {
  if (options.sentence_dim == 0 || options.entity_dim == 0 || options.vocab_size == 0) {
    throw Error(ErrorKind::kConfig, "dimensions and vocabulary must be positive");
  }
  ModelParams p;
  p.token_emb = Matrix(options.vocab_size, options.sentence_dim);
  for (double& x : p.token_emb.data()) x = options.token_std * rng.normal();
  p.entity_emb = Matrix(options.num_entities, options.entity_dim);
  for (double& x : p.entity_emb.data()) x = options.entity_std * rng.normal();
  p.projection = Matrix(options.sentence_dim, options.entity_dim);
  const double w_std = 1.0 / std::sqrt(static_cast<double>(options.entity_dim));
  for (double& x : p.projection.data()) x = w_std * rng.normal();
  if (options.train_head) {
    p.head = Matrix(options.sentence_dim, options.sentence_dim);
    for (std::size_t i = 0; i < options.sentence_dim; ++i) p.head(i, i) = 1.0;
    p.head_bias.assign(options.sentence_dim, 0.0);
  }
  return p;
}

std::size_t load_entity_vectors(const std::string& path,
                                const std::map<std::string, int>& entity_index,
                                Matrix& entity_emb) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t loaded = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id;
    std::getline(fields, id, '\t');
    std::vector<double> values;
    std::string cell;
    while (std::getline(fields, cell, '\t')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad vector component \"" + cell + "\"");
      }
    }
    if (values.size() != entity_emb.dim()) {
      throw ParseError(line_no, "expected " + std::to_string(entity_emb.dim()) +
                                    " components, got " + std::to_string(values.size()));
    }
    if (!all_finite(values)) throw ParseError(line_no, "non-finite component");
    auto it = entity_index.find(id);
    if (it == entity_index.end()) continue;
    auto row = entity_emb.row(static_cast<std::size_t>(it->second));
    std::copy(values.begin(), values.end(), row.begin());
    ++loaded;
  }
  return loaded;
}

DropoutMask DropoutSource::mask(std::size_t row, std::size_t pass,
                                std::size_t length, std::size_t dim) const {
  DropoutMask m(length, dim, 1.0);
  if (!active()) return m;
  Rng rng(mix_seed(seed, batch_index, pass, row));
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& x : m.data()) x = rng.bernoulli(p) ? 0.0 : keep_scale;
  return m;
}

Vector encode(std::span<const int> tokens, const ModelParams& params,
              const DropoutMask* mask) {
  if (tokens.empty()) throw Error(ErrorKind::kEmptySentence, "no tokens to encode");
  const std::size_t dim = params.sentence_dim();
  if (mask != nullptr && (mask->rows() != tokens.size() || mask->dim() != dim)) {
    throw Error(ErrorKind::kDimMismatch, "dropout mask shape does not match sentence");
  }
  Vector out(dim, 0.0);
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const int t = tokens[pos];
    if (t < 0 || static_cast<std::size_t>(t) >= params.token_emb.rows()) {
      throw Error(ErrorKind::kDimMismatch, "token id " + std::to_string(t) + " out of range");
    }
    const auto emb = params.token_emb.row(static_cast<std::size_t>(t));
    if (mask == nullptr) {
      for (std::size_t c = 0; c < dim; ++c) out[c] += emb[c];
    } else {
      const auto keep = mask->row(pos);
      for (std::size_t c = 0; c < dim; ++c) out[c] += emb[c] * keep[c];
    }
  }
  const double count = static_cast<double>(tokens.size());
  for (double& x : out) x /= count;
  return out;
}

Matrix encode_all(const std::vector<std::vector<int>>& sentences,
                  const ModelParams& params) {
  Matrix out(0, params.sentence_dim());
  for (const auto& s : sentences) out.append_row(encode(s, params));
  return out;
}

}  // namespace ease
