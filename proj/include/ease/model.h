#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ease/embedding.h"
#include "ease/rng.h"

namespace ease {

struct ModelParams {
  Matrix token_emb;   // |vocab| x d_s
  Matrix entity_emb;  // |entities| x d_e
  // Applied as projection * e, so it maps entity space into sentence space
  // and has shape d_s x d_e.
  Matrix projection;
  // Optional linear layer on sentence embeddings used only by the training
  // losses (d_s x d_s plus bias). Never exported.
  Matrix head;
  Vector head_bias;

  double dropout_p = 0.1;
  double tau = 10.0;
  double lambda = 0.01;
  bool entity_init_pretrained = false;

  std::size_t sentence_dim() const { return token_emb.dim(); }
  std::size_t entity_dim() const { return entity_emb.dim(); }
  bool has_head() const { return !head.empty(); }

  // Throws ConfigError / NonFinite when an invariant does not hold.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct InitOptions {
  std::size_t vocab_size = 1;
  std::size_t num_entities = 0;
  std::size_t sentence_dim = 32;
  std::size_t entity_dim = 32;
  double token_std = 0.02;
  double entity_std = 0.02;
  bool train_head = false;
};

// Token and entity tables ~ N(0, std); projection ~ N(0, 1/d_e); head starts
// as the identity.
ModelParams init_params(const InitOptions& options, Rng& rng);

// Loads "entity_id TAB v1 ... v_d" rows into the entity table. Rows whose id
// is not in entity_index are skipped. Returns the number of rows loaded.
std::size_t load_entity_vectors(const std::string& path,
                                const std::map<std::string, int>& entity_index,
                                Matrix& entity_emb);

// Per-(position, dimension) multipliers: 0 for dropped units, 1/(1-p) for
// kept ones.
using DropoutMask = Matrix;

// Source of frozen dropout masks. A mask is a pure function of
// (seed, batch_index, pass, row), so a loss evaluated twice with the same
// source sees the same noise.
struct DropoutSource {
  double p = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t batch_index = 0;

  bool active() const { return p > 0.0; }
  DropoutMask mask(std::size_t row, std::size_t pass, std::size_t length,
                   std::size_t dim) const;
};

// Mean-pooled token embeddings, with elementwise dropout when a mask is
// given. Without a mask this is the deterministic evaluation encoder.
Vector encode(std::span<const int> tokens, const ModelParams& params,
              const DropoutMask* mask = nullptr);

// Eval-mode encodings of many token sequences, one row each.
Matrix encode_all(const std::vector<std::vector<int>>& sentences,
                  const ModelParams& params);

}  // namespace ease
