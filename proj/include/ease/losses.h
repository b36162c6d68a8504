#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ease/embedding.h"
#include "ease/model.h"

namespace ease {

struct BatchItem {
  std::vector<int> tokens;
  int positive = 0;        // row of entity_emb
  int hard_negative = -1;  // row of entity_emb, or -1 when absent
};

struct Batch {
  std::vector<BatchItem> items;
  std::size_t size() const { return items.size(); }
};

// Gradient buffers shaped like the parameters they belong to.
struct Gradients {
  Matrix token_emb;
  Matrix entity_emb;
  Matrix projection;
  Matrix head;
  Vector head_bias;

  static Gradients zeros_like(const ModelParams& params);
  void add_scaled(const Gradients& other, double scale);
};

struct LossResult {
  double loss = 0.0;
  // Unweighted components; zero when the component was not evaluated.
  double entity_loss = 0.0;
  double self_loss = 0.0;
  Gradients grads;
};

enum class LossKind {
  kEntity,      // in-batch entity contrast
  kEntityHard,  // entity contrast with hard-negative candidates
  kSelf,        // dropout-noise self contrast
  kEase,        // lambda * entity(hard) + self
};

std::string to_string(LossKind kind);

struct EaseOptions {
  bool self_cl = true;
};

// Every loss reads dropout noise from `dropout`; pass index 0 produces the
// anchor embeddings s_i and pass 1 the self-contrast positives s_i^+.
// The entity losses use projection * e as the entity-side vectors and the
// training head (when present) on the sentence side.
LossResult entity_cl_loss(const Batch& batch, const ModelParams& params,
                          const DropoutSource& dropout = {});
LossResult entity_cl_loss_hard(const Batch& batch, const ModelParams& params,
                               const DropoutSource& dropout = {});
LossResult self_cl_loss(const Batch& batch, const ModelParams& params,
                        const DropoutSource& dropout);
LossResult ease_loss(const Batch& batch, const ModelParams& params,
                     const DropoutSource& dropout, EaseOptions options = {});

LossResult compute_loss(LossKind kind, const Batch& batch,
                        const ModelParams& params, const DropoutSource& dropout);

enum class ParamTensor { kToken, kEntity, kProjection, kHead, kHeadBias };

struct Coordinate {
  ParamTensor tensor;
  std::size_t index;  // flat row-major index
};

double& param_at(ModelParams& params, Coordinate c);
double grad_at(const Gradients& grads, Coordinate c);

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t max_coords = 256;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  Coordinate worst{ParamTensor::kToken, 0};
};

// Central finite difference of the loss at one coordinate.
double numeric_derivative(LossKind kind, const Batch& batch, ModelParams params,
                          const DropoutSource& dropout, Coordinate c, double eps);

// Compares analytic gradients against central differences. Coordinates are
// drawn from the parameters the batch actually reaches (token rows of its
// sentences, its entity rows, the projection and the head); all of them are
// checked when there are at most max_coords, otherwise a seeded subset.
// Relative error is |a - n| / max(1, |a|, |n|).
GradCheckResult grad_check(LossKind kind, const ModelParams& params,
                           const Batch& batch, const DropoutSource& dropout,
                           const GradCheckOptions& options = {});

}  // namespace ease
