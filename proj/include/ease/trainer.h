#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ease/corpus.h"
#include "ease/losses.h"
#include "ease/model.h"

namespace ease {

class Adam {
 public:
  struct Options {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(const ModelParams& params, Options options);

  void step(ModelParams& params, const Gradients& grads);
  std::size_t steps_taken() const { return t_; }

 private:
  void update(std::vector<double>& p, const std::vector<double>& g,
              std::vector<double>& m, std::vector<double>& v);

  Options options_;
  std::size_t t_ = 0;
  double bias1_ = 1.0;
  double bias2_ = 1.0;
  Gradients m_;
  Gradients v_;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  std::size_t eval_every = 250;
  std::uint64_t seed = 42;
  bool self_cl = true;
  bool hard_negatives = true;
  // Called before each optimizer step with the step index, its batch, the
  // parameters the loss is evaluated at and the dropout source.
  std::function<void(std::size_t, const Batch&, const ModelParams&,
                     const DropoutSource&)>
      observer;
};

// Instances resolved against the corpus and entity table.
struct TrainingSet {
  std::vector<std::vector<int>> tokens;  // per instance
  std::vector<int> positive;
  std::vector<int> hard_negative;        // -1 when absent

  std::size_t size() const { return tokens.size(); }
};

// Maps instances onto token ids and entity rows. Throws UnknownEntity for an
// instance whose positive or hard negative has no row.
TrainingSet resolve_instances(const std::vector<TrainingInstance>& instances,
                              const std::vector<SentenceRecord>& corpus,
                              const std::map<std::string, int>& entity_index);

// Higher is better.
using DevMetric = std::function<double(const ModelParams&)>;

struct EvalRecord {
  std::size_t step = 0;
  double dev_metric = 0.0;
  double loss = 0.0;  // mean training loss since the previous evaluation
};

struct StepRecord {
  double loss = 0.0;
  double entity_loss = 0.0;
  double self_loss = 0.0;
};

struct TrainResult {
  ModelParams best;
  double best_metric = 0.0;
  std::size_t best_step = 0;
  std::size_t total_steps = 0;
  std::vector<EvalRecord> log;
  std::vector<StepRecord> steps;
};

// One epoch of seeded, shuffled minibatches with Adam. The dev metric is
// computed every eval_every steps and after the last step; the best-scoring
// snapshot (earliest on ties) is returned.
TrainResult train(const ModelParams& initial, const TrainingSet& data,
                  const TrainConfig& config, const DevMetric& dev);

// Batch for the given instance indices; hard negatives dropped when
// use_negatives is false.
Batch make_batch(const TrainingSet& data, std::span<const std::size_t> indices,
                 bool use_negatives);

struct GridCell {
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
};

struct GridOutcome {
  GridCell cell;
  std::optional<double> dev_score;  // absent when the run diverged
  std::string note;
};

struct GridResult {
  std::size_t best_index = 0;
  std::vector<GridOutcome> outcomes;
  TrainResult best_run;
};

// Cartesian product in declaration order (batch sizes outer).
std::vector<GridCell> make_grid(const std::vector<std::size_t>& batch_sizes,
                                const std::vector<double>& learning_rates);

// Runs every cell; a run that throws NonFinite is logged and skipped. Ties go
// to the first cell in declaration order.
GridResult grid_search(const std::vector<GridCell>& cells,
                       const std::function<TrainResult(const GridCell&)>& run);

}  // namespace ease
