#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ease/embedding.h"

namespace ease {

struct ProbeData {
  Matrix features;
  std::vector<int> labels;
};

// Multinomial logistic regression: logits = weights * x + bias.
struct LinearProbe {
  Matrix weights;  // classes x dim
  Vector bias;

  int predict(std::span<const double> x) const;
  double accuracy(const ProbeData& data) const;
};

struct ProbeTrainOptions {
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
};

// Minibatch gradient descent on mean softmax cross-entropy from zero
// weights; example order is reshuffled every epoch from the seed.
LinearProbe train_probe(const ProbeData& train, std::size_t classes,
                        const ProbeTrainOptions& options);

struct ProbeGrid {
  std::vector<std::size_t> batch_sizes{32, 64, 128};
  std::vector<double> learning_rates{0.1, 0.01, 0.001};
  std::size_t epochs = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct ProbeCell {
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
  double dev_accuracy = 0.0;  // mean over seeds
};

struct ProbeResult {
  ProbeCell best;
  std::vector<ProbeCell> cells;
  // Mean accuracy over seeds of the selected cell, one entry per test set.
  std::vector<double> test_accuracy;
};

// Frozen-feature classifier: every grid cell is trained once per seed,
// scored by full-batch dev accuracy (mean over seeds), and the best cell
// (first on ties) is evaluated on each test set.
ProbeResult eval_mldoc(const ProbeData& train, const ProbeData& dev,
                       const std::vector<ProbeData>& tests,
                       const ProbeGrid& grid);

}  // namespace ease
