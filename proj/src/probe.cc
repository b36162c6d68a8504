#include "ease/probe.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ease/error.h"
#include "ease/rng.h"

namespace ease {

int LinearProbe::predict(std::span<const double> x) const {
  int best = 0;
  double best_score = -INFINITY;
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    const double s = bias[c] + dot(weights.row(c), x);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double LinearProbe::accuracy(const ProbeData& data) const {
  if (data.features.rows() == 0) throw Error(ErrorKind::kDegenerateInput, "empty evaluation set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.features.rows(); ++i) {
    if (predict(data.features.row(i)) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.features.rows());
}

namespace {

void check_data(const ProbeData& data, const char* name) {
  if (data.features.rows() != data.labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::string(name) + ": features and labels disagree");
  }
  for (int l : data.labels) {
    if (l < 0) throw Error(ErrorKind::kDegenerateInput, std::string(name) + ": negative label");
  }
}

}  // namespace

LinearProbe train_probe(const ProbeData& train, std::size_t classes,
                        const ProbeTrainOptions& options) {
  check_data(train, "train");
  if (options.batch_size == 0) throw Error(ErrorKind::kConfig, "batch size must be >= 1");
  if (!(options.learning_rate >= 0.0)) throw Error(ErrorKind::kConfig, "learning rate must be >= 0");
  const std::size_t n = train.features.rows();
  const std::size_t d = train.features.dim();
  LinearProbe probe{Matrix(classes, d), Vector(classes, 0.0)};
  Rng rng(options.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector probs(classes);
  Matrix gw(classes, d);
  Vector gb(classes);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < n; begin += options.batch_size) {
      const std::size_t end = std::min(n, begin + options.batch_size);
      gw.fill(0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t b = begin; b < end; ++b) {
        const auto x = train.features.row(order[b]);
        const auto y = static_cast<std::size_t>(train.labels[order[b]]);
        double top = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
          probs[c] = probe.bias[c] + dot(probe.weights.row(c), x);
          top = std::max(top, probs[c]);
        }
        double z = 0.0;
        for (double& p : probs) {
          p = std::exp(p - top);
          z += p;
        }
        for (std::size_t c = 0; c < classes; ++c) {
          const double g = probs[c] / z - (c == y ? 1.0 : 0.0);
          gb[c] += g;
          auto row = gw.row(c);
          for (std::size_t j = 0; j < d; ++j) row[j] += g * x[j];
        }
      }
      const double scale = options.learning_rate / static_cast<double>(end - begin);
      for (std::size_t c = 0; c < classes; ++c) {
        probe.bias[c] -= scale * gb[c];
        auto w = probe.weights.row(c);
        const auto g = gw.row(c);
        for (std::size_t j = 0; j < d; ++j) w[j] -= scale * g[j];
      }
    }
  }
  if (!probe.weights.all_finite() || !all_finite(probe.bias)) {
    throw Error(ErrorKind::kNonFinite, "probe training diverged");
  }
  return probe;
}

ProbeResult eval_mldoc(const ProbeData& train, const ProbeData& dev,
                       const std::vector<ProbeData>& tests,
                       const ProbeGrid& grid) {
  if (grid.batch_sizes.empty() || grid.learning_rates.empty() || grid.seeds.empty()) {
    throw Error(ErrorKind::kConfig, "probe grid must be non-empty");
  }
  if (grid.epochs == 0) throw Error(ErrorKind::kConfig, "epochs must be >= 1");
  check_data(train, "train");
  check_data(dev, "dev");
  for (const auto& t : tests) check_data(t, "test");
  if (train.features.rows() == 0) throw Error(ErrorKind::kDegenerateInput, "empty training set");
  const std::set<int> train_classes(train.labels.begin(), train.labels.end());
  if (train_classes.size() < 2) {
    throw Error(ErrorKind::kDegenerateInput, "training labels contain a single class");
  }
  int top = *train_classes.rbegin();
  for (int l : dev.labels) top = std::max(top, l);
  for (const auto& t : tests)
    for (int l : t.labels) top = std::max(top, l);
  const auto classes = static_cast<std::size_t>(top) + 1;

  ProbeResult result;
  bool have_best = false;
  for (std::size_t bs : grid.batch_sizes) {
    for (double lr : grid.learning_rates) {
      if (bs == 0 || !(lr >= 0.0)) throw Error(ErrorKind::kConfig, "invalid probe grid cell");
      double dev_sum = 0.0;
      for (std::uint64_t seed : grid.seeds) {
        const auto probe = train_probe(train, classes, {bs, lr, grid.epochs, seed});
        dev_sum += probe.accuracy(dev);
      }
      ProbeCell cell{bs, lr, dev_sum / static_cast<double>(grid.seeds.size())};
      result.cells.push_back(cell);
      if (!have_best || cell.dev_accuracy > result.best.dev_accuracy) {
        have_best = true;
        result.best = cell;
      }
    }
  }
  result.test_accuracy.assign(tests.size(), 0.0);
  for (std::uint64_t seed : grid.seeds) {
    const auto probe = train_probe(
        train, classes, {result.best.batch_size, result.best.learning_rate, grid.epochs, seed});
    for (std::size_t t = 0; t < tests.size(); ++t) result.test_accuracy[t] += probe.accuracy(tests[t]);
  }
  for (double& a : result.test_accuracy) a /= static_cast<double>(grid.seeds.size());
  return result;
}

}  // namespace ease
