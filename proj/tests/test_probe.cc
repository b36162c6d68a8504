#include <gtest/gtest.h>

#include "ease/error.h"
#include "ease/probe.h"
#include "generators.h"

using namespace ease;

namespace {

ProbeData separable(Rng& rng, std::size_t per_class) {
  ProbeData d;
  d.features = Matrix(0, 3);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Vector x = gen::vector(rng, 3, 0.3);
      x[0] += c == 0 ? -2.0 : 2.0;
      d.features.append_row(x);
      d.labels.push_back(c);
    }
  }
  return d;
}

ProbeData random_labels(Rng& rng, std::size_t n, std::size_t classes) {
  ProbeData d{gen::matrix(rng, n, 8), {}};
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(i % classes));
  rng.shuffle(std::span<int>(d.labels));
  return d;
}

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

}  // namespace

TEST(Probe, SeparableDataIsLearnedExactly) {
  Rng rng(1);
  const ProbeData train = separable(rng, 40), dev = separable(rng, 20), test = separable(rng, 20);
  const ProbeResult r = eval_mldoc(train, dev, {test}, ProbeGrid{});
  ASSERT_EQ(r.test_accuracy.size(), 1u);
  EXPECT_EQ(r.test_accuracy[0], 1.0);
  EXPECT_EQ(r.cells.size(), 9u);
}

TEST(Probe, ShuffledLabelsStayNearChance) {
  Rng rng(2);
  const ProbeData train = random_labels(rng, 400, 4), dev = random_labels(rng, 200, 4);
  const ProbeData test = random_labels(rng, 400, 4);
  ProbeGrid grid;
  grid.epochs = 10;
  const ProbeResult r = eval_mldoc(train, dev, {test}, grid);
  EXPECT_NEAR(r.test_accuracy[0], 0.25, 0.1);
}

TEST(Probe, ZeroLearningRateLosesTheGrid) {
  Rng rng(3);
  const ProbeData train = separable(rng, 30), dev = separable(rng, 30);
  ProbeGrid grid;
  grid.batch_sizes = {16};
  grid.learning_rates = {0.0, 0.1};
  grid.epochs = 20;
  const ProbeResult r = eval_mldoc(train, dev, {dev}, grid);
  EXPECT_EQ(r.best.learning_rate, 0.1);
  EXPECT_LT(r.cells[0].dev_accuracy, r.cells[1].dev_accuracy);
}

TEST(Probe, SingleClassIsDegenerate) {
  ProbeData d{Matrix(4, 2, 1.0), {0, 0, 0, 0}};
  EXPECT_EQ(error_of([&] { eval_mldoc(d, d, {d}, ProbeGrid{}); }), ErrorKind::kDegenerateInput);
}

TEST(Probe, EmptyGridIsConfigError) {
  Rng rng(4);
  const ProbeData d = separable(rng, 5);
  ProbeGrid grid;
  grid.learning_rates.clear();
  EXPECT_EQ(error_of([&] { eval_mldoc(d, d, {d}, grid); }), ErrorKind::kConfig);
}

TEST(Probe, TrainingIsSeedReproducible) {
  Rng rng(5);
  const ProbeData d = random_labels(rng, 100, 3);
  const ProbeTrainOptions o{.batch_size = 7, .learning_rate = 0.05, .epochs = 5, .seed = 11};
  const LinearProbe a = train_probe(d, 3, o), b = train_probe(d, 3, o);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Probe, MultipleTestSets) {
  Rng rng(6);
  const ProbeData train = separable(rng, 30), dev = separable(rng, 10);
  ProbeGrid grid;
  grid.epochs = 5;
  const ProbeResult r = eval_mldoc(train, dev, {separable(rng, 10), separable(rng, 10)}, grid);
  EXPECT_EQ(r.test_accuracy.size(), 2u);
}
