#include <gtest/gtest.h>

#include <cmath>

#include "ease/error.h"
#include "ease/trainer.h"
#include "generators.h"

using namespace ease;

namespace {

TrainingSet random_set(Rng& rng, std::size_t n, const gen::Sizes& s = {}) {
  const Batch b = gen::batch(rng, n, s, 0.5);
  TrainingSet set;
  for (const auto& item : b.items) {
    set.tokens.push_back(item.tokens);
    set.positive.push_back(item.positive);
    set.hard_negative.push_back(item.hard_negative);
  }
  return set;
}

struct Fixture {
  ModelParams params;
  TrainingSet data;
};

Fixture fixture(std::uint64_t seed, std::size_t n = 40) {
  Rng rng(seed);
  Fixture f{gen::params(rng, {}), random_set(rng, n)};
  f.params.lambda = 0.5;
  f.params.tau = 0.5;
  return f;
}

// Dev metric that rewards high mean cosine between sentence 0 and entity 0.
double toy_metric(const ModelParams& p) {
  const Vector s = encode(std::vector<int>{0}, p);
  Vector e(p.sentence_dim(), 0.0);
  for (std::size_t r = 0; r < e.size(); ++r) e[r] = dot(p.projection.row(r), p.entity_emb.row(0));
  return cosine_sim(s, e);
}

}  // namespace

TEST(Train, ZeroLearningRateKeepsParameters) {
  const Fixture f = fixture(1);
  const TrainResult r = train(f.params, f.data, {.batch_size = 8, .learning_rate = 0.0}, toy_metric);
  EXPECT_EQ(r.total_steps, 5u);
  EXPECT_EQ(r.best, f.params);
}

TEST(Train, EvalEveryBeyondEpochEvaluatesOnceAtEnd) {
  const Fixture f = fixture(2);
  const TrainResult r =
      train(f.params, f.data, {.batch_size = 8, .eval_every = 1000}, toy_metric);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].step, r.total_steps);
  EXPECT_EQ(r.best_step, r.total_steps);
  EXPECT_EQ(r.steps.size(), r.total_steps);
}

TEST(Train, CadenceIncludesFinalStep) {
  const Fixture f = fixture(3, 37);
  const TrainResult r = train(f.params, f.data, {.batch_size = 4, .eval_every = 3}, toy_metric);
  EXPECT_EQ(r.total_steps, 10u);
  std::vector<std::size_t> steps;
  for (const auto& e : r.log) steps.push_back(e.step);
  EXPECT_EQ(steps, (std::vector<std::size_t>{3, 6, 9, 10}));
}

TEST(Train, KeepsBestSnapshotAndEarliestOnTies) {
  const Fixture f = fixture(4);
  int calls = 0;
  const std::vector<double> scores{0.1, 0.7, 0.3, 0.7, 0.2};
  const TrainResult r = train(f.params, f.data, {.batch_size = 8, .eval_every = 1},
                              [&](const ModelParams&) { return scores[calls++]; });
  EXPECT_EQ(r.best_step, 2u);
  EXPECT_EQ(r.best_metric, 0.7);

  // The snapshot is the state after two steps.
  std::size_t seen = 0;
  ModelParams after_two;
  TrainConfig probe{.batch_size = 8, .eval_every = 1};
  probe.observer = [&](std::size_t step, const Batch&, const ModelParams& p, const DropoutSource&) {
    if (step == 2) after_two = p;
    ++seen;
  };
  train(f.params, f.data, probe, [](const ModelParams&) { return 0.0; });
  EXPECT_EQ(seen, 5u);
  EXPECT_EQ(r.best, after_two);
}

TEST(Train, Deterministic) {
  const Fixture f = fixture(5);
  const TrainConfig c{.batch_size = 6, .eval_every = 2, .seed = 9};
  const TrainResult a = train(f.params, f.data, c, toy_metric);
  const TrainResult b = train(f.params, f.data, c, toy_metric);
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].loss, b.steps[i].loss);
}

TEST(Train, SeedChangesOrder) {
  const Fixture f = fixture(6);
  const TrainResult a = train(f.params, f.data, {.batch_size = 6, .seed = 1}, toy_metric);
  const TrainResult b = train(f.params, f.data, {.batch_size = 6, .seed = 2}, toy_metric);
  EXPECT_NE(a.best, b.best);
}

TEST(Train, StepLossesMatchLossFunction) {
  const Fixture f = fixture(7);
  std::vector<double> direct;
  TrainConfig c{.batch_size = 8};
  c.observer = [&](std::size_t, const Batch& b, const ModelParams& p, const DropoutSource& d) {
    direct.push_back(ease_loss(b, p, d).loss);
  };
  const TrainResult r = train(f.params, f.data, c, toy_metric);
  ASSERT_EQ(direct.size(), r.steps.size());
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(direct[i], r.steps[i].loss);
}

TEST(Train, ConfigErrors) {
  const Fixture f = fixture(8);
  auto kind = [&](TrainConfig c, ModelParams p) {
    try {
      train(p, f.data, c, toy_metric);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind({.batch_size = 0}, f.params), ErrorKind::kConfig);
  EXPECT_EQ(kind({.eval_every = 0}, f.params), ErrorKind::kConfig);
  ModelParams zero_lambda = f.params;
  zero_lambda.lambda = 0.0;
  EXPECT_EQ(kind({.self_cl = false}, zero_lambda), ErrorKind::kConfig);
  ModelParams bad_tau = f.params;
  bad_tau.tau = 0.0;
  EXPECT_EQ(kind({}, bad_tau), ErrorKind::kConfig);
}

TEST(Train, NonFiniteDevMetricAborts) {
  const Fixture f = fixture(9);
  try {
    train(f.params, f.data, {.batch_size = 8}, [](const ModelParams&) { return NAN; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign) {
  Rng rng(1);
  ModelParams p = gen::params(rng, {.vocab = 3, .entities = 2, .sentence_dim = 2, .entity_dim = 2});
  const ModelParams before = p;
  Gradients g = Gradients::zeros_like(p);
  g.token_emb(0, 0) = 0.5;
  g.token_emb(1, 1) = -2.0;
  Adam adam(p, {.learning_rate = 0.1});
  adam.step(p, g);
  EXPECT_NEAR(p.token_emb(0, 0), before.token_emb(0, 0) - 0.1, 1e-7);
  EXPECT_NEAR(p.token_emb(1, 1), before.token_emb(1, 1) + 0.1, 1e-7);
  EXPECT_EQ(p.token_emb(2, 0), before.token_emb(2, 0));
  EXPECT_EQ(adam.steps_taken(), 1u);
}

TEST(ResolveInstances, UnknownEntity) {
  std::vector<SentenceRecord> corpus(1);
  corpus[0].id = "s";
  corpus[0].tokens = {1};
  corpus[0].entity_ids = {"A"};
  const std::map<std::string, int> index{{"B", 0}};
  try {
    resolve_instances({{0, "A", std::nullopt}}, corpus, index);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownEntity);
  }
  const TrainingSet set = resolve_instances({{0, "B", std::nullopt}}, corpus, index);
  EXPECT_EQ(set.positive, std::vector<int>{0});
  EXPECT_EQ(set.hard_negative, std::vector<int>{-1});
}

// ---- grid search ----------------------------------------------------------------

TEST(Grid, DeclarationOrder) {
  const auto cells = make_grid({64, 128}, {3e-5, 5e-5});
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1].batch_size, 64u);
  EXPECT_EQ(cells[1].learning_rate, 5e-5);
  EXPECT_EQ(cells[2].batch_size, 128u);
}

TEST(Grid, SingleCellWins) {
  const auto r = grid_search({{16, 0.1}}, [](const GridCell&) {
    TrainResult t;
    t.best_metric = -3.0;
    return t;
  });
  EXPECT_EQ(r.best_index, 0u);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes[0].dev_score, -3.0);
}

TEST(Grid, DivergedCellIsLoggedAndSkipped) {
  const auto r = grid_search({{16, 10.0}, {16, 0.1}}, [](const GridCell& c) {
    if (c.learning_rate > 1) throw Error(ErrorKind::kNonFinite, "boom");
    TrainResult t;
    t.best_metric = 0.2;
    return t;
  });
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_FALSE(r.outcomes[0].dev_score.has_value());
  EXPECT_NE(r.outcomes[0].note.find("diverged"), std::string::npos);
}

TEST(Grid, TwoByTwoReportsEveryCellAndFirstTieWins) {
  const auto cells = make_grid({8, 16}, {0.1, 0.01});
  const auto r = grid_search(cells, [](const GridCell& c) {
    TrainResult t;
    t.best_metric = c.learning_rate == 0.01 ? 0.9 : 0.5;
    return t;
  });
  ASSERT_EQ(r.outcomes.size(), 4u);
  for (const auto& o : r.outcomes) EXPECT_TRUE(o.dev_score.has_value());
  EXPECT_EQ(r.best_index, 1u);
}

TEST(Grid, RealTrainingCells) {
  const Fixture f = fixture(10);
  const auto r = grid_search(make_grid({4, 8}, {0.0, 0.05}), [&](const GridCell& c) {
    return train(f.params, f.data,
                 {.batch_size = c.batch_size, .learning_rate = c.learning_rate, .seed = 3},
                 toy_metric);
  });
  EXPECT_EQ(r.outcomes.size(), 4u);
  EXPECT_EQ(r.best_run.best_metric, *r.outcomes[r.best_index].dev_score);
}

TEST(Grid, AllDivergedFails) {
  try {
    grid_search({{1, 1.0}}, [](const GridCell&) -> TrainResult {
      throw Error(ErrorKind::kNonFinite, "x");
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
}
