#include "ease/trainer.h"

#include <cmath>
#include <numeric>

#include "ease/error.h"

namespace ease {

Adam::Adam(const ModelParams& params, Options options)
    : options_(options),
      m_(Gradients::zeros_like(params)),
      v_(Gradients::zeros_like(params)) {}

void Adam::update(std::vector<double>& p, const std::vector<double>& g,
                  std::vector<double>& m, std::vector<double>& v) {
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / (1.0 - bias1_);
    const double v_hat = v[i] / (1.0 - bias2_);
    p[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
  }
}

void Adam::step(ModelParams& params, const Gradients& grads) {
  ++t_;
  bias1_ *= options_.beta1;
  bias2_ *= options_.beta2;
  update(params.token_emb.data(), grads.token_emb.data(), m_.token_emb.data(), v_.token_emb.data());
  update(params.entity_emb.data(), grads.entity_emb.data(), m_.entity_emb.data(), v_.entity_emb.data());
  update(params.projection.data(), grads.projection.data(), m_.projection.data(), v_.projection.data());
  update(params.head.data(), grads.head.data(), m_.head.data(), v_.head.data());
  update(params.head_bias, grads.head_bias, m_.head_bias, v_.head_bias);
}

TrainingSet resolve_instances(const std::vector<TrainingInstance>& instances,
                              const std::vector<SentenceRecord>& corpus,
                              const std::map<std::string, int>& entity_index) {
  auto row_of = [&](const std::string& id) {
    auto it = entity_index.find(id);
    if (it == entity_index.end()) {
      throw Error(ErrorKind::kUnknownEntity, "no embedding row for entity \"" + id + "\"");
    }
    return it->second;
  };
  TrainingSet set;
  for (const auto& inst : instances) {
    const auto& sentence = corpus.at(inst.sentence);
    if (sentence.tokens.empty()) {
      throw Error(ErrorKind::kEmptySentence, "sentence " + sentence.id + " has no tokens");
    }
    set.tokens.push_back(sentence.tokens);
    set.positive.push_back(row_of(inst.positive));
    set.hard_negative.push_back(inst.hard_negative ? row_of(*inst.hard_negative) : -1);
  }
  return set;
}

Batch make_batch(const TrainingSet& data, std::span<const std::size_t> indices,
                 bool use_negatives) {
  Batch batch;
  batch.items.reserve(indices.size());
  for (std::size_t idx : indices) {
    batch.items.push_back({data.tokens[idx], data.positive[idx],
                           use_negatives ? data.hard_negative[idx] : -1});
  }
  return batch;
}

TrainResult train(const ModelParams& initial, const TrainingSet& data,
                  const TrainConfig& config, const DevMetric& dev) {
  initial.validate();
  if (config.batch_size == 0) throw Error(ErrorKind::kConfig, "batch_size must be >= 1");
  if (config.eval_every == 0) throw Error(ErrorKind::kConfig, "eval_every must be >= 1");
  if (!(config.learning_rate >= 0.0)) throw Error(ErrorKind::kConfig, "learning rate must be >= 0");
  if (data.size() == 0) throw Error(ErrorKind::kConfig, "no training instances");
  if (!config.self_cl && initial.lambda == 0.0) {
    throw Error(ErrorKind::kConfig, "self contrast disabled with lambda = 0");
  }

  ModelParams params = initial;
  Adam adam(params, {.learning_rate = config.learning_rate});
  Rng order_rng(mix_seed(config.seed, 0x5eed));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  order_rng.shuffle(std::span<std::size_t>(order));

  TrainResult result;
  result.total_steps = (data.size() + config.batch_size - 1) / config.batch_size;
  bool have_best = false;
  double loss_since_eval = 0.0;
  std::size_t steps_since_eval = 0;

  for (std::size_t step = 0; step < result.total_steps; ++step) {
    const std::size_t begin = step * config.batch_size;
    const std::size_t end = std::min(data.size(), begin + config.batch_size);
    const Batch batch = make_batch(
        data, std::span<const std::size_t>(order).subspan(begin, end - begin),
        config.hard_negatives);
    const DropoutSource dropout{params.dropout_p, config.seed, step};
    if (config.observer) config.observer(step, batch, params, dropout);
    const LossResult lr = ease_loss(batch, params, dropout, {.self_cl = config.self_cl});
    adam.step(params, lr.grads);
    if (!params.token_emb.all_finite() || !params.entity_emb.all_finite() ||
        !params.projection.all_finite()) {
      throw Error(ErrorKind::kNonFinite, "parameters diverged at step " + std::to_string(step + 1));
    }
    result.steps.push_back({lr.loss, lr.entity_loss, lr.self_loss});
    loss_since_eval += lr.loss;
    ++steps_since_eval;

    const std::size_t done = step + 1;
    if (done % config.eval_every == 0 || done == result.total_steps) {
      const double metric = dev(params);
      if (!std::isfinite(metric)) {
        throw Error(ErrorKind::kNonFinite, "dev metric is not finite at step " + std::to_string(done));
      }
      result.log.push_back({done, metric, loss_since_eval / static_cast<double>(steps_since_eval)});
      loss_since_eval = 0.0;
      steps_since_eval = 0;
      if (!have_best || metric > result.best_metric) {
        have_best = true;
        result.best_metric = metric;
        result.best_step = done;
        result.best = params;
      }
    }
  }
  return result;
}

std::vector<GridCell> make_grid(const std::vector<std::size_t>& batch_sizes,
                                const std::vector<double>& learning_rates) {
  std::vector<GridCell> cells;
  for (std::size_t bs : batch_sizes)
    for (double lr : learning_rates) cells.push_back({bs, lr});
  return cells;
}

GridResult grid_search(const std::vector<GridCell>& cells,
                       const std::function<TrainResult(const GridCell&)>& run) {
  if (cells.empty()) throw Error(ErrorKind::kConfig, "empty grid");
  GridResult result;
  bool have_best = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    GridOutcome outcome{cells[i], std::nullopt, ""};
    try {
      TrainResult tr = run(cells[i]);
      outcome.dev_score = tr.best_metric;
      if (!have_best || tr.best_metric > result.outcomes[result.best_index].dev_score.value()) {
        have_best = true;
        result.best_index = i;
        result.best_run = std::move(tr);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNonFinite) throw;
      outcome.note = std::string("diverged: ") + e.what();
    }
    result.outcomes.push_back(std::move(outcome));
  }
  if (!have_best) throw Error(ErrorKind::kNonFinite, "every grid cell diverged");
  return result;
}

}  // namespace ease
