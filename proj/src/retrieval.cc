#include "ease/retrieval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ease/error.h"

namespace ease {

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[best]) best = j;
  }
  return best;
}

TatoebaResult eval_tatoeba(const Matrix& src, const Matrix& tgt) {
  if (src.rows() != tgt.rows() || src.dim() != tgt.dim()) {
    throw Error(ErrorKind::kShapeMismatch, "source and target must have equal shapes");
  }
  if (src.rows() == 0) throw Error(ErrorKind::kShapeMismatch, "no sentence pairs");
  const Matrix fwd = sim_matrix(src, tgt);
  const Matrix bwd = fwd.transposed();
  std::size_t hits_fwd = 0, hits_bwd = 0;
  for (std::size_t i = 0; i < src.rows(); ++i) {
    if (argmax_lowest(fwd.row(i)) == i) ++hits_fwd;
    if (argmax_lowest(bwd.row(i)) == i) ++hits_bwd;
  }
  const double n = static_cast<double>(src.rows());
  TatoebaResult r;
  r.forward = static_cast<double>(hits_fwd) / n;
  r.backward = static_cast<double>(hits_bwd) / n;
  r.accuracy = (r.forward + r.backward) / 2.0;
  return r;
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>>
mining_candidates(const BitextPools& pools, MiningMode mode) {
  for (const auto& [s, t] : pools.gold) {
    if (s >= pools.src.rows() || t >= pools.tgt.rows()) {
      throw Error(ErrorKind::kShapeMismatch, "gold pair references a missing row");
    }
  }
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> out;
  if (pools.src.rows() == 0 || pools.tgt.rows() == 0) return out;
  const Matrix sims = sim_matrix(pools.src, pools.tgt);
  switch (mode) {
    case MiningMode::kAllPairs:
      for (std::size_t i = 0; i < sims.rows(); ++i)
        for (std::size_t j = 0; j < sims.dim(); ++j) out.push_back({{i, j}, sims(i, j)});
      break;
    case MiningMode::kForward:
      for (std::size_t i = 0; i < sims.rows(); ++i) {
        const std::size_t j = argmax_lowest(sims.row(i));
        out.push_back({{i, j}, sims(i, j)});
      }
      break;
    case MiningMode::kBackward: {
      const Matrix t = sims.transposed();
      for (std::size_t j = 0; j < t.rows(); ++j) {
        const std::size_t i = argmax_lowest(t.row(j));
        out.push_back({{i, j}, sims(i, j)});
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
  }
  return out;
}

namespace {

// 2PR/(P+R) written over integer counts so equal scores compare equal.
double f1_from_counts(std::size_t correct, std::size_t candidates, std::size_t gold) {
  if (correct == 0) return 0.0;
  return 2.0 * static_cast<double>(correct) / static_cast<double>(candidates + gold);
}

}  // namespace

MiningScore eval_bucc(const BitextPools& pools, double threshold, MiningMode mode) {
  MiningScore score;
  for (const auto& [pair, sim] : mining_candidates(pools, mode)) {
    if (sim < threshold) continue;
    ++score.candidates;
    if (pools.gold.contains(pair)) ++score.correct;
  }
  if (score.candidates > 0) {
    score.precision = static_cast<double>(score.correct) / static_cast<double>(score.candidates);
  }
  if (!pools.gold.empty()) {
    score.recall = static_cast<double>(score.correct) / static_cast<double>(pools.gold.size());
  }
  score.f1 = f1_from_counts(score.correct, score.candidates, pools.gold.size());
  return score;
}

ThresholdResult tune_threshold(const BitextPools& sample, MiningMode mode) {
  auto cands = mining_candidates(sample, mode);
  ThresholdResult result;
  double max_sim = -1.0;
  for (const auto& c : cands) max_sim = std::max(max_sim, c.second);
  if (sample.gold.empty() || cands.empty()) {
    result.threshold = std::nextafter(max_sim, std::numeric_limits<double>::infinity());
    result.f1 = 0.0;
    return result;
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::size_t taken = 0, correct = 0;
  bool have_best = false;
  std::size_t i = 0;
  while (i < cands.size()) {
    const double t = cands[i].second;
    while (i < cands.size() && cands[i].second == t) {
      ++taken;
      if (sample.gold.contains(cands[i].first)) ++correct;
      ++i;
    }
    const double f1 = f1_from_counts(correct, taken, sample.gold.size());
    result.sweep.push_back({t, f1});
    if (!have_best || f1 > result.f1) {
      have_best = true;
      result.f1 = f1;
      result.threshold = t;
    }
  }
  return result;
}

MapResult eval_map(const Matrix& queries, const Matrix& candidates,
                   const std::vector<std::vector<std::size_t>>& relevant,
                   std::size_t k) {
  if (relevant.size() != queries.rows()) {
    throw Error(ErrorKind::kLengthMismatch, "one relevance list per query required");
  }
  if (k == 0) throw Error(ErrorKind::kConfig, "k must be >= 1");
  MapResult res;
  res.average_precision.assign(queries.rows(), std::numeric_limits<double>::quiet_NaN());
  if (candidates.rows() == 0) throw Error(ErrorKind::kEmptyRelevance, "no candidates");
  const Matrix sims = sim_matrix(queries, candidates);
  double total = 0.0;
  std::vector<std::size_t> order(candidates.rows());
  std::vector<char> is_relevant(candidates.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    std::fill(is_relevant.begin(), is_relevant.end(), 0);
    std::size_t n_rel = 0;
    for (std::size_t c : relevant[q]) {
      if (c >= candidates.rows()) throw Error(ErrorKind::kShapeMismatch, "relevant index out of range");
      if (!is_relevant[c]) ++n_rel;
      is_relevant[c] = 1;
    }
    if (n_rel == 0) continue;
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = sims.row(q);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    const std::size_t depth = std::min(k, order.size());
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < depth; ++r) {
      if (!is_relevant[order[r]]) continue;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    const double ap = sum / static_cast<double>(std::min(n_rel, k));
    res.average_precision[q] = ap;
    total += ap;
    ++res.scored_queries;
  }
  if (res.scored_queries == 0) {
    throw Error(ErrorKind::kEmptyRelevance, "no query has a relevant candidate");
  }
  res.map = total / static_cast<double>(res.scored_queries);
  return res;
}

}  // namespace ease
