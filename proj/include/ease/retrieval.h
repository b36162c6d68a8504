#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ease/embedding.h"

namespace ease {

// Index of the largest entry of `scores`, lowest index on ties.
std::size_t argmax_lowest(std::span<const double> scores);

struct TatoebaResult {
  double forward = 0.0;
  double backward = 0.0;
  double accuracy = 0.0;  // mean of both directions
};

// Row i of src is parallel to row i of tgt.
TatoebaResult eval_tatoeba(const Matrix& src, const Matrix& tgt);

struct BitextPools {
  std::vector<std::string> src_ids;
  Matrix src;  // queries (non-English side)
  std::vector<std::string> tgt_ids;
  Matrix tgt;  // targets (English side)
  std::set<std::pair<std::size_t, std::size_t>> gold;  // (src row, tgt row)
};

enum class MiningMode {
  kAllPairs,  // every cross pair at or above the threshold
  kForward,   // each source's nearest target, if at or above the threshold
  kBackward,  // each target's nearest source, if at or above the threshold
};

struct MiningScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t candidates = 0;
  std::size_t correct = 0;
};

// Candidate pairs (src row, tgt row) with their cosine, in row-major order.
std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>>
mining_candidates(const BitextPools& pools, MiningMode mode);

MiningScore eval_bucc(const BitextPools& pools, double threshold,
                      MiningMode mode = MiningMode::kAllPairs);

struct ThresholdSweepPoint {
  double threshold = 0.0;
  double f1 = 0.0;
};

struct ThresholdResult {
  double threshold = 0.0;
  double f1 = 0.0;
  std::vector<ThresholdSweepPoint> sweep;  // descending thresholds
};

// Tries every distinct candidate similarity as a threshold and keeps the one
// with the best F1 (the higher threshold on ties). With no gold pairs the
// threshold is placed just above the largest similarity.
ThresholdResult tune_threshold(const BitextPools& sample,
                               MiningMode mode = MiningMode::kAllPairs);

struct MapResult {
  double map = 0.0;
  std::vector<double> average_precision;  // per query; NaN when unscored
  std::size_t scored_queries = 0;
};

// Candidates ranked by cosine (lowest index first on ties) and cut at k.
// AP sums precision at the rank of each retrieved relevant candidate and
// divides by min(|relevant|, k). Queries without relevant candidates are
// skipped.
MapResult eval_map(const Matrix& queries, const Matrix& candidates,
                   const std::vector<std::vector<std::size_t>>& relevant,
                   std::size_t k = 1000);

}  // namespace ease
