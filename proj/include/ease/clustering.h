#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ease/embedding.h"

namespace ease {

struct KMeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  // Sum of squared distances after each assignment step.
  std::vector<double> objective_history;
  std::size_t iterations = 0;
  bool converged = false;

  double objective() const {
    return objective_history.empty() ? 0.0 : objective_history.back();
  }
};

// Lloyd's algorithm from k-means++ seeds. Stops when no centroid moves by
// tol or more, or after max_iter rounds. A cluster that empties is reseeded
// at the point farthest from its current centroid.
KMeansResult kmeans(const Matrix& x, const KMeansOptions& options);

// Minimum-cost perfect matching on a square cost matrix (row-major, n x n).
// Returns, for each row, the column assigned to it.
std::vector<std::size_t> solve_assignment(std::span<const double> cost,
                                          std::size_t n);

// Fraction of points correctly labeled under the best one-to-one mapping of
// predicted clusters onto gold classes. Labels must be non-negative.
double hungarian_accuracy(std::span<const int> predicted,
                          std::span<const int> gold);

struct LabeledSet {
  Matrix embeddings;
  std::vector<int> labels;
  std::size_t k = 0;
};

struct StcResult {
  double mean_accuracy = 0.0;
  std::vector<double> run_accuracy;
};

// K-Means `runs` times with seeds derived from `seed`, scoring each run by
// hungarian_accuracy, and averages.
StcResult eval_stc(const LabeledSet& set, std::size_t runs = 3,
                   std::uint64_t seed = 0);

}  // namespace ease
