#include "ease/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ease/error.h"
#include "ease/rng.h"

namespace ease {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(0, x.dim());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t next = rng.uniform_index(n);
  for (std::size_t c = 0; c < k; ++c) {
    centroids.append_row(x.row(next));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      next = rng.uniform_index(n);
      continue;
    }
    double target = rng.uniform01() * total;
    next = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      target -= d2[i];
      if (target < 0.0) {
        next = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, const KMeansOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t k = options.k;
  if (k == 0) throw Error(ErrorKind::kConfig, "k must be >= 1");
  if (n < k) {
    throw Error(ErrorKind::kTooFewPoints,
                std::to_string(n) + " points for k = " + std::to_string(k));
  }
  Rng rng(options.seed);
  KMeansResult res;
  res.centroids = plus_plus_seeds(x, k, rng);
  res.assignment.assign(n, 0);
  std::vector<double> point_cost(n);
  const std::size_t d = x.dim();

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x.row(i), res.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(x.row(i), res.centroids.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<int>(c);
        }
      }
      res.assignment[i] = best;
      point_cost[i] = best_d;
      objective += best_d;
    }
    res.objective_history.push_back(objective);
    res.iterations = iter + 1;

    Matrix updated(k, d);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      ++members[c];
      for (std::size_t j = 0; j < d; ++j) updated(c, j) += x(i, j);
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) updated(c, j) /= static_cast<double>(members[c]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && point_cost[i] > far_d) {
          far_d = point_cost[i];
          far = i;
        }
      }
      taken[far] = true;
      point_cost[far] = 0.0;
      for (std::size_t j = 0; j < d; ++j) updated(c, j) = x(far, j);
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), res.centroids.row(c))));
    }
    res.centroids = std::move(updated);
    if (shift < options.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost,
                                          std::size_t n) {
  if (cost.size() != n * n) throw Error(ErrorKind::kShapeMismatch, "cost matrix must be n x n");
  // Shortest augmenting path with row/column potentials; 1-based internally,
  // column 0 is a sentinel.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_to(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = owner[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost[(r - 1) * n + (col - 1)] - u[r] - v[col];
        if (reduced < min_to[col]) {
          min_to[col] = reduced;
          way[col] = col0;
        }
        if (min_to[col] < delta) {
          delta = min_to[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[owner[col]] += delta;
          v[col] -= delta;
        } else {
          min_to[col] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t prev = way[col0];
      owner[col0] = owner[prev];
      col0 = prev;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t col = 1; col <= n; ++col) assignment[owner[col] - 1] = col - 1;
  return assignment;
}

double hungarian_accuracy(std::span<const int> predicted,
                          std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(predicted.size()) +
                                                " predictions vs " +
                                                std::to_string(gold.size()) + " labels");
  }
  if (gold.empty()) throw Error(ErrorKind::kDegenerateInput, "no points");
  int top = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] < 0 || gold[i] < 0) {
      throw Error(ErrorKind::kDegenerateInput, "labels must be non-negative");
    }
    top = std::max({top, predicted[i], gold[i]});
  }
  const auto k = static_cast<std::size_t>(top) + 1;
  std::vector<double> counts(k * k, 0.0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    counts[static_cast<std::size_t>(predicted[i]) * k + static_cast<std::size_t>(gold[i])] += 1.0;
  }
  std::vector<double> cost(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) cost[i] = -counts[i];
  const auto mapping = solve_assignment(cost, k);
  double matched = 0.0;
  for (std::size_t c = 0; c < k; ++c) matched += counts[c * k + mapping[c]];
  return matched / static_cast<double>(gold.size());
}

StcResult eval_stc(const LabeledSet& set, std::size_t runs, std::uint64_t seed) {
  if (runs == 0) throw Error(ErrorKind::kConfig, "runs must be >= 1");
  if (set.labels.size() != set.embeddings.rows()) {
    throw Error(ErrorKind::kLengthMismatch, "labels and embeddings disagree");
  }
  StcResult res;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto km = kmeans(set.embeddings, {.k = set.k, .seed = mix_seed(seed, r)});
    res.run_accuracy.push_back(hungarian_accuracy(km.assignment, set.labels));
  }
  double sum = 0.0;
  for (double a : res.run_accuracy) sum += a;
  res.mean_accuracy = sum / static_cast<double>(runs);
  return res;
}

}  // namespace ease
