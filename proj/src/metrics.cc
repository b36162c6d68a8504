#include "ease/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ease/error.h"

namespace ease {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean((i+1)..(j+1)).
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(ErrorKind::kDegenerateInput, "need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::kDegenerateInput, "constant input has no correlation");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double eval_sts(const Matrix& left, const Matrix& right,
                std::span<const double> gold) {
  if (left.rows() != right.rows() || left.rows() != gold.size()) {
    throw Error(ErrorKind::kLengthMismatch, "STS inputs disagree in length");
  }
  std::vector<double> sims(left.rows());
  for (std::size_t i = 0; i < left.rows(); ++i) sims[i] = cosine_sim(left.row(i), right.row(i));
  return spearman(sims, gold);
}

std::vector<StsPair> select_positive_pairs(const std::vector<StsPair>& pairs,
                                           double threshold) {
  std::vector<StsPair> out;
  for (const auto& p : pairs) {
    if (p.gold > threshold) out.push_back(p);
  }
  return out;
}

double alignment(const Matrix& x, const Matrix& x_pos) {
  if (x.rows() != x_pos.rows() || x.dim() != x_pos.dim()) {
    throw Error(ErrorKind::kShapeMismatch, "alignment needs equally shaped pair matrices");
  }
  if (x.rows() == 0) throw Error(ErrorKind::kEmptyPairs, "no positive pairs");
  const Matrix a = normalize_rows(x);
  const Matrix b = normalize_rows(x_pos);
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) {
      const double diff = a(i, c) - b(i, c);
      d2 += diff * diff;
    }
    total += d2;
  }
  return total / static_cast<double>(a.rows());
}

double uniformity(const Matrix& data) {
  if (data.rows() < 2) throw Error(ErrorKind::kTooFewPoints, "uniformity needs at least two rows");
  const Matrix f = normalize_rows(data);
  std::vector<double> exponents;
  exponents.reserve(f.rows() * (f.rows() - 1) / 2);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = i + 1; j < f.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < f.dim(); ++c) {
        const double diff = f(i, c) - f(j, c);
        d2 += diff * diff;
      }
      exponents.push_back(-2.0 * d2);
    }
  }
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - top);
  return top + std::log(sum) - std::log(static_cast<double>(exponents.size()));
}

}  // namespace ease
