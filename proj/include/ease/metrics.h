#pragma once

#include <span>
#include <string>
#include <vector>

#include "ease/embedding.h"

namespace ease {

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// Spearman's rho: Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct StsPair {
  std::string a;
  std::string b;
  double gold = 0.0;  // 0..5
};

// rho between row-wise cosine(left_i, right_i) and gold_i.
double eval_sts(const Matrix& left, const Matrix& right,
                std::span<const double> gold);

// Pairs whose gold score is strictly above the threshold.
std::vector<StsPair> select_positive_pairs(const std::vector<StsPair>& pairs,
                                           double threshold = 4.0);

// Mean squared distance between normalized row pairs.
double alignment(const Matrix& x, const Matrix& x_pos);

// log of the mean of exp(-2 |f(x)-f(y)|^2) over unordered pairs of distinct
// rows, f = L2 normalization.
double uniformity(const Matrix& data);

}  // namespace ease
