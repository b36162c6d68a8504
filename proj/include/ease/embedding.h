#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ease {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Used for sentence/entity embedding
// batches, parameter tables and similarity outputs alike.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t dim, double fill = 0.0)
      : rows_(rows), dim_(dim), data_(rows * dim, fill) {}

  // Builds from explicit rows; all rows must share one length.
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * dim_ + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void append_row(std::span<const double> values);
  Matrix transposed() const;
  bool all_finite() const;
  void fill(double value);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Numeric knobs shared by the whole library.
struct NumericOptions {
  // Norms at or below this are treated as zero vectors.
  double zero_norm_epsilon = 1e-30;
};

NumericOptions& numeric_options();

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

Vector normalize(std::span<const double> v);

double cosine_sim(std::span<const double> a, std::span<const double> b);

// Pairwise cosine similarities, rows_a x rows_b. Rows may be processed in
// parallel (EASE_THREADS); the per-entry reduction order is fixed so results
// do not depend on the thread count.
Matrix sim_matrix(const Matrix& a, const Matrix& b);

Vector mean_pool(const Matrix& tokens, std::span<const int> mask);

// Row-wise L2 normalization; throws ZeroVector naming the offending row.
Matrix normalize_rows(const Matrix& m);

// Worker count from EASE_THREADS, falling back to hardware concurrency.
std::size_t thread_count();

}  // namespace ease
