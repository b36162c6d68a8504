#include "ease/embedding.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "ease/error.h"

namespace ease {

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(0, rows.front().size());
  m.data_.reserve(rows.size() * m.dim_);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty() && dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw Error(ErrorKind::kDimMismatch,
                "row of length " + std::to_string(values.size()) +
                    " appended to matrix of dim " + std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::transposed() const {
  Matrix t(dim_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const { return ease::all_finite(data_); }

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

NumericOptions& numeric_options() {
  static NumericOptions options;
  return options;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDimMismatch, std::to_string(a.size()) + " vs " +
                                             std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

Vector normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > numeric_options().zero_norm_epsilon)) {
    throw Error(ErrorKind::kZeroVector, "cannot normalize vector of norm " +
                                            std::to_string(n));
  }
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  const double d = dot(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  const double eps = numeric_options().zero_norm_epsilon;
  if (!(na > eps) || !(nb > eps)) {
    throw Error(ErrorKind::kZeroVector, "cosine of a zero-norm vector");
  }
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

std::size_t thread_count() {
  if (const char* env = std::getenv("EASE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<double> row_norms(const Matrix& m, const char* side) {
  std::vector<double> norms(m.rows());
  const double eps = numeric_options().zero_norm_epsilon;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    norms[r] = norm(m.row(r));
    if (!(norms[r] > eps)) {
      throw Error(ErrorKind::kZeroVector,
                  std::string(side) + " row " + std::to_string(r) +
                      " has zero norm");
    }
  }
  return norms;
}

}  // namespace

Matrix sim_matrix(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimMismatch,
                "sim_matrix dims " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
  const auto na = row_norms(a, "left");
  const auto nb = row_norms(b, "right");
  Matrix out(a.rows(), b.rows());

  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < b.rows(); ++j) {
        const double d = dot(a.row(i), b.row(j));
        out(i, j) = std::clamp(d / (na[i] * nb[j]), -1.0, 1.0);
      }
    }
  };

  const std::size_t workers =
      std::min(thread_count(), std::max<std::size_t>(1, a.rows() / 64));
  if (workers <= 1) {
    fill_rows(0, a.rows());
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (a.rows() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(a.rows(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fill_rows, begin, end);
  }
  return out;
}

Vector mean_pool(const Matrix& tokens, std::span<const int> mask) {
  if (mask.size() != tokens.rows()) {
    throw Error(ErrorKind::kDimMismatch,
                "mask length " + std::to_string(mask.size()) + " vs " +
                    std::to_string(tokens.rows()) + " rows");
  }
  Vector out(tokens.dim(), 0.0);
  std::size_t kept = 0;
  for (std::size_t r = 0; r < tokens.rows(); ++r) {
    if (mask[r] == 0) continue;
    ++kept;
    const auto row = tokens.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c];
  }
  if (kept == 0) throw Error(ErrorKind::kEmptyMask, "all mask entries are 0");
  for (double& x : out) x /= static_cast<double>(kept);
  return out;
}

Matrix normalize_rows(const Matrix& m) {
  const auto norms = row_norms(m, "input");
  Matrix out(m.rows(), m.dim());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.dim(); ++c) out(r, c) = m(r, c) / norms[r];
  return out;
}

}  // namespace ease
