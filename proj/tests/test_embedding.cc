#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "ease/embedding.h"
#include "ease/error.h"
#include "generators.h"

using namespace ease;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

}  // namespace

TEST(Normalize, ThreeFourFive) {
  const Vector v = normalize(Vector{3, 4});
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
}

TEST(Normalize, ZeroVectorFails) {
  EXPECT_EQ(kind_of([] { normalize(Vector{0, 0}); }), ErrorKind::kZeroVector);
}

TEST(Normalize, SmallVectorKeepsDirection) {
  const Vector v = normalize(Vector{1e-3, 0, 0, 0});
  EXPECT_EQ(v, (Vector{1, 0, 0, 0}));
}

TEST(Normalize, EpsilonIsConfigurable) {
  const double saved = numeric_options().zero_norm_epsilon;
  numeric_options().zero_norm_epsilon = 1e-3;
  EXPECT_EQ(kind_of([] { normalize(Vector{1e-4, 0}); }), ErrorKind::kZeroVector);
  numeric_options().zero_norm_epsilon = saved;
  EXPECT_NO_THROW(normalize(Vector{1e-4, 0}));
}

TEST(Normalize, OutputHasUnitNorm) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Vector v = normalize(gen::vector(rng, 1 + rng.uniform_index(20), std::exp(10 * rng.normal())));
    EXPECT_NEAR(norm(v), 1.0, 1e-12);
  }
}

TEST(Cosine, Examples) {
  EXPECT_EQ(cosine_sim(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_sim(Vector{1, 1}, Vector{2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_sim(Vector{1, 0}, Vector{-2, 0}), -1.0);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(kind_of([] { cosine_sim(Vector{1, 0}, Vector{1, 0, 0}); }), ErrorKind::kDimMismatch);
  EXPECT_EQ(kind_of([] { cosine_sim(Vector{0, 0}, Vector{1, 0}); }), ErrorKind::kZeroVector);
}

TEST(Cosine, ClampedToUnitInterval) {
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const Vector a = gen::vector(rng, 7);
    Vector b = a;
    for (double& x : b) x *= 3.7;
    const double s = cosine_sim(a, b);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(cosine_sim(a, Vector(b.begin(), b.end())), -1.0);
  }
}

TEST(CosineProperty, PositiveScaleInvariance) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.uniform_index(16);
    const Vector a = gen::vector(rng, d), b = gen::vector(rng, d);
    const double alpha = std::exp(3 * rng.normal()), beta = std::exp(3 * rng.normal());
    Vector sa = a, sb = b;
    for (double& x : sa) x *= alpha;
    for (double& x : sb) x *= beta;
    EXPECT_NEAR(cosine_sim(sa, sb), cosine_sim(a, b), 1e-12);
  }
}

TEST(CosineProperty, ExactlySymmetric) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.uniform_index(16);
    const Vector a = gen::vector(rng, d), b = gen::vector(rng, d);
    EXPECT_EQ(cosine_sim(a, b), cosine_sim(b, a));
  }
}

TEST(SimMatrix, IdentityRows) {
  const Matrix id = Matrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(sim_matrix(id, id), id);
}

TEST(SimMatrix, OneAgainstThree) {
  const Matrix a = Matrix::from_rows({{1, 0}});
  const Matrix b = Matrix::from_rows({{1, 0}, {0, 1}, {-1, 0}});
  EXPECT_EQ(sim_matrix(a, b), Matrix::from_rows({{1, 0, -1}}));
}

TEST(SimMatrix, MatchesPairwiseCosine) {
  Rng rng(5);
  const Matrix a = gen::matrix(rng, 3, 4), b = gen::matrix(rng, 5, 4);
  const Matrix s = sim_matrix(a, b);
  ASSERT_EQ(s.rows(), 3u);
  ASSERT_EQ(s.dim(), 5u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(s(i, j), cosine_sim(a.row(i), b.row(j)));
  }
}

TEST(SimMatrix, Errors) {
  const Matrix a = Matrix::from_rows({{1, 0}, {0, 0}});
  const Matrix b = Matrix::from_rows({{1, 0, 0}});
  EXPECT_EQ(kind_of([&] { sim_matrix(a, b); }), ErrorKind::kDimMismatch);
  try {
    sim_matrix(a, Matrix::from_rows({{1, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVector);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(SimMatrixProperty, TransposeSymmetry) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 1 + rng.uniform_index(10);
    const Matrix a = gen::matrix(rng, 1 + rng.uniform_index(9), d);
    const Matrix b = gen::matrix(rng, 1 + rng.uniform_index(9), d);
    const Matrix ab = sim_matrix(a, b), ba = sim_matrix(b, a).transposed();
    for (std::size_t i = 0; i < ab.data().size(); ++i) EXPECT_NEAR(ab.data()[i], ba.data()[i], 1e-12);
  }
}

TEST(SimMatrixProperty, IndependentOfThreadCount) {
  Rng rng(7);
  const Matrix a = gen::matrix(rng, 300, 12), b = gen::matrix(rng, 40, 12);
  ::setenv("EASE_THREADS", "1", 1);
  const Matrix one = sim_matrix(a, b);
  ::setenv("EASE_THREADS", "4", 1);
  const Matrix four = sim_matrix(a, b);
  ::unsetenv("EASE_THREADS");
  EXPECT_EQ(one, four);
}

TEST(MeanPool, Examples) {
  EXPECT_EQ(mean_pool(Matrix::from_rows({{1, 3}, {3, 1}}), std::vector<int>{1, 1}), (Vector{2, 2}));
  EXPECT_EQ(mean_pool(Matrix::from_rows({{1, 3}, {9, 9}}), std::vector<int>{1, 0}), (Vector{1, 3}));
  EXPECT_EQ(mean_pool(Matrix::from_rows({{1, 0}, {0, 1}, {2, 2}}), std::vector<int>{1, 1, 1}), (Vector{1, 1}));
}

TEST(MeanPool, EmptyMaskFails) {
  EXPECT_EQ(kind_of([] { mean_pool(Matrix::from_rows({{1, 3}}), std::vector<int>{0}); }),
            ErrorKind::kEmptyMask);
}

TEST(MeanPoolProperty, PermutationInvariant) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform_index(8), d = 1 + rng.uniform_index(6);
    const Matrix m = gen::matrix(rng, n, d);
    std::vector<int> mask(n);
    for (int& x : mask) x = rng.bernoulli(0.6) ? 1 : 0;
    mask[rng.uniform_index(n)] = 1;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span(perm));
    Matrix pm(n, d);
    std::vector<int> pmask(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(m.row(perm[i]).begin(), m.row(perm[i]).end(), pm.row(i).begin());
      pmask[i] = mask[perm[i]];
    }
    const Vector a = mean_pool(m, mask), b = mean_pool(pm, pmask);
    for (std::size_t c = 0; c < d; ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  }
}

TEST(MatrixType, AppendRowChecksDimension) {
  Matrix m(0, 2);
  m.append_row(Vector{1, 2});
  EXPECT_EQ(kind_of([&] { m.append_row(Vector{1, 2, 3}); }), ErrorKind::kDimMismatch);
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_TRUE(m.all_finite());
  m(0, 1) = std::nan("");
  EXPECT_FALSE(m.all_finite());
}
