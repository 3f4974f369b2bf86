#include "ensfts/embedding.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ensfts/error.hpp"
#include "ensfts/linalg.hpp"

namespace ensfts {
namespace {

// Test-side oracle: leading eigenvector of a symmetric PSD matrix by plain
// power iteration. Shares no code with the solvers under test.
std::vector<double> power_iteration(const Matrix& m, int iterations = 5000) {
  std::vector<double> v(m.rows());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i % 7) - 0.11 * static_cast<double>(i);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> w(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) w[i] += m(i, j) * v[j];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / norm;
  }
  return v;
}

// K~ = K - 1K - K1 + 1K1 evaluated with explicit products against 1_N.
Matrix centered_by_products(const Matrix& k) {
  const std::size_t n = k.rows();
  const Matrix ones(n, n, 1.0 / static_cast<double>(n));
  const Matrix a = ones * k;
  const Matrix b = k * ones;
  const Matrix c = ones * k * ones;
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = k(i, j) - a(i, j) - b(i, j) + c(i, j);
  }
  return out;
}

double spearman(std::vector<double> a, std::vector<double> b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const auto n = static_cast<double>(ra.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

TEST(Standardize, HandComputedZScores) {
  const auto [z, stats] = standardize(Matrix{{2}, {4}, {6}});
  EXPECT_DOUBLE_EQ(stats.means[0], 4.0);
  EXPECT_NEAR(stats.std_devs[0], 1.6329931618554521, 1e-12);
  EXPECT_NEAR(z(0, 0), -1.2247448713915890, 1e-12);
  EXPECT_EQ(z(1, 0), 0.0);
  EXPECT_NEAR(z(2, 0), 1.2247448713915890, 1e-12);
}

TEST(Standardize, ConstantColumnMapsToZero) {
  const auto [z, stats] = standardize(Matrix{{5, 1}, {5, 2}, {5, 3}});
  EXPECT_EQ(stats.std_devs[0], 0.0);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z(r, 0), 0.0);
}

TEST(Standardize, IdempotentOnStandardizedInput) {
  const Matrix once = standardize(Matrix{{1, 10}, {3, -2}, {8, 4}, {0, 7}}).first;
  const Matrix twice = standardize(once).first;
  for (std::size_t i = 0; i < once.entries().size(); ++i) EXPECT_NEAR(once.entries()[i], twice.entries()[i], 1e-9);
}

TEST(Standardize, RejectsEmpty) { EXPECT_THROW(standardize(Matrix{}), InvalidInput); }

TEST(Pca, PerfectlyCorrelatedPoints) {
  const Matrix data{{1, 1}, {2, 2}, {3, 3}};
  const auto model = fit_pca(data);
  const double r = 1.0 / std::numbers::sqrt2;
  EXPECT_NEAR(model.component[0], r, 1e-12);
  EXPECT_NEAR(model.component[1], r, 1e-12);
  EXPECT_NEAR(model.eigenvalue, 3.0, 1e-12);

  // Oracle: explicit standardize-then-dot.
  const double z = (3.0 - 2.0) / std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(project_pca(model, std::vector<double>{3, 3}), z * r + z * r, 1e-12);
  EXPECT_NEAR(project_pca(model, std::vector<double>{3, 3}), std::sqrt(3.0), 1e-12);
}

TEST(Pca, SingleColumn) {
  const auto model = fit_pca(Matrix{{4}, {-1}, {2}});
  ASSERT_EQ(model.component.size(), 1u);
  EXPECT_EQ(model.component[0], 1.0);
}

TEST(Pca, ConstantColumnHasZeroLoading) {
  const auto model = fit_pca(Matrix{{1, 3, 2}, {2, 3, 1}, {4, 3, 5}, {0, 3, 3}});
  EXPECT_NEAR(model.component[1], 0.0, 1e-12);
}

TEST(Pca, MeanProjectsToZeroAndComponentToOne) {
  const Matrix data{{1, 5, 2}, {2, 3, 1}, {4, 8, 5}, {0, 1, 3}, {3, 3, 3}};
  const auto model = fit_pca(data);
  EXPECT_NEAR(project_pca(model, model.stats.means), 0.0, 1e-12);
  std::vector<double> p(3);
  for (std::size_t j = 0; j < 3; ++j) p[j] = model.stats.means[j] + model.component[j] * model.stats.std_devs[j];
  EXPECT_NEAR(project_pca(model, p), 1.0, 1e-12);
  EXPECT_THROW(project_pca(model, std::vector<double>{1, 2}), InvalidInput);
}

TEST(Pca, TrainingScoresHaveZeroMeanAndLeadingVariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix data(200, 6);
  for (std::size_t r = 0; r < 200; ++r) {
    const double f = g(rng);
    for (std::size_t c = 0; c < 6; ++c) data(r, c) = (c + 1.0) * f + g(rng) * 0.5 + 10.0 * c;
  }
  const auto model = fit_pca(data);
  std::vector<double> scores;
  for (std::size_t r = 0; r < 200; ++r) scores.push_back(project_pca(model, data.row(r)));
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / 200.0;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= 199.0;
  EXPECT_NEAR(mean, 0.0, 1e-8);
  EXPECT_NEAR(var, model.eigenvalue, 1e-6);
}

TEST(RbfKernel, ScalarEvaluation) {
  const Matrix a{{0, 0}};
  const Matrix b{{1, 3}};
  EXPECT_NEAR(rbf_kernel_matrix(a, b, 0.1)(0, 0), 0.36787944117144233, 1e-15);
  EXPECT_EQ(rbf_kernel_matrix(b, b, 7.0)(0, 0), 1.0);
  EXPECT_THROW(rbf_kernel_matrix(a, b, 0.0), InvalidInput);
}

TEST(RbfKernel, SelfKernelIsSymmetricPsd) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t n : {2, 5, 12, 20}) {
    Matrix x(n, 3);
    for (double& v : x.entries()) v = g(rng);
    const Matrix k = rbf_kernel_matrix(x, x, 0.5);
    EXPECT_TRUE(k.is_symmetric(0.0));
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(k(i, i), 1.0);
    for (double v : k.entries()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (double ev : sym_eigen(k).values) EXPECT_GE(ev, -1e-8);
  }
}

TEST(CenterKernel, TwoByTwoClosedForm) {
  const double a = 0.3;
  const Matrix c = center_kernel(Matrix{{1, a}, {a, 1}});
  EXPECT_NEAR(c(0, 0), (1 - a) / 2, 1e-15);
  EXPECT_NEAR(c(0, 1), (a - 1) / 2, 1e-15);
  EXPECT_NEAR(c(1, 0), (a - 1) / 2, 1e-15);
  EXPECT_NEAR(c(1, 1), (1 - a) / 2, 1e-15);
}

TEST(CenterKernel, AllOnesCentersToZero) {
  const Matrix c = center_kernel(Matrix(4, 4, 1.0));
  for (double v : c.entries()) EXPECT_EQ(v, 0.0);
}

TEST(CenterKernel, ZeroSumsMatchesProductFormAndIsIdempotent) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(15, 4);
  for (double& v : x.entries()) v = g(rng);
  const Matrix k = rbf_kernel_matrix(x, x, 0.3);
  const Matrix c = center_kernel(k);
  EXPECT_LE(frobenius_norm(c - centered_by_products(k)), 1e-12);
  double grand = 0.0;
  for (std::size_t i = 0; i < 15; ++i) {
    double rs = 0.0;
    double cs = 0.0;
    for (std::size_t j = 0; j < 15; ++j) {
      rs += c(i, j);
      cs += c(j, i);
    }
    EXPECT_NEAR(rs, 0.0, 1e-9);
    EXPECT_NEAR(cs, 0.0, 1e-9);
    grand += rs;
  }
  EXPECT_NEAR(grand, 0.0, 1e-9);
  EXPECT_LE(frobenius_norm(center_kernel(c) - c), 1e-10);
  EXPECT_THROW(center_kernel(Matrix(2, 3)), InvalidInput);
}

TEST(Kpca, IdenticalRowsAreDegenerate) {
  EXPECT_THROW(fit_kpca(Matrix{{1, 2}, {1, 2}, {1, 2}, {1, 2}}, 0.1), DegenerateEmbedding);
}

TEST(Kpca, RejectsBadArguments) {
  EXPECT_THROW(fit_kpca(Matrix{{1, 2}, {3, 4}}, 0.1), InvalidInput);
  EXPECT_THROW(fit_kpca(Matrix{{1}, {2}, {3}}, -1.0), InvalidInput);
}

TEST(Kpca, TwoClustersMatchPowerIterationOracle) {
  const Matrix data{{0, 0}, {0.2, 0.1}, {5, 5}, {5.1, 4.9}};
  const double gamma = 0.5;
  const auto model = fit_kpca(data, gamma);

  // Oracle path: standardize by hand, kernel by hand, centre by products.
  const auto z = standardize(data).first;
  Matrix k(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 2; ++c) d2 += (z(i, c) - z(j, c)) * (z(i, c) - z(j, c));
      k(i, j) = std::exp(-gamma * d2);
    }
  }
  const Matrix kc = centered_by_products(k);
  const auto v = power_iteration(kc);
  double lambda = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) lambda += v[i] * kc(i, j) * v[j];
  }
  EXPECT_NEAR(model.lambda, lambda, 1e-10);
  const double sign = (model.training_scores[0] * v[0] >= 0.0) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(model.training_scores[i], sign * std::sqrt(lambda) * v[i], 1e-8);
  }
  EXPECT_LT(model.training_scores[0] * model.training_scores[2], 0.0);
  EXPECT_GT(model.training_scores[0] * model.training_scores[1], 0.0);
  EXPECT_LT(model.training_scores[1] * model.training_scores[3], 0.0);
}

TEST(Kpca, NormalizationAndZeroMeanScores) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(40, 5);
  for (double& v : x.entries()) v = g(rng);
  const auto model = fit_kpca(x, 0.2);
  double norm = 0.0;
  for (double a : model.alpha) norm += a * a;
  EXPECT_NEAR(model.lambda * norm, 1.0, 1e-10);
  const double mean = std::accumulate(model.training_scores.begin(), model.training_scores.end(), 0.0) / 40.0;
  EXPECT_NEAR(mean, 0.0, 1e-8);
}

TEST(Kpca, ProjectingTrainingPointsReproducesScores) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(30, 3);
  for (double& v : x.entries()) v = g(rng) * 10.0 + 3.0;
  const auto model = fit_kpca(x, 0.1);
  for (std::size_t j = 0; j < 30; ++j) EXPECT_NEAR(project_kpca(model, x.row(j)), model.training_scores[j], 1e-7);
  EXPECT_THROW(project_kpca(model, std::vector<double>{1.0}), InvalidInput);
}

TEST(Kpca, SymmetricDataCenterProjectsToZero) {
  const Matrix data{{-2, 1}, {-1, 1}, {1, 1}, {2, 1}};
  const auto model = fit_kpca(data, 0.1);
  EXPECT_NEAR(project_kpca(model, std::vector<double>{0, 1}), 0.0, 1e-12);
  const double left = project_kpca(model, std::vector<double>{-0.5, 1});
  const double right = project_kpca(model, std::vector<double>{0.5, 1});
  EXPECT_NEAR(left, -right, 1e-12);
  EXPECT_GT(std::abs(left), 1e-3);
}

TEST(Kpca, SmallGammaOrdersPointsLikePca) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(25, 3);
  for (std::size_t r = 0; r < 25; ++r) {
    const double t = static_cast<double>(r) - 12.0;
    x(r, 0) = t + 0.05 * g(rng);
    x(r, 1) = 2.0 * t + 0.05 * g(rng);
    x(r, 2) = -0.5 * t + 0.05 * g(rng);
  }
  const auto pca = fit_pca(x);
  const auto kpca = fit_kpca(x, 1e-3);
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t r = 0; r < 25; ++r) {
    a.push_back(project_pca(pca, x.row(r)));
    b.push_back(project_kpca(kpca, x.row(r)));
  }
  EXPECT_EQ(spearman(a, b), 1.0);
}

TEST(Kpca, DenseAndLanczosRoutesAgree) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(120, 4);
  for (double& v : x.entries()) v = g(rng);
  KpcaOptions dense;
  dense.dense_solver_limit = 1000;
  KpcaOptions krylov;
  krylov.dense_solver_limit = 0;
  const auto a = fit_kpca(x, 0.3, dense);
  const auto b = fit_kpca(x, 0.3, krylov);
  EXPECT_NEAR(a.lambda, b.lambda, 1e-9 * a.lambda);
  for (std::size_t i = 0; i < 120; ++i) EXPECT_NEAR(a.training_scores[i], b.training_scores[i], 1e-7);
}

TEST(Kpca, SubsampleCapLimitsStoredPoints) {
  Matrix x(50, 2);
  for (std::size_t r = 0; r < 50; ++r) {
    x(r, 0) = static_cast<double>(r);
    x(r, 1) = std::sin(0.3 * static_cast<double>(r));
  }
  KpcaOptions opts;
  opts.max_training_points = 10;
  const auto model = fit_kpca(x, 0.1, opts);
  EXPECT_EQ(model.training_points.rows(), 10u);
  EXPECT_EQ(model.alpha.size(), 10u);
}

TEST(Projection, Deterministic) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(20, 3);
  for (double& v : x.entries()) v = g(rng);
  const auto pca = fit_pca(x);
  const auto kpca = fit_kpca(x, 0.4);
  const std::vector<double> p{0.3, -0.2, 1.1};
  EXPECT_EQ(project_pca(pca, p), project_pca(pca, p));
  EXPECT_EQ(project_kpca(kpca, p), project_kpca(kpca, p));
}

TEST(EmbedSeries, SingleColumnIsStandardizedInput) {
  const Matrix data{{1}, {4}, {2}, {8}, {5}, {7}};
  const auto result = embed_series(data, 4, {EmbeddingMethod::Pca, std::nullopt, {}});
  const auto& stats = std::get<PcaModel>(result.model).stats;
  for (std::size_t r = 0; r < 6; ++r) {
    EXPECT_NEAR(result.series.values[r], (data(r, 0) - stats.means[0]) / stats.std_devs[0], 1e-12);
  }
  ASSERT_TRUE(result.series.normalization);
  EXPECT_EQ(result.series.train().size(), 4u);
  EXPECT_EQ(result.series.test().size(), 2u);
}

TEST(EmbedSeries, ConstantSeries) {
  const Matrix data(10, 3, 2.5);
  const auto pca = embed_series(data, 8, {EmbeddingMethod::Pca, std::nullopt, {}});
  for (double v : pca.series.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(embed_series(data, 8, {EmbeddingMethod::Kpca, 0.1, {}}), DegenerateEmbedding);
}

TEST(EmbedSeries, KpcaNeedsGamma) {
  EXPECT_THROW(embed_series(Matrix{{1}, {2}, {3}, {4}}, 3, {EmbeddingMethod::Kpca, std::nullopt, {}}), InvalidInput);
}

TEST(EmbedSeries, FitsOnTrainingPrefixOnly) {
  Matrix data{{1, 2}, {2, 1}, {3, 5}, {4, 3}, {100, 200}};
  const auto full = embed_series(data, 4, {EmbeddingMethod::Pca, std::nullopt, {}});
  data(4, 0) = -50;
  const auto changed = embed_series(data, 4, {EmbeddingMethod::Pca, std::nullopt, {}});
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(full.series.values[r], changed.series.values[r]);
}

}  // namespace
}  // namespace ensfts
