#include "ensfts/linalg.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ensfts/error.hpp"

namespace ensfts {
namespace {

Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = uni(rng);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

Matrix reconstruct(const EigenDecomposition& eig) {
  const std::size_t n = eig.values.size();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out(i, j) += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
    }
  }
  return out;
}

TEST(Covariance, HandComputedPerfectCorrelation) {
  const Matrix data{{1, 1}, {2, 2}, {3, 3}};
  const Matrix cov = covariance_matrix(data);
  EXPECT_EQ(cov, (Matrix{{1, 1}, {1, 1}}));
}

TEST(Covariance, ConstantColumnGivesZeroRowAndColumn) {
  const Matrix data{{1, 7, 4}, {2, 7, 1}, {5, 7, 0}, {3, 7, 2}};
  const Matrix cov = covariance_matrix(data);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(cov(1, i), 0.0);
    EXPECT_EQ(cov(i, 1), 0.0);
  }
  EXPECT_GT(cov(0, 0), 0.0);
}

TEST(Covariance, IdenticalColumnsHaveEqualEntries) {
  const Matrix data{{0.5, 0.5}, {-1.0, -1.0}, {2.5, 2.5}};
  const Matrix cov = covariance_matrix(data);
  EXPECT_DOUBLE_EQ(cov(0, 0), cov(0, 1));
  EXPECT_DOUBLE_EQ(cov(1, 1), cov(1, 0));
}

TEST(Covariance, RejectsSingleRow) { EXPECT_THROW(covariance_matrix(Matrix{{1, 2}}), InvalidInput); }

TEST(SymEigen, Diagonal) {
  const auto eig = sym_eigen(Matrix{{1, 0}, {0, 2}});
  EXPECT_EQ(eig.values, (std::vector<double>{2, 1}));
  EXPECT_EQ(std::abs(eig.vectors(1, 0)), 1.0);
  EXPECT_EQ(std::abs(eig.vectors(0, 1)), 1.0);
}

TEST(SymEigen, Identity) {
  const auto eig = sym_eigen(Matrix::identity(3));
  for (double v : eig.values) EXPECT_EQ(v, 1.0);
}

TEST(SymEigen, OffDiagonalSwap) {
  const auto eig = sym_eigen(Matrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(eig.values[0], 1.0, 1e-14);
  EXPECT_NEAR(eig.values[1], -1.0, 1e-14);
  const double r = 1.0 / std::numbers::sqrt2;
  EXPECT_NEAR(std::abs(eig.vectors(0, 0)), r, 1e-14);
  EXPECT_NEAR(eig.vectors(0, 0), eig.vectors(1, 0), 1e-14);
  EXPECT_NEAR(eig.vectors(0, 1), -eig.vectors(1, 1), 1e-14);
}

TEST(SymEigen, RejectsBadShapes) {
  EXPECT_THROW(sym_eigen(Matrix(2, 3)), InvalidInput);
  EXPECT_THROW(sym_eigen(Matrix{{1, 2}, {2.1, 1}}), InvalidInput);
}

TEST(SymEigen, SweepCapReportsNumericalFailure) {
  std::mt19937_64 rng(3);
  JacobiOptions opts;
  opts.max_sweeps = 1;
  EXPECT_THROW(sym_eigen(random_symmetric(rng, 8), opts), NumericalFailure);
}

TEST(SymEigen, RandomReconstructionAndOrthonormality) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix m = random_symmetric(rng, n);
      const auto eig = sym_eigen(m);
      EXPECT_LE(frobenius_norm(reconstruct(eig) - m), 1e-6);
      EXPECT_TRUE(std::is_sorted(eig.values.rbegin(), eig.values.rend()));
      for (std::size_t a = 0; a < n; ++a) {
        const auto va = eig.vectors.column(a);
        const auto mv = m * std::span<const double>(va);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(mv[i], eig.values[a] * va[i], 1e-7);
        for (std::size_t b = a; b < n; ++b) {
          EXPECT_NEAR(dot(va, eig.vectors.column(b)), a == b ? 1.0 : 0.0, 1e-7);
        }
      }
    }
  }
}

TEST(LeadingEigenpair, MatchesJacobiOnRandomPsdMatrices) {
  std::mt19937_64 rng(21);
  for (std::size_t n : {3, 10, 40, 90}) {
    const Matrix a = random_symmetric(rng, n);
    const Matrix psd = a * a;
    const auto eig = sym_eigen(psd);
    const auto lead = leading_eigenpair(psd);
    EXPECT_NEAR(lead.value, eig.values[0], 1e-9 * std::max(1.0, eig.values[0]));
    EXPECT_NEAR(std::abs(dot(lead.vector, eig.vectors.column(0))), 1.0, 1e-8);
  }
}

TEST(CanonicalizeSign, LargestMagnitudeBecomesPositive) {
  std::vector<double> v{0.1, -0.9, 0.3};
  EXPECT_TRUE(canonicalize_sign(v));
  EXPECT_EQ(v, (std::vector<double>{-0.1, 0.9, -0.3}));
  std::vector<double> tie{-0.5, 0.5};
  EXPECT_TRUE(canonicalize_sign(tie));
  EXPECT_EQ(tie[0], 0.5);
}

}  // namespace
}  // namespace ensfts
