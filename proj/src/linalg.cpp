#include "ensfts/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ensfts/error.hpp"

namespace ensfts {

Matrix covariance_matrix(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t m = data.cols();
  if (n < 2) throw InvalidInput("covariance needs at least 2 rows, got " + std::to_string(n));

  std::vector<double> mean(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = data.row(r);
    for (std::size_t c = 0; c < m; ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(n);

  Matrix cov(m, m);
  std::vector<double> centered(m);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = data.row(r);
    for (std::size_t c = 0; c < m; ++c) centered[c] = row[c] - mean[c];
    for (std::size_t i = 0; i < m; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      for (std::size_t j = i; j < m; ++j) cov(i, j) += ci * centered[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += row[j] * row[j];
    }
  }
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& m, const JacobiOptions& options) {
  if (!m.is_square()) {
    throw InvalidInput("sym_eigen needs a square matrix, got " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()));
  }
  if (!m.is_symmetric(1e-9)) throw InvalidInput("sym_eigen needs a symmetric matrix");
  const std::size_t n = m.rows();

  Matrix a = m;
  // Row i of vt is the running i-th eigenvector estimate.
  Matrix vt = Matrix::identity(n);
  const double threshold = options.tolerance * frobenius_norm(m);

  int sweep = 0;
  for (;; ++sweep) {
    if (off_diagonal_norm(a) <= threshold) break;
    if (sweep >= options.max_sweeps) {
      throw NumericalFailure("Jacobi eigensolver did not converge in " + std::to_string(options.max_sweeps) +
                             " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Entry already below the precision of both diagonal terms.
        if (sweep > 3 && std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        auto row_p = a.row(p);
        auto row_q = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = row_p[k];
          const double akq = row_q[k];
          row_p[k] = akp - s * (akq + tau * akp);
          row_q[k] = akq + s * (akp - tau * akq);
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(k, p) = row_p[k];
          a(k, q) = row_q[k];
        }
        row_p[p] = app - t * apq;
        row_q[q] = aqq + t * apq;
        row_p[q] = 0.0;
        row_q[p] = 0.0;

        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = x - s * (y + tau * x);
          vq[k] = y + s * (x - tau * y);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  out.sweeps = sweep;
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    const auto v = vt.row(order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v[i];
  }
  return out;
}

namespace {

void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  for (double& x : v) x /= norm;
}

}  // namespace

EigenPair leading_eigenpair(const Matrix& m, double tolerance, int max_restarts) {
  if (!m.is_square()) throw InvalidInput("leading_eigenpair needs a square matrix");
  const std::size_t n = m.rows();
  if (n == 0) throw InvalidInput("leading_eigenpair needs a non-empty matrix");
  if (n <= 2) {
    auto eig = sym_eigen(m);
    return {eig.values[0], eig.vectors.column(0)};
  }

  const double scale = std::max(frobenius_norm(m), 1e-300);
  const std::size_t krylov = std::min<std::size_t>(n, 64);

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> start(n);
  for (double& x : start) x = uni(rng);
  normalize(start);

  EigenPair best;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    std::vector<std::vector<double>> basis{start};
    std::vector<double> alpha;
    std::vector<double> beta;
    for (std::size_t j = 0; j < krylov; ++j) {
      std::vector<double> w = m * basis[j];
      alpha.push_back(dot(w, basis[j]));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          const double proj = dot(w, b);
          for (std::size_t i = 0; i < n; ++i) w[i] -= proj * b[i];
        }
      }
      const double norm = std::sqrt(dot(w, w));
      if (j + 1 == krylov || norm <= 1e-14 * scale) break;
      beta.push_back(norm);
      for (double& x : w) x /= norm;
      basis.push_back(std::move(w));
    }

    const std::size_t k = alpha.size();
    Matrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
      }
    }
    const auto small = sym_eigen(t);
    std::vector<double> ritz(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double coef = small.vectors(j, 0);
      for (std::size_t i = 0; i < n; ++i) ritz[i] += coef * basis[j][i];
    }
    normalize(ritz);

    const std::vector<double> av = m * ritz;
    const double theta = dot(av, ritz);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (av[i] - theta * ritz[i]) * (av[i] - theta * ritz[i]);
    residual = std::sqrt(residual);

    best = {theta, ritz};
    if (residual <= tolerance * scale) return best;
    start = std::move(ritz);
  }
  throw NumericalFailure("Lanczos leading eigenpair did not converge in " + std::to_string(max_restarts) +
                         " restarts");
}

bool canonicalize_sign(std::vector<double>& v) {
  if (v.empty()) return false;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] >= 0.0) return false;
  for (double& x : v) x = -x;
  return true;
}

}  // namespace ensfts
