#include "ensfts/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ensfts/error.hpp"
#include "ensfts/linalg.hpp"

namespace ensfts {

std::vector<double> StandardizationStats::apply(std::span<const double> point) const {
  if (point.size() != means.size()) {
    throw InvalidInput("point has " + std::to_string(point.size()) + " features, model expects " +
                       std::to_string(means.size()));
  }
  std::vector<double> out(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    out[j] = std_devs[j] > 0.0 ? (point[j] - means[j]) / std_devs[j] : 0.0;
  }
  return out;
}

Matrix StandardizationStats::apply(const Matrix& data) const {
  Matrix out(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto z = apply(data.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

std::pair<Matrix, StandardizationStats> standardize(const Matrix& data) {
  if (data.empty()) throw InvalidInput("cannot standardize an empty matrix");
  if (!data.all_finite()) throw InvalidInput("cannot standardize non-finite entries");
  const std::size_t n = data.rows();
  const std::size_t m = data.cols();

  StandardizationStats stats;
  stats.means.assign(m, 0.0);
  stats.std_devs.assign(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) stats.means[c] += data(r, c);
  }
  for (double& v : stats.means) v /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double d = data(r, c) - stats.means[c];
      stats.std_devs[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    const double sd = std::sqrt(stats.std_devs[c] / static_cast<double>(n));
    // Round-off spread on a constant column is treated as zero.
    stats.std_devs[c] = sd > 1e-12 * std::max(1.0, std::abs(stats.means[c])) ? sd : 0.0;
  }
  return {stats.apply(data), std::move(stats)};
}

PcaModel fit_pca(const Matrix& data, std::size_t components) {
  if (components != 1) throw InvalidInput("only a single retained component is supported");
  if (data.rows() < 2 || data.cols() < 1) throw InvalidInput("PCA needs at least 2 rows and 1 column");
  auto [z, stats] = standardize(data);
  const auto eig = sym_eigen(covariance_matrix(z));

  PcaModel model;
  model.stats = std::move(stats);
  model.component = eig.vectors.column(0);
  model.eigenvalue = std::max(eig.values[0], 0.0);
  canonicalize_sign(model.component);
  return model;
}

double project_pca(const PcaModel& model, std::span<const double> point) {
  const auto z = model.stats.apply(point);
  return dot(model.component, z);
}

double reconstruct_pca(const PcaModel& model, double score, std::size_t feature) {
  if (feature >= model.component.size()) throw InvalidInput("feature index out of range");
  return model.stats.means[feature] + model.stats.std_devs[feature] * score * model.component[feature];
}

Matrix rbf_kernel_matrix(const Matrix& a, const Matrix& b, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("RBF kernel coefficient must be positive");
  if (a.cols() != b.cols()) throw InvalidInput("kernel operands have different feature counts");
  const bool same = &a == &b;
  const std::size_t dims = a.cols();
  Matrix k(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    const std::size_t first = same ? i : 0;
    for (std::size_t j = first; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double d2 = 0.0;
      for (std::size_t c = 0; c < dims; ++c) {
        const double d = ai[c] - bj[c];
        d2 += d * d;
      }
      k(i, j) = std::exp(-gamma * d2);
      if (same) k(j, i) = k(i, j);
    }
  }
  return k;
}

namespace {

struct KernelMeans {
  std::vector<double> rows;
  std::vector<double> cols;
  double grand = 0.0;
};

KernelMeans kernel_means(const Matrix& k) {
  const std::size_t n = k.rows();
  KernelMeans m;
  m.rows.assign(n, 0.0);
  m.cols.assign(k.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = k.row(i);
    for (std::size_t j = 0; j < k.cols(); ++j) {
      m.rows[i] += row[j];
      m.cols[j] += row[j];
    }
  }
  for (double& v : m.rows) v /= static_cast<double>(k.cols());
  for (double& v : m.cols) v /= static_cast<double>(n);
  for (double v : m.rows) m.grand += v;
  m.grand /= static_cast<double>(n);
  return m;
}

}  // namespace

Matrix center_kernel(const Matrix& k) {
  if (!k.is_square() || k.empty()) throw InvalidInput("center_kernel needs a non-empty square matrix");
  const auto means = kernel_means(k);
  Matrix out(k.rows(), k.cols());
  for (std::size_t i = 0; i < k.rows(); ++i) {
    for (std::size_t j = 0; j < k.cols(); ++j) {
      out(i, j) = k(i, j) - means.cols[j] - means.rows[i] + means.grand;
    }
  }
  return out;
}

KpcaModel fit_kpca(const Matrix& data, double gamma, const KpcaOptions& options) {
  if (data.rows() < 3) throw InvalidInput("kernel PCA needs at least 3 rows");
  if (!(gamma > 0.0)) throw InvalidInput("RBF kernel coefficient must be positive");

  KpcaModel model;
  model.gamma = gamma;
  auto [z, stats] = standardize(data);
  model.stats = std::move(stats);

  if (options.max_training_points > 0 && z.rows() > options.max_training_points) {
    const std::size_t cap = std::max<std::size_t>(options.max_training_points, 3);
    std::vector<std::size_t> keep(cap);
    for (std::size_t i = 0; i < cap; ++i) keep[i] = i * z.rows() / cap;
    z = z.select_rows(keep);
  }
  model.training_points = std::move(z);

  const Matrix k = rbf_kernel_matrix(model.training_points, model.training_points, gamma);
  const auto means = kernel_means(k);
  model.train_kernel_row_means = means.rows;
  model.train_kernel_grand_mean = means.grand;
  const Matrix centered = center_kernel(k);

  EigenPair lead;
  if (centered.rows() <= options.dense_solver_limit) {
    auto eig = sym_eigen(centered);
    lead = {eig.values[0], eig.vectors.column(0)};
  } else {
    lead = leading_eigenpair(centered);
  }
  if (!(lead.value > 1e-12)) {
    throw DegenerateEmbedding("centered kernel has no positive eigenvalue; training points coincide in feature space");
  }
  model.lambda = lead.value;
  const double scale = 1.0 / std::sqrt(lead.value);
  model.alpha.resize(lead.vector.size());
  for (std::size_t i = 0; i < lead.vector.size(); ++i) model.alpha[i] = lead.vector[i] * scale;

  model.training_scores = centered * std::span<const double>(model.alpha);
  if (canonicalize_sign(model.training_scores)) {
    for (double& a : model.alpha) a = -a;
  }
  return model;
}

double project_kpca(const KpcaModel& model, std::span<const double> point) {
  const auto z = model.stats.apply(point);
  const std::size_t n = model.training_points.rows();
  std::vector<double> kx(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = model.training_points.row(i);
    double d2 = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
      const double d = z[c] - xi[c];
      d2 += d * d;
    }
    kx[i] = std::exp(-model.gamma * d2);
    mean += kx[i];
  }
  mean /= static_cast<double>(n);
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    score += model.alpha[i] * (kx[i] - mean - model.train_kernel_row_means[i] + model.train_kernel_grand_mean);
  }
  return score;
}

std::string to_string(EmbeddingMethod method) { return method == EmbeddingMethod::Pca ? "pca" : "kpca"; }

EmbeddingMethod parse_embedding_method(std::string_view text) {
  if (text == "pca") return EmbeddingMethod::Pca;
  if (text == "kpca") return EmbeddingMethod::Kpca;
  throw InvalidInput("unknown embedding method '" + std::string(text) + "' (expected pca or kpca)");
}

double project(const EmbeddingModel& model, std::span<const double> point) {
  return std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PcaModel>) {
          return project_pca(m, point);
        } else {
          return project_kpca(m, point);
        }
      },
      model);
}

double EmbeddedSeries::normalize(double v) const {
  if (!normalization) return v;
  const auto [lo, hi] = *normalization;
  const double range = hi > lo ? hi - lo : 1.0;
  return (v - lo) / range * 100.0;
}

std::vector<double> EmbeddedSeries::normalized() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = normalize(values[i]);
  return out;
}

EmbeddingResult embed_series(const Matrix& data, std::size_t train_size, const EmbeddingConfig& config) {
  if (train_size == 0 || train_size > data.rows()) throw InvalidInput("training prefix out of range");
  const Matrix train = data.row_block(0, train_size);

  EmbeddingResult result{{}, PcaModel{}};
  if (config.method == EmbeddingMethod::Pca) {
    result.model = fit_pca(train);
  } else {
    if (!config.gamma) throw InvalidInput("kernel PCA needs a kernel coefficient");
    result.model = fit_kpca(train, *config.gamma, config.kpca);
  }

  auto& series = result.series;
  series.source = config.method;
  series.train_size = train_size;
  series.values.resize(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) series.values[r] = project(result.model, data.row(r));
  const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.begin() + static_cast<std::ptrdiff_t>(train_size));
  series.normalization = std::pair{*lo, *hi};
  return result;
}

EmbeddingResult embed_series(const TimeSeriesFrame& frame, std::size_t train_size, const EmbeddingConfig& config) {
  return embed_series(frame.values, train_size, config);
}

}  // namespace ensfts
