#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ensfts/data_io.hpp"
#include "ensfts/matrix.hpp"

namespace ensfts {

// Per-column z-score parameters learned on training data. Columns with zero
// spread map to 0 instead of raising.
struct StandardizationStats {
  std::vector<double> means;
  std::vector<double> std_devs;  // population standard deviation

  std::size_t features() const { return means.size(); }
  std::vector<double> apply(std::span<const double> point) const;
  Matrix apply(const Matrix& data) const;
};

std::pair<Matrix, StandardizationStats> standardize(const Matrix& data);

struct PcaModel {
  StandardizationStats stats;
  std::vector<double> component;  // unit eigenvector of the largest covariance eigenvalue
  double eigenvalue = 0.0;
  static constexpr std::size_t n_components = 1;
};

PcaModel fit_pca(const Matrix& data, std::size_t components = 1);
double project_pca(const PcaModel& model, std::span<const double> point);

// Inverse map of a PCA score back to the original units of one feature.
double reconstruct_pca(const PcaModel& model, double score, std::size_t feature);

// exp(-gamma * ||a_i - b_j||^2). Built row block by row block; memory is
// a.rows() * b.rows() doubles for the result alone.
Matrix rbf_kernel_matrix(const Matrix& a, const Matrix& b, double gamma);

// K - 1_N K - K 1_N + 1_N K 1_N with 1_N the all-(1/N) matrix.
Matrix center_kernel(const Matrix& k);

struct KpcaOptions {
  // Training rows beyond this are thinned by an even stride before the
  // kernel matrix is formed. 0 disables the cap.
  std::size_t max_training_points = 0;
  // Above this size the leading pair is found with Lanczos instead of a full
  // Jacobi decomposition.
  std::size_t dense_solver_limit = 256;
};

struct KpcaModel {
  StandardizationStats stats;
  Matrix training_points;  // standardized
  double gamma = 0.0;
  std::vector<double> alpha;  // scaled so that lambda * ||alpha||^2 = 1
  double lambda = 0.0;        // leading eigenvalue of the centered kernel
  std::vector<double> train_kernel_row_means;
  double train_kernel_grand_mean = 0.0;
  std::vector<double> training_scores;  // projections of training_points
};

// Throws InvalidInput for fewer than 3 rows or gamma <= 0 and
// DegenerateEmbedding when the leading centered-kernel eigenvalue is <= 1e-12.
KpcaModel fit_kpca(const Matrix& data, double gamma, const KpcaOptions& options = {});
double project_kpca(const KpcaModel& model, std::span<const double> point);

enum class EmbeddingMethod { Pca, Kpca };

std::string to_string(EmbeddingMethod method);
EmbeddingMethod parse_embedding_method(std::string_view text);

using EmbeddingModel = std::variant<PcaModel, KpcaModel>;

double project(const EmbeddingModel& model, std::span<const double> point);

struct EmbeddedSeries {
  std::vector<double> values;
  EmbeddingMethod source = EmbeddingMethod::Pca;
  std::size_t train_size = 0;
  // Training-portion extrema used to rescale to [0, 100].
  std::optional<std::pair<double, double>> normalization;

  std::span<const double> train() const { return std::span(values).first(train_size); }
  std::span<const double> test() const { return std::span(values).subspan(train_size); }
  double normalize(double v) const;
  std::vector<double> normalized() const;
};

struct EmbeddingConfig {
  EmbeddingMethod method = EmbeddingMethod::Pca;
  std::optional<double> gamma;
  KpcaOptions kpca;
};

struct EmbeddingResult {
  EmbeddedSeries series;
  EmbeddingModel model;
};

// Fits the embedding on rows [0, train_size) and projects every row.
EmbeddingResult embed_series(const Matrix& data, std::size_t train_size, const EmbeddingConfig& config);
EmbeddingResult embed_series(const TimeSeriesFrame& frame, std::size_t train_size, const EmbeddingConfig& config);

}  // namespace ensfts
