#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ensfts/data_io.hpp"
#include "ensfts/embedding.hpp"
#include "ensfts/nsfts.hpp"

namespace ensfts {

struct MetricSet {
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;          // percent, over entries with |actual| > 1e-12
  std::optional<double> r2;   // empty when every actual is equal
  std::size_t count = 0;
  std::size_t mape_excluded = 0;
};

// Throws InvalidInput on empty or mismatched inputs.
MetricSet compute_metrics(std::span<const double> actual, std::span<const double> predicted);

// 1 - forecast / reference. Throws InvalidInput when reference <= 0.
double skill_score(double metric_forecast, double metric_reference);

// y_hat(t) = y(t-1) for t >= 1; the result has series.size() - 1 entries
// aligned with series[1..].
std::vector<double> persistence_forecast(std::span<const double> series);

struct WindowSpec {
  std::size_t window_length = 657;
  double train_fraction = 0.75;
};

struct WindowBounds {
  std::size_t first_row = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

struct WindowPlan {
  std::vector<WindowBounds> windows;
  std::size_t dropped_rows = 0;
};

// Consecutive non-overlapping windows; the trailing remainder is dropped.
// Throws InvalidInput when the frame is shorter than one window or a window's
// training part cannot hold w_e + 2 points.
WindowPlan plan_windows(std::size_t rows, const WindowSpec& spec, std::size_t residual_window);

enum class EvalSpace { Normalized, Reconstructed };

std::string to_string(EvalSpace space);
EvalSpace parse_eval_space(std::string_view text);

struct MethodConfig {
  EmbeddingConfig embedding;
  NsftsParams nsfts;
  bool adapt_online = true;
  EvalSpace space = EvalSpace::Normalized;
  // Leave the frame's target column out of the embedded features.
  bool exclude_target = false;
};

struct CitedReference {
  std::string name;
  double rmse = 0.0;
};

struct EvalOptions {
  // Published RMSE figures to compare against in addition to persistence.
  std::vector<CitedReference> references;
  // 0 = one worker per hardware thread.
  std::size_t threads = 0;
  bool keep_series = false;
};

struct WindowResult {
  std::size_t index = 0;
  WindowBounds bounds;
  MetricSet model;
  MetricSet persistence;
  std::size_t reorder_events = 0;
  // Filled only with EvalOptions::keep_series.
  std::vector<double> actual;
  std::vector<double> forecast;
  std::vector<double> baseline;
};

struct SkillEntry {
  std::string reference;
  std::string metric;
  // 1 - mean(metric_model) / mean(metric_reference)
  double from_aggregate = 0.0;
  // mean over windows of the per-window skill; absent for cited constants
  std::optional<double> window_mean;
};

struct EvaluationReport {
  MethodConfig config;
  WindowSpec spec;
  std::size_t dropped_rows = 0;
  std::vector<WindowResult> windows;
  MetricSet aggregate;
  MetricSet persistence_aggregate;
  std::vector<SkillEntry> skill;
};

// Unweighted mean of per-window metrics; r2 averages the windows where it is defined.
MetricSet mean_metrics(std::span<const MetricSet> sets);

EvaluationReport sliding_window_eval(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                     const MethodConfig& config, const EvalOptions& options = {});

struct ParameterGrid {
  std::vector<int> kappas{5, 15, 30, 45, 60};
  std::vector<std::size_t> residual_windows{3, 4, 5};
  std::vector<double> gammas{0.1, 10, 0.5};  // ignored for PCA
};

struct GridRow {
  int kappa = 0;
  std::size_t residual_window = 0;
  std::optional<double> gamma;
  bool ok = false;
  std::string error;
  MetricSet aggregate;
  std::optional<double> skill_rmse;  // vs persistence
};

struct GridResult {
  std::vector<GridRow> rows;  // ranked: successes by RMSE, MAE, kappa; failures last
  std::optional<std::size_t> best;
};

GridResult grid_search(const TimeSeriesFrame& frame, const ParameterGrid& grid, const WindowSpec& spec,
                       const MethodConfig& base, const EvalOptions& options = {});

}  // namespace ensfts
