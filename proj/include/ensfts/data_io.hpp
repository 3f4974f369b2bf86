#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ensfts/matrix.hpp"

namespace ensfts {

// Seconds since the Unix epoch, UTC. The date column orders rows and labels
// reports; models are index-based.
using Timestamp = std::int64_t;

Timestamp parse_timestamp(std::string_view text);  // "YYYY-MM-DD hh:mm:ss"
std::string format_timestamp(Timestamp t);

struct TimeSeriesFrame {
  std::vector<Timestamp> timestamps;
  std::vector<std::string> column_names;
  Matrix values;  // rows x columns
  std::optional<std::string> target_column;

  std::size_t size() const { return values.rows(); }
  std::size_t width() const { return values.cols(); }
  std::optional<std::size_t> column_index(std::string_view name) const;

  // Rows [first, first + count) with the same columns and target.
  TimeSeriesFrame slice(std::size_t first, std::size_t count) const;
  // Same rows without the named columns.
  TimeSeriesFrame without_columns(std::span<const std::string> names) const;
};

struct CsvOptions {
  std::string timestamp_column = "date";
  std::vector<std::string> drop_columns;
  std::optional<std::string> target_column;
};

// Reads a comma-separated file with a header row. Quoted fields are accepted.
// Every non-timestamp, non-dropped column must parse as a finite real.
// Throws IngestError naming the row/column of the first bad or missing cell,
// InvalidInput when drop_columns names the timestamp column or an unknown
// column. Non-increasing timestamps only produce a warning.
TimeSeriesFrame load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// Writes the frame back with shortest round-trip number formatting.
void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path,
               const std::string& timestamp_column = "date");

std::string format_real(double value);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t test = 0;
};

// Contiguous prefix/suffix split with train = floor(n * fraction).
// Throws InvalidInput if fraction is outside (0, 1) or either side is empty.
SplitSizes split_sizes(std::size_t n, double fraction);

template <typename T>
std::pair<std::span<const T>, std::span<const T>> split_train_test(std::span<const T> series, double fraction) {
  const auto sizes = split_sizes(series.size(), fraction);
  return {series.first(sizes.train), series.subspan(sizes.train)};
}

std::pair<TimeSeriesFrame, TimeSeriesFrame> split_train_test(const TimeSeriesFrame& frame, double fraction);

enum class DriftKind { MeanShift, VarianceRamp, SineDrift };

std::string to_string(DriftKind kind);
DriftKind parse_drift_kind(std::string_view text);

struct SyntheticSpec {
  std::size_t length = 500;
  DriftKind kind = DriftKind::MeanShift;
  std::size_t shift_at = 250;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  double noise_std = 1.0;
  double level = 0.0;
};

// Univariate drift fixture, deterministic for a given seed.
//  mean_shift:    level + noise, plus magnitude for every index >= shift_at
//  variance_ramp: noise std grows linearly from noise_std to
//                 noise_std * (1 + magnitude) starting at shift_at
//  sine_drift:    level + noise + magnitude * sin(2*pi*t / length) from shift_at on
std::vector<double> generate_synthetic(const SyntheticSpec& spec);

struct SensorFrameSpec {
  std::size_t rows = 1000;
  std::size_t columns = 26;
  std::uint64_t seed = 0;
  Timestamp start = 1452531600;  // 2016-01-11 17:00:00
  std::int64_t cadence_seconds = 600;
};

// Multivariate sensor-like frame: a few latent drivers (daily cycle, slow
// drift, AR(1) regime noise) mixed into heterogeneous-unit columns. Column 0
// is named "target" and set as the target column.
TimeSeriesFrame generate_sensor_frame(const SensorFrameSpec& spec);

}  // namespace ensfts
