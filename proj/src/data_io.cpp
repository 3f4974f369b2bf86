#include "ensfts/data_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ensfts/error.hpp"
#include "ensfts/log.hpp"

namespace ensfts {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc{} || ptr != text.data() + pos + len) {
    throw InvalidInput("malformed timestamp '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || text[16] != ':') {
    throw InvalidInput("timestamp '" + std::string(text) + "' is not in YYYY-MM-DD hh:mm:ss form");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_digits(text, 0, 4)}, month{static_cast<unsigned>(parse_digits(text, 5, 2))},
                           day{static_cast<unsigned>(parse_digits(text, 8, 2))}};
  const int hh = parse_digits(text, 11, 2);
  const int mm = parse_digits(text, 14, 2);
  const int ss = parse_digits(text, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw InvalidInput("invalid timestamp '" + std::string(text) + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto days = static_cast<int>(t >= 0 ? t / 86400 : (t - 86399) / 86400);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const auto secs = t - static_cast<Timestamp>(days) * 86400;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                static_cast<int>(secs % 3600 / 60), static_cast<int>(secs % 60));
  return buf;
}

std::optional<std::size_t> TimeSeriesFrame::column_index(std::string_view name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

TimeSeriesFrame TimeSeriesFrame::slice(std::size_t first, std::size_t count) const {
  TimeSeriesFrame out;
  out.column_names = column_names;
  out.target_column = target_column;
  out.values = values.row_block(first, count);
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

TimeSeriesFrame TimeSeriesFrame::without_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> keep;
  TimeSeriesFrame out;
  out.timestamps = timestamps;
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    if (std::find(names.begin(), names.end(), column_names[c]) != names.end()) continue;
    keep.push_back(c);
    out.column_names.push_back(column_names[c]);
  }
  out.values = values.select_columns(keep);
  if (target_column && out.column_index(*target_column)) out.target_column = target_column;
  return out;
}

namespace {

// Splits CSV text into records. Handles quoted fields with doubled quotes and
// both LF and CRLF line endings.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !record.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        field_started = false;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (quoted) throw IngestError("unterminated quoted field", records.size(), "");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

TimeSeriesFrame load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'", 0, "");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto records = parse_records(buffer.str());
  if (records.empty()) throw IngestError("'" + path.string() + "' has no header row", 0, "");

  const auto& header = records.front();
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) == name) return c;
    }
    return std::nullopt;
  };

  std::optional<std::size_t> ts_col;
  if (!options.timestamp_column.empty()) {
    ts_col = find(options.timestamp_column);
    if (!ts_col) throw InvalidInput("timestamp column '" + options.timestamp_column + "' not found in header");
  }
  std::vector<bool> skip(header.size(), false);
  for (const auto& name : options.drop_columns) {
    if (name == options.timestamp_column) {
      throw InvalidInput("'" + name + "' is the timestamp column; it is consumed as time, not dropped");
    }
    const auto c = find(name);
    if (!c) throw InvalidInput("drop column '" + name + "' not found in header");
    skip[*c] = true;
  }
  if (ts_col) skip[*ts_col] = true;

  TimeSeriesFrame frame;
  std::vector<std::size_t> numeric;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (skip[c]) continue;
    numeric.push_back(c);
    frame.column_names.emplace_back(trim(header[c]));
  }
  if (options.target_column) {
    if (!frame.column_index(*options.target_column)) {
      throw InvalidInput("target column '" + *options.target_column + "' is not a numeric column of the file");
    }
    frame.target_column = options.target_column;
  }

  const std::size_t n = records.size() - 1;
  std::vector<double> values;
  values.reserve(n * numeric.size());
  frame.timestamps.reserve(n);
  for (std::size_t r = 1; r <= n; ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw IngestError("row " + std::to_string(r) + " has " + std::to_string(rec.size()) + " fields, header has " +
                            std::to_string(header.size()),
                        r, "");
    }
    if (ts_col) {
      try {
        frame.timestamps.push_back(parse_timestamp(rec[*ts_col]));
      } catch (const InvalidInput& e) {
        throw IngestError("row " + std::to_string(r) + ": " + e.what(), r, options.timestamp_column);
      }
    } else {
      frame.timestamps.push_back(static_cast<Timestamp>(r - 1) * 600);
    }
    for (std::size_t c : numeric) {
      const auto cell = trim(rec[c]);
      const std::string& name = header[c];
      if (cell.empty()) {
        throw IngestError("missing value at row " + std::to_string(r) + ", column '" + name + "'", r, name);
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw IngestError("unparseable value '" + std::string(cell) + "' at row " + std::to_string(r) + ", column '" +
                              name + "'",
                          r, name);
      }
      values.push_back(v);
    }
  }
  frame.values = Matrix(n, numeric.size(), std::move(values));

  for (std::size_t r = 1; r < frame.timestamps.size(); ++r) {
    if (frame.timestamps[r] <= frame.timestamps[r - 1]) {
      log_warning("timestamps are not strictly increasing at row " + std::to_string(r + 1));
      break;
    }
  }
  return frame;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, ptr};
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path, const std::string& timestamp_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << quote_if_needed(timestamp_column);
  for (const auto& name : frame.column_names) out << ',' << quote_if_needed(name);
  out << '\n';
  for (std::size_t r = 0; r < frame.size(); ++r) {
    out << format_timestamp(frame.timestamps[r]);
    for (double v : frame.values.row(r)) out << ',' << format_real(v);
    out << '\n';
  }
}

SplitSizes split_sizes(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("train fraction must lie in (0, 1)");
  const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  if (train == 0 || train >= n) {
    throw InvalidInput("splitting " + std::to_string(n) + " points at " + std::to_string(fraction) +
                       " leaves an empty side");
  }
  return {train, n - train};
}

std::pair<TimeSeriesFrame, TimeSeriesFrame> split_train_test(const TimeSeriesFrame& frame, double fraction) {
  const auto sizes = split_sizes(frame.size(), fraction);
  return {frame.slice(0, sizes.train), frame.slice(sizes.train, sizes.test)};
}

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::MeanShift:
      return "mean_shift";
    case DriftKind::VarianceRamp:
      return "variance_ramp";
    case DriftKind::SineDrift:
      return "sine_drift";
  }
  return "unknown";
}

DriftKind parse_drift_kind(std::string_view text) {
  if (text == "mean_shift") return DriftKind::MeanShift;
  if (text == "variance_ramp") return DriftKind::VarianceRamp;
  if (text == "sine_drift") return DriftKind::SineDrift;
  throw InvalidInput("unknown drift kind '" + std::string(text) + "'");
}

std::vector<double> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.shift_at >= spec.length) throw InvalidInput("shift index must lie inside the series");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(spec.length);
  const double tail = static_cast<double>(spec.length - spec.shift_at);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double e = noise(rng);
    const bool after = t >= spec.shift_at;
    double v = spec.level;
    switch (spec.kind) {
      case DriftKind::MeanShift:
        v += spec.noise_std * e + (after ? spec.magnitude : 0.0);
        break;
      case DriftKind::VarianceRamp: {
        const double ramp = after ? static_cast<double>(t - spec.shift_at) / tail : 0.0;
        v += spec.noise_std * (1.0 + spec.magnitude * ramp) * e;
        break;
      }
      case DriftKind::SineDrift:
        v += spec.noise_std * e +
             (after ? spec.magnitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                static_cast<double>(spec.length))
                    : 0.0);
        break;
    }
    out[t] = v;
  }
  return out;
}

TimeSeriesFrame generate_sensor_frame(const SensorFrameSpec& spec) {
  if (spec.rows < 2 || spec.columns < 1) throw InvalidInput("sensor frame needs at least 2 rows and 1 column");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  constexpr std::size_t drivers = 3;
  // Per-column mixing weights, unit scale, offset, noise level.
  std::vector<std::array<double, drivers>> weights(spec.columns);
  std::vector<double> unit(spec.columns);
  std::vector<double> offset(spec.columns);
  std::vector<double> jitter(spec.columns);
  for (std::size_t c = 0; c < spec.columns; ++c) {
    for (auto& w : weights[c]) w = uni(rng);
    unit[c] = std::pow(10.0, 2.0 * uni(rng));
    offset[c] = 50.0 * uni(rng) * unit[c];
    jitter[c] = 0.05 + 0.1 * (uni(rng) + 1.0);
  }
  weights[0] = {0.6, 0.2, 1.0};
  unit[0] = 60.0;
  offset[0] = 100.0;

  TimeSeriesFrame frame;
  frame.values = Matrix(spec.rows, spec.columns);
  frame.timestamps.resize(spec.rows);
  double drift = 0.0;
  double regime = 0.0;
  for (std::size_t t = 0; t < spec.rows; ++t) {
    const double daily = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 144.0);
    drift += 0.01 * gauss(rng);
    regime = 0.97 * regime + 0.25 * gauss(rng);
    const std::array<double, drivers> latent{daily, drift, regime};
    for (std::size_t c = 0; c < spec.columns; ++c) {
      double v = 0.0;
      for (std::size_t d = 0; d < drivers; ++d) v += weights[c][d] * latent[d];
      frame.values(t, c) = offset[c] + unit[c] * (v + jitter[c] * gauss(rng));
    }
    frame.timestamps[t] = spec.start + static_cast<Timestamp>(t) * spec.cadence_seconds;
  }
  frame.column_names.push_back("target");
  for (std::size_t c = 1; c < spec.columns; ++c) frame.column_names.push_back("s" + std::to_string(c));
  frame.target_column = "target";
  return frame;
}

}  // namespace ensfts
