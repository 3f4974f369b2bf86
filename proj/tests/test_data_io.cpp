#include "ensfts/data_io.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ensfts/error.hpp"

namespace ensfts {
namespace {

class TempDir {
 public:
  TempDir() {
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() / ("ensfts_io_" + std::to_string(stamp));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path file(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

const char* kSample =
    "\"date\",\"Appliances\",\"lights\",\"T1\",\"rv1\"\n"
    "\"2016-01-11 17:00:00\",60,30,19.89,13.275433157104\n"
    "\"2016-01-11 17:10:00\",60,30,19.89,18.606194981839\n"
    "\"2016-01-11 17:20:00\",50,30,19.89,28.6426681627333\n";

TEST(Timestamp, RoundTrip) {
  const auto t = parse_timestamp("2016-01-11 17:00:00");
  EXPECT_EQ(t, 1452531600);
  EXPECT_EQ(format_timestamp(t), "2016-01-11 17:00:00");
  EXPECT_EQ(parse_timestamp("2016-05-27 18:00:00") - t, 137 * 86400 + 3600);
  EXPECT_THROW(parse_timestamp("2016/01/11 17:00"), InvalidInput);
  EXPECT_THROW(parse_timestamp("2016-02-30 00:00:00"), InvalidInput);
}

TEST(LoadCsv, QuotedAppliancesLayout) {
  TempDir dir;
  const auto frame = load_csv(dir.file("a.csv", kSample), {"date", {"rv1"}, "Appliances"});
  EXPECT_EQ(frame.size(), 3u);
  EXPECT_EQ(frame.column_names, (std::vector<std::string>{"Appliances", "lights", "T1"}));
  EXPECT_EQ(frame.values(2, 0), 50.0);
  EXPECT_EQ(frame.values(1, 2), 19.89);
  EXPECT_EQ(frame.timestamps[1] - frame.timestamps[0], 600);
  EXPECT_EQ(frame.target_column, "Appliances");
}

TEST(LoadCsv, BadCellNamesRowAndColumn) {
  TempDir dir;
  const auto p = dir.file("bad.csv", "date,a,b\n2016-01-11 17:00:00,1,2\n2016-01-11 17:10:00,3,x7\n");
  try {
    load_csv(p);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "b");
    EXPECT_NE(std::string(e.what()).find("x7"), std::string::npos);
  }
}

TEST(LoadCsv, MissingValueRejected) {
  TempDir dir;
  const auto p = dir.file("gap.csv", "date,a,b\n2016-01-11 17:00:00,1,\n");
  EXPECT_THROW(load_csv(p), IngestError);
}

TEST(LoadCsv, DroppingTheTimestampIsMisuse) {
  TempDir dir;
  EXPECT_THROW(load_csv(dir.file("a.csv", kSample), {"date", {"date"}, std::nullopt}), InvalidInput);
  EXPECT_THROW(load_csv(dir.file("b.csv", kSample), {"date", {"nope"}, std::nullopt}), InvalidInput);
  EXPECT_THROW(load_csv(dir.file("c.csv", kSample), {"time", {}, std::nullopt}), InvalidInput);
}

TEST(LoadCsv, MissingFileIsIngestError) {
  EXPECT_THROW(load_csv("/nonexistent/ensfts.csv"), IngestError);
}

TEST(LoadCsv, NonMonotonicTimestampsOnlyWarn) {
  TempDir dir;
  const auto p = dir.file("order.csv", "date,a\n2016-01-11 17:10:00,1\n2016-01-11 17:00:00,2\n");
  const auto frame = load_csv(p);
  EXPECT_EQ(frame.size(), 2u);
  EXPECT_EQ(frame.values(1, 0), 2.0);
}

TEST(LoadCsv, WriteThenLoadIsLossless) {
  TempDir dir;
  const auto original = generate_sensor_frame({50, 5, 77});
  const auto p = dir.path() / "frame.csv";
  write_csv(original, p);
  const auto loaded = load_csv(p);
  EXPECT_EQ(loaded.values, original.values);
  EXPECT_EQ(loaded.timestamps, original.timestamps);
  EXPECT_EQ(loaded.column_names, original.column_names);
}

TEST(Split, FloorArithmetic) {
  EXPECT_EQ(split_sizes(8, 0.75).train, 6u);
  EXPECT_EQ(split_sizes(8, 0.75).test, 2u);
  EXPECT_EQ(split_sizes(657, 0.75).train, 492u);
  EXPECT_EQ(split_sizes(657, 0.75).test, 165u);
  EXPECT_EQ(split_sizes(2, 0.999).test, 1u);
  EXPECT_THROW(split_sizes(2, 0.4), InvalidInput);
  EXPECT_THROW(split_sizes(10, 1.0), InvalidInput);
}

TEST(Split, ContiguousDisjointCover) {
  std::vector<double> s(37);
  std::iota(s.begin(), s.end(), 0.0);
  const auto [train, test] = split_train_test(std::span<const double>(s), 0.7);
  EXPECT_EQ(train.size() + test.size(), s.size());
  EXPECT_EQ(train.back() + 1.0, test.front());
  const auto frame = generate_sensor_frame({20, 2, 0});
  const auto [a, b] = split_train_test(frame, 0.75);
  EXPECT_EQ(a.size(), 15u);
  EXPECT_EQ(b.values(0, 1), frame.values(15, 1));
}

TEST(Synthetic, StationaryWithoutMagnitude) {
  const auto s = generate_synthetic({2000, DriftKind::MeanShift, 1000, 0.0, 4});
  const double first = std::accumulate(s.begin(), s.begin() + 1000, 0.0) / 1000.0;
  const double second = std::accumulate(s.begin() + 1000, s.end(), 0.0) / 1000.0;
  EXPECT_NEAR(first - second, 0.0, 0.2);
}

TEST(Synthetic, SameSeedSameSeries) {
  const SyntheticSpec spec{300, DriftKind::SineDrift, 10, 2.0, 99};
  EXPECT_EQ(generate_synthetic(spec), generate_synthetic(spec));
  EXPECT_EQ(generate_sensor_frame({30, 4, 5}).values, generate_sensor_frame({30, 4, 5}).values);
}

TEST(Synthetic, MeanShiftMagnitude) {
  const auto s = generate_synthetic({4000, DriftKind::MeanShift, 2000, 5.0, 6});
  const double first = std::accumulate(s.begin(), s.begin() + 2000, 0.0) / 2000.0;
  const double second = std::accumulate(s.begin() + 2000, s.end(), 0.0) / 2000.0;
  // 4 standard errors of a difference of two 2000-sample means.
  EXPECT_NEAR(second - first, 5.0, 4.0 * std::sqrt(2.0 / 2000.0));
  EXPECT_THROW(generate_synthetic({10, DriftKind::MeanShift, 10, 1.0, 0}), InvalidInput);
}

TEST(Synthetic, VarianceRampWidensTail) {
  const auto s = generate_synthetic({2000, DriftKind::VarianceRamp, 1000, 3.0, 2});
  auto spread = [&](std::size_t a, std::size_t b) {
    double m = 0.0;
    for (std::size_t i = a; i < b; ++i) m += s[i];
    m /= static_cast<double>(b - a);
    double v = 0.0;
    for (std::size_t i = a; i < b; ++i) v += (s[i] - m) * (s[i] - m);
    return std::sqrt(v / static_cast<double>(b - a));
  };
  EXPECT_GT(spread(1800, 2000), 2.0 * spread(0, 1000));
}

}  // namespace
}  // namespace ensfts
