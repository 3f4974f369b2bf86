#include "ensfts/serialization.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>

#include "ensfts/data_io.hpp"
#include "ensfts/error.hpp"

namespace ensfts {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  return std::filesystem::temp_directory_path() / ("ensfts_" + std::to_string(stamp) + "_" + name);
}

template <typename T>
T round_trip(const T& model) {
  const auto path = temp_file("model.json");
  save_model(path, model);
  auto loaded = std::get<T>(load_model(path));
  std::filesystem::remove(path);
  return loaded;
}

TEST(ModelFiles, PcaAndKpcaProjectIdentically) {
  const auto frame = generate_sensor_frame({80, 6, 3});
  const auto pca = fit_pca(frame.values);
  const auto kpca = fit_kpca(frame.values, 0.1);
  const auto pca2 = round_trip(pca);
  const auto kpca2 = round_trip(kpca);
  for (std::size_t r = 0; r < frame.size(); ++r) {
    EXPECT_EQ(project_pca(pca, frame.values.row(r)), project_pca(pca2, frame.values.row(r)));
    EXPECT_EQ(project_kpca(kpca, frame.values.row(r)), project_kpca(kpca2, frame.values.row(r)));
  }
}

TEST(ModelFiles, NsftsForecastsBitIdenticalAfterAdaptation) {
  const auto s = generate_synthetic({300, DriftKind::MeanShift, 200, 3.0, 12});
  auto model = NsftsModel::train(std::span(s).first(150), {});
  model.predict_series(s[149], std::span(s).subspan(150, 60), true);  // perturbs the sets
  auto copy = round_trip(model);
  EXPECT_EQ(copy.rules(), model.rules());
  EXPECT_EQ(copy.residuals().entries(), model.residuals().entries());
  const auto tail = std::span(s).subspan(210);
  EXPECT_EQ(model.predict_series(s[209], tail, true), copy.predict_series(s[209], tail, true));
}

TEST(ModelFiles, TruncatedFileIsLoadError) {
  const auto s = generate_synthetic({50, DriftKind::MeanShift, 10, 0.0, 1});
  const auto path = temp_file("trunc.json");
  save_model(path, NsftsModel::train(s, {}));
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size / 2);
  EXPECT_THROW(load_model(path), LoadError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), LoadError);
}

TEST(ModelFiles, UnknownVersionNamed) {
  auto doc = to_json(fit_pca(Matrix{{1, 2}, {2, 1}, {3, 3}}));
  doc["version"] = 7;
  try {
    model_from_json(doc);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("version 7"), std::string::npos);
  }
  doc["version"] = kModelFormatVersion;
  doc["kind"] = "lstm";
  EXPECT_THROW(model_from_json(doc), LoadError);
}

TEST(Reports, JsonAndCsvShapes) {
  const auto frame = generate_sensor_frame({300, 5, 2});
  MethodConfig config;
  const auto report = sliding_window_eval(frame, {100, 0.75}, config);
  const auto j = to_json(report);
  EXPECT_EQ(j["window_count"], 3);
  EXPECT_EQ(j["per_window"].size(), 3u);
  EXPECT_EQ(j["config"]["method"], "pca");
  EXPECT_EQ(j["aggregate"]["rmse"].get<double>(), report.aggregate.rmse);

  const auto path = temp_file("windows.csv");
  write_window_csv(path, report);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ensfts
