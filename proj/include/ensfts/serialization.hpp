#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <json.hpp>

#include "ensfts/embedding.hpp"
#include "ensfts/evaluation.hpp"
#include "ensfts/nsfts.hpp"

namespace ensfts {

// Model files are JSON documents:
//   {"format": "ensfts-model", "version": 1, "kind": "pca" | "kpca" | "nsfts", ...}
// Reals are written with shortest round-trip formatting, so a load returns the
// exact bit patterns that were saved.
inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<PcaModel, KpcaModel, NsftsModel>;

nlohmann::json to_json(const PcaModel& model);
nlohmann::json to_json(const KpcaModel& model);
nlohmann::json to_json(const NsftsModel& model);
nlohmann::json to_json(const AnyModel& model);

// Throws LoadError for a wrong format tag, unknown version or malformed body.
AnyModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

nlohmann::json to_json(const MetricSet& m);
nlohmann::json to_json(const MethodConfig& c);
nlohmann::json to_json(const WindowSpec& s);
nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const GridResult& grid);

// One line per window: index, rows, model metrics, persistence metrics.
void write_window_csv(const std::filesystem::path& path, const EvaluationReport& report);
// Ranked grid table.
void write_grid_csv(const std::filesystem::path& path, const GridResult& grid);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace ensfts
