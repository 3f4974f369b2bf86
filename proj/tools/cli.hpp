#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensfts/evaluation.hpp"

namespace ensfts::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Every flag of the run-producing subcommands. Config files use the same
// names as the long flags (see README).
struct RunConfig {
  std::string input;
  std::string timestamp_column = "date";
  std::vector<std::string> drop_columns;
  std::string target;
  bool exclude_target = false;
  std::string method = "kpca";
  double gamma = 0.1;
  std::size_t kpca_max_points = 0;
  int kappa = 5;
  std::size_t residual_window = 3;
  double margin_ratio = 0.1;
  std::string perturbation = "widening";
  std::size_t window_length = 657;
  double train_fraction = 0.75;
  bool adapt = true;
  std::string eval_space = "normalized";
  std::vector<std::string> references;  // "name=rmse"
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::string report;
  std::string windows_csv;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws ConfigError naming the first offending field.
void validate(const RunConfig& config);

MethodConfig method_config(const RunConfig& config);
CsvOptions csv_options(const RunConfig& config);
EvalOptions eval_options(const RunConfig& config);
WindowSpec window_spec(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
// Config-file text that reproduces `config` under the given subcommand section.
std::string to_config_file(const RunConfig& config, const std::string& section);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ensfts::cli
