#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ensfts/data_io.hpp"
#include "ensfts/error.hpp"
#include "ensfts/serialization.hpp"

namespace ensfts::cli {

namespace {

struct StageError : std::runtime_error {
  StageError(std::string stage_name, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage_name)) {}
  std::string stage;
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

CitedReference parse_reference(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("reference '" + text + "' must look like name=rmse");
  CitedReference ref{text.substr(0, eq), 0.0};
  const char* first = text.data() + eq + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, ref.rmse);
  if (ec != std::errc() || ptr != last || !(ref.rmse > 0.0)) {
    throw ConfigError("reference '" + text + "' needs a positive rmse");
  }
  return ref;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

TimeSeriesFrame load_input(const RunConfig& config) {
  return stage("ingest", [&] { return load_csv(config.input, csv_options(config)); });
}

// Features handed to the embedding by the embed and forecast subcommands.
TimeSeriesFrame feature_frame(const TimeSeriesFrame& frame, const RunConfig& config) {
  if (!config.exclude_target) return frame;
  const std::vector<std::string> names{config.target};
  return frame.without_columns(names);
}

void print_metrics(std::ostream& out, const std::string& label, const MetricSet& m) {
  out << label << ": rmse " << fixed(m.rmse) << "  mae " << fixed(m.mae) << "  mape " << fixed(m.mape) << "%  r2 "
      << fixed(m.r2) << '\n';
}

void add_input_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--input,-i", c.input, "CSV file with a timestamp column and numeric features")->required();
  cmd.add_option("--timestamp-column", c.timestamp_column, "timestamp column name; empty for none")
      ->capture_default_str();
  cmd.add_option("--drop-columns", c.drop_columns, "columns to ignore (comma separated)")->delimiter(',');
  cmd.add_option("--target", c.target, "target column name");
  cmd.add_option("--exclude-target", c.exclude_target, "leave the target out of the embedded features")
      ->capture_default_str();
}

void add_embedding_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--method", c.method, "pca or kpca")->capture_default_str();
  cmd.add_option("--gamma", c.gamma, "RBF kernel width for kpca")->capture_default_str();
  cmd.add_option("--kpca-max-points", c.kpca_max_points, "subsample cap for the kernel matrix; 0 = none")
      ->capture_default_str();
  cmd.add_option("--train-fraction", c.train_fraction, "share of each window used for training")
      ->capture_default_str();
}

void add_model_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--kappa", c.kappa, "number of fuzzy sets")->capture_default_str();
  cmd.add_option("--residual-window", c.residual_window, "residual window length w_e")->capture_default_str();
  cmd.add_option("--margin-ratio", c.margin_ratio, "universe margin ratio r")->capture_default_str();
  cmd.add_option("--perturbation", c.perturbation, "widening or literal")->capture_default_str();
  cmd.add_option("--adapt", c.adapt, "adapt the fuzzy sets online during the test phase")->capture_default_str();
  cmd.add_option("--eval-space", c.eval_space, "normalized or reconstructed")->capture_default_str();
  cmd.add_option("--seed", c.seed, "recorded in the report")->capture_default_str();
}

void add_window_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--window-length", c.window_length, "rows per evaluation window")->capture_default_str();
  cmd.add_option("--reference", c.references, "cited RMSE to compare against, name=rmse (repeatable)");
  cmd.add_option("--threads", c.threads, "worker threads; 0 = hardware concurrency")->capture_default_str();
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  validate(config);
  const auto frame = load_input(config);
  const auto report = stage("evaluation", [&] {
    return sliding_window_eval(frame, window_spec(config), method_config(config), eval_options(config));
  });
  stage("report", [&] {
    auto doc = ensfts::to_json(report);
    doc["run_config"] = to_json(config);
    write_json(config.report, doc);
    write_window_csv(config.windows_csv, report);
    return 0;
  });
  out << report.windows.size() << " windows (" << report.dropped_rows << " trailing rows dropped)\n";
  print_metrics(out, "model      ", report.aggregate);
  print_metrics(out, "persistence", report.persistence_aggregate);
  for (const auto& s : report.skill) {
    out << "skill " << s.metric << " vs " << s.reference << ": " << fixed(s.from_aggregate);
    if (s.window_mean) out << " (window mean " << fixed(*s.window_mean) << ")";
    out << '\n';
  }
  out << "report: " << config.report << "\nwindows: " << config.windows_csv << '\n';
  return kExitOk;
}

struct GridOptions {
  std::vector<int> kappas{5, 15, 30, 45, 60};
  std::vector<std::size_t> residual_windows{3, 4, 5};
  std::vector<double> gammas{0.1, 10, 0.5};
  std::string table = "grid.csv";
  std::string best_config = "best.ini";
};

int cmd_gridsearch(const RunConfig& config, const GridOptions& grid_opts, std::ostream& out) {
  // Grid axes are checked per combination; the remaining fields must be valid up front.
  RunConfig probe = config;
  probe.kappa = 5;
  probe.residual_window = 3;
  probe.gamma = 0.1;
  validate(probe);
  if (grid_opts.kappas.empty() || grid_opts.residual_windows.empty() ||
      (config.method == "kpca" && grid_opts.gammas.empty())) {
    throw ConfigError("grid axes must not be empty");
  }
  const auto frame = load_input(config);
  const ParameterGrid grid{grid_opts.kappas, grid_opts.residual_windows, grid_opts.gammas};
  const auto result = stage("gridsearch", [&] {
    return grid_search(frame, grid, window_spec(config), method_config(config), eval_options(config));
  });
  stage("report", [&] {
    write_grid_csv(grid_opts.table, result);
    auto doc = ensfts::to_json(result);
    doc["run_config"] = to_json(config);
    write_json(config.report, doc);
    if (result.best) {
      const auto& row = result.rows[*result.best];
      RunConfig best = config;
      best.kappa = row.kappa;
      best.residual_window = row.residual_window;
      if (row.gamma) best.gamma = *row.gamma;
      best.report = "report.json";
      best.windows_csv = "windows.csv";
      std::ofstream file(grid_opts.best_config, std::ios::binary);
      if (!file) throw Error("cannot write '" + grid_opts.best_config + "'");
      file << to_config_file(best, "evaluate");
    }
    return 0;
  });
  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.ok ? 0 : 1;
  out << result.rows.size() << " combinations, " << failed << " failed\n";
  if (result.best) {
    const auto& row = result.rows[*result.best];
    out << "best: kappa " << row.kappa << "  w_e " << row.residual_window;
    if (row.gamma) out << "  gamma " << format_real(*row.gamma);
    out << "  rmse " << fixed(row.aggregate.rmse) << '\n';
    out << "best config: " << grid_opts.best_config << '\n';
  }
  out << "table: " << grid_opts.table << "\nreport: " << config.report << '\n';
  return result.best ? kExitOk : kExitRuntime;
}

int cmd_embed(const RunConfig& config, const std::string& output, const std::string& save_model_path,
              std::ostream& out) {
  validate(config);
  const auto frame = load_input(config);
  const auto result = stage("embedding", [&] {
    const auto sizes = split_sizes(frame.size(), config.train_fraction);
    return embed_series(feature_frame(frame, config), sizes.train, method_config(config).embedding);
  });
  stage("report", [&] {
    std::ofstream file(output, std::ios::binary);
    if (!file) throw Error("cannot write '" + output + "'");
    file << "timestamp,embedding,normalized,part\n";
    const auto& s = result.series;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      file << format_timestamp(frame.timestamps[i]) << ',' << format_real(s.values[i]) << ','
           << format_real(s.normalize(s.values[i])) << ',' << (i < s.train_size ? "train" : "test") << '\n';
    }
    if (!save_model_path.empty()) {
      std::visit([&](const auto& m) { save_model(save_model_path, m); }, result.model);
    }
    return 0;
  });
  out << "embedded " << result.series.values.size() << " rows (" << result.series.train_size
      << " fitted) with " << config.method << " -> " << output << '\n';
  return kExitOk;
}

int cmd_forecast(const RunConfig& config, const std::string& output, const std::string& save_embedding,
                 const std::string& save_nsfts, std::ostream& out) {
  validate(config);
  const auto frame = load_input(config);
  const WindowSpec whole{frame.size(), config.train_fraction};
  EvalOptions options = eval_options(config);
  options.keep_series = true;
  const auto report = stage("forecast", [&] {
    return sliding_window_eval(frame, whole, method_config(config), options);
  });
  const auto& w = report.windows.front();
  stage("report", [&] {
    std::ofstream file(output, std::ios::binary);
    if (!file) throw Error("cannot write '" + output + "'");
    file << "timestamp,actual,forecast,persistence\n";
    for (std::size_t i = 0; i < w.actual.size(); ++i) {
      file << format_timestamp(frame.timestamps[w.bounds.train_size + i]) << ',' << format_real(w.actual[i]) << ','
           << format_real(w.forecast[i]) << ',' << format_real(w.baseline[i]) << '\n';
    }
    if (!config.report.empty()) {
      auto doc = ensfts::to_json(report);
      doc["run_config"] = to_json(config);
      write_json(config.report, doc);
    }
    return 0;
  });
  if (!save_embedding.empty() || !save_nsfts.empty()) {
    stage("model export", [&] {
      const auto mc = method_config(config);
      const auto embedded = embed_series(feature_frame(frame, config), w.bounds.train_size, mc.embedding);
      auto model = NsftsModel::train(embedded.series.train(), mc.nsfts);
      model.predict_series(embedded.series.train().back(), embedded.series.test(), mc.adapt_online);
      if (!save_embedding.empty()) std::visit([&](const auto& m) { save_model(save_embedding, m); }, embedded.model);
      if (!save_nsfts.empty()) save_model(save_nsfts, model);
      return 0;
    });
  }
  out << "train " << w.bounds.train_size << "  test " << w.bounds.test_size << '\n';
  print_metrics(out, "model      ", w.model);
  print_metrics(out, "persistence", w.persistence);
  out << "forecast: " << output << '\n';
  return kExitOk;
}

struct SynthOptions {
  std::string kind = "sensor";
  std::size_t length = 1000;
  std::size_t shift_at = 500;
  double magnitude = 3.0;
  double noise_std = 1.0;
  std::size_t columns = 26;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.kind == "sensor") {
    if (o.length < 2 || o.columns < 1) throw ConfigError("sensor frames need length >= 2 and columns >= 1");
    const auto frame = stage("synth", [&] { return generate_sensor_frame({o.length, o.columns, o.seed}); });
    stage("report", [&] {
      write_csv(frame, o.output);
      return 0;
    });
  } else {
    SyntheticSpec spec;
    try {
      spec.kind = parse_drift_kind(o.kind);
    } catch (const InvalidInput&) {
      throw ConfigError("kind must be sensor, mean_shift, variance_ramp or sine_drift");
    }
    spec.length = o.length;
    spec.shift_at = o.shift_at;
    spec.magnitude = o.magnitude;
    spec.noise_std = o.noise_std;
    spec.seed = o.seed;
    const auto series = stage("synth", [&] { return generate_synthetic(spec); });
    TimeSeriesFrame frame;
    frame.column_names = {"value"};
    frame.target_column = "value";
    frame.values = Matrix(series.size(), 1);
    const SensorFrameSpec clock;
    for (std::size_t i = 0; i < series.size(); ++i) {
      frame.timestamps.push_back(clock.start + static_cast<Timestamp>(i) * clock.cadence_seconds);
      frame.values(i, 0) = series[i];
    }
    stage("report", [&] {
      write_csv(frame, o.output);
      return 0;
    });
  }
  out << "wrote " << o.length << " rows of " << o.kind << " data -> " << o.output << '\n';
  return kExitOk;
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') q += '\\';
    q += ch;
  }
  return q + '"';
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("input path is required");
  if (c.method != "pca" && c.method != "kpca") throw ConfigError("method must be pca or kpca, got '" + c.method + "'");
  if (c.method == "kpca" && !(c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (c.kappa < 3) throw ConfigError("kappa must be at least 3, got " + std::to_string(c.kappa));
  if (c.residual_window < 1) throw ConfigError("residual-window must be at least 1");
  if (!(c.margin_ratio > 0.0 && c.margin_ratio < 1.0)) throw ConfigError("margin-ratio must lie in (0, 1)");
  if (c.perturbation != "widening" && c.perturbation != "literal") {
    throw ConfigError("perturbation must be widening or literal");
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("train-fraction must lie in (0, 1)");
  if (c.window_length < 2) throw ConfigError("window-length must be at least 2");
  if (c.eval_space != "normalized" && c.eval_space != "reconstructed") {
    throw ConfigError("eval-space must be normalized or reconstructed");
  }
  if (c.eval_space == "reconstructed") {
    if (c.method != "pca") throw ConfigError("eval-space reconstructed requires method pca");
    if (c.target.empty() || c.exclude_target) {
      throw ConfigError("eval-space reconstructed requires an embedded --target");
    }
  }
  if (c.exclude_target && c.target.empty()) throw ConfigError("exclude-target requires --target");
  if (!c.timestamp_column.empty()) {
    for (const auto& d : c.drop_columns) {
      if (d == c.timestamp_column) {
        throw ConfigError("'" + d + "' is the timestamp column; set --timestamp-column instead of dropping it");
      }
    }
  }
  for (const auto& r : c.references) parse_reference(r);
}

MethodConfig method_config(const RunConfig& c) {
  MethodConfig m;
  m.embedding.method = parse_embedding_method(c.method);
  if (m.embedding.method == EmbeddingMethod::Kpca) m.embedding.gamma = c.gamma;
  m.embedding.kpca.max_training_points = c.kpca_max_points;
  m.nsfts.kappa = c.kappa;
  m.nsfts.residual_window = c.residual_window;
  m.nsfts.margin_ratio = c.margin_ratio;
  m.nsfts.perturbation = parse_perturbation_form(c.perturbation);
  m.adapt_online = c.adapt;
  m.space = parse_eval_space(c.eval_space);
  m.exclude_target = c.exclude_target;
  return m;
}

CsvOptions csv_options(const RunConfig& c) {
  CsvOptions o;
  o.timestamp_column = c.timestamp_column;
  o.drop_columns = c.drop_columns;
  if (!c.target.empty()) o.target_column = c.target;
  return o;
}

EvalOptions eval_options(const RunConfig& c) {
  EvalOptions o;
  for (const auto& r : c.references) o.references.push_back(parse_reference(r));
  o.threads = c.threads;
  return o;
}

WindowSpec window_spec(const RunConfig& c) { return {c.window_length, c.train_fraction}; }

nlohmann::json to_json(const RunConfig& c) {
  return {{"input", c.input},
          {"timestamp_column", c.timestamp_column},
          {"drop_columns", c.drop_columns},
          {"target", c.target},
          {"exclude_target", c.exclude_target},
          {"method", c.method},
          {"gamma", c.gamma},
          {"kpca_max_points", c.kpca_max_points},
          {"kappa", c.kappa},
          {"residual_window", c.residual_window},
          {"margin_ratio", c.margin_ratio},
          {"perturbation", c.perturbation},
          {"window_length", c.window_length},
          {"train_fraction", c.train_fraction},
          {"adapt", c.adapt},
          {"eval_space", c.eval_space},
          {"references", c.references},
          {"threads", c.threads},
          {"seed", c.seed},
          {"report", c.report},
          {"windows_csv", c.windows_csv}};
}

std::string to_config_file(const RunConfig& c, const std::string& section) {
  std::ostringstream out;
  const auto list = [](const std::vector<std::string>& items) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + quote(items[i]);
    return s + "]";
  };
  out << '[' << section << "]\n"
      << "input=" << quote(c.input) << '\n'
      << "timestamp-column=" << quote(c.timestamp_column) << '\n';
  if (!c.drop_columns.empty()) out << "drop-columns=" << list(c.drop_columns) << '\n';
  if (!c.target.empty()) out << "target=" << quote(c.target) << '\n';
  out << "exclude-target=" << (c.exclude_target ? "true" : "false") << '\n'
      << "method=" << quote(c.method) << '\n'
      << "gamma=" << format_real(c.gamma) << '\n'
      << "kpca-max-points=" << c.kpca_max_points << '\n'
      << "kappa=" << c.kappa << '\n'
      << "residual-window=" << c.residual_window << '\n'
      << "margin-ratio=" << format_real(c.margin_ratio) << '\n'
      << "perturbation=" << quote(c.perturbation) << '\n'
      << "window-length=" << c.window_length << '\n'
      << "train-fraction=" << format_real(c.train_fraction) << '\n'
      << "adapt=" << (c.adapt ? "true" : "false") << '\n'
      << "eval-space=" << quote(c.eval_space) << '\n';
  if (!c.references.empty()) out << "reference=" << list(c.references) << '\n';
  out << "threads=" << c.threads << '\n'
      << "seed=" << c.seed << '\n'
      << "report=" << quote(c.report) << '\n'
      << "windows-csv=" << quote(c.windows_csv) << '\n';
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedded non-stationary fuzzy time series forecasting"};
  app.set_config("--config", "", "read options from a config file; command-line flags override it");
  app.require_subcommand(1);

  RunConfig eval_cfg;
  eval_cfg.report = "report.json";
  eval_cfg.windows_csv = "windows.csv";
  auto* evaluate = app.add_subcommand("evaluate", "sliding-window evaluation with report files");
  add_input_options(*evaluate, eval_cfg);
  add_embedding_options(*evaluate, eval_cfg);
  add_model_options(*evaluate, eval_cfg);
  add_window_options(*evaluate, eval_cfg);
  evaluate->add_option("--report", eval_cfg.report, "report JSON path")->capture_default_str();
  evaluate->add_option("--windows-csv", eval_cfg.windows_csv, "per-window CSV path")->capture_default_str();

  RunConfig grid_cfg;
  grid_cfg.report = "grid.json";
  GridOptions grid_opts;
  auto* gridsearch = app.add_subcommand("gridsearch", "rank parameter combinations by sliding-window RMSE");
  add_input_options(*gridsearch, grid_cfg);
  add_embedding_options(*gridsearch, grid_cfg);
  add_model_options(*gridsearch, grid_cfg);
  add_window_options(*gridsearch, grid_cfg);
  gridsearch->add_option("--kappas", grid_opts.kappas, "kappa values")->delimiter(',')->capture_default_str();
  gridsearch->add_option("--residual-windows", grid_opts.residual_windows, "w_e values")
      ->delimiter(',')
      ->capture_default_str();
  gridsearch->add_option("--gammas", grid_opts.gammas, "gamma values (kpca only)")
      ->delimiter(',')
      ->capture_default_str();
  gridsearch->add_option("--table", grid_opts.table, "ranked CSV table path")->capture_default_str();
  gridsearch->add_option("--report", grid_cfg.report, "grid JSON path")->capture_default_str();
  gridsearch->add_option("--best-config", grid_opts.best_config, "config file for the winning combination")
      ->capture_default_str();

  RunConfig embed_cfg;
  std::string embed_output;
  std::string embed_model;
  auto* embed = app.add_subcommand("embed", "dump the one-dimensional embedded series");
  add_input_options(*embed, embed_cfg);
  add_embedding_options(*embed, embed_cfg);
  embed->add_option("--output,-o", embed_output, "CSV path for the embedded series")->required();
  embed->add_option("--save-model", embed_model, "write the fitted embedding model as JSON");

  RunConfig forecast_cfg;
  std::string forecast_output;
  std::string save_embedding;
  std::string save_nsfts;
  auto* forecast = app.add_subcommand("forecast", "single train/test run over the whole file");
  add_input_options(*forecast, forecast_cfg);
  add_embedding_options(*forecast, forecast_cfg);
  add_model_options(*forecast, forecast_cfg);
  forecast->add_option("--threads", forecast_cfg.threads, "worker threads; 0 = hardware concurrency");
  forecast->add_option("--output,-o", forecast_output, "CSV path for actual, forecast and persistence")->required();
  forecast->add_option("--report", forecast_cfg.report, "optional report JSON path");
  forecast->add_option("--save-embedding", save_embedding, "write the fitted embedding model as JSON");
  forecast->add_option("--save-nsfts", save_nsfts, "write the adapted NSFTS model as JSON");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "write synthetic fixtures as CSV");
  synth->add_option("--kind", synth_opts.kind, "sensor, mean_shift, variance_ramp or sine_drift")
      ->capture_default_str();
  synth->add_option("--length", synth_opts.length, "rows")->capture_default_str();
  synth->add_option("--shift-at", synth_opts.shift_at, "first drifted row")->capture_default_str();
  synth->add_option("--magnitude", synth_opts.magnitude, "drift magnitude")->capture_default_str();
  synth->add_option("--noise-std", synth_opts.noise_std, "noise standard deviation")->capture_default_str();
  synth->add_option("--columns", synth_opts.columns, "columns of a sensor frame")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "random seed")->capture_default_str();
  synth->add_option("--output,-o", synth_opts.output, "CSV path")->required();

  std::vector<std::string> argv_storage{"ensfts"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(eval_cfg, out);
    if (gridsearch->parsed()) return cmd_gridsearch(grid_cfg, grid_opts, out);
    if (embed->parsed()) return cmd_embed(embed_cfg, embed_output, embed_model, out);
    if (forecast->parsed()) return cmd_forecast(forecast_cfg, forecast_output, save_embedding, save_nsfts, out);
    if (synth->parsed()) return cmd_synth(synth_opts, out);
  } catch (const ConfigError& e) {
    err << "ensfts: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StageError& e) {
    err << "ensfts: " << e.stage << " failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "ensfts: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ensfts::cli
