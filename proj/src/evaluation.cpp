#include "ensfts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "ensfts/error.hpp"
#include "ensfts/log.hpp"

namespace ensfts {

MetricSet compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw InvalidInput("cannot score an empty forecast");
  if (actual.size() != predicted.size()) {
    throw InvalidInput("actual/predicted length mismatch: " + std::to_string(actual.size()) + " vs " +
                       std::to_string(predicted.size()));
  }
  const auto n = static_cast<double>(actual.size());
  const double mean_actual = std::accumulate(actual.begin(), actual.end(), 0.0) / n;

  MetricSet m;
  m.count = actual.size();
  double sse = 0.0;
  double sae = 0.0;
  double sst = 0.0;
  double ape = 0.0;
  std::size_t ape_count = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sse += e * e;
    sae += std::abs(e);
    sst += (actual[i] - mean_actual) * (actual[i] - mean_actual);
    if (std::abs(actual[i]) > 1e-12) {
      ape += std::abs(e / actual[i]);
      ++ape_count;
    }
  }
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  m.mape_excluded = actual.size() - ape_count;
  m.mape = ape_count > 0 ? ape / static_cast<double>(ape_count) * 100.0 : 0.0;
  if (sst > 0.0) m.r2 = 1.0 - sse / sst;
  return m;
}

double skill_score(double metric_forecast, double metric_reference) {
  if (!(metric_reference > 0.0)) throw InvalidInput("reference metric must be positive for a skill score");
  return 1.0 - metric_forecast / metric_reference;
}

std::vector<double> persistence_forecast(std::span<const double> series) {
  if (series.size() < 2) throw InvalidInput("persistence needs at least 2 points");
  return {series.begin(), series.end() - 1};
}

WindowPlan plan_windows(std::size_t rows, const WindowSpec& spec, std::size_t residual_window) {
  if (spec.window_length == 0) throw InvalidInput("window length must be positive");
  if (rows < spec.window_length) {
    throw InvalidInput("series of " + std::to_string(rows) + " rows is shorter than one window of " +
                       std::to_string(spec.window_length));
  }
  const auto sizes = split_sizes(spec.window_length, spec.train_fraction);
  if (sizes.train < residual_window + 2) {
    throw InvalidInput("window training part of " + std::to_string(sizes.train) + " rows cannot hold w_e + 2 = " +
                       std::to_string(residual_window + 2));
  }
  WindowPlan plan;
  const std::size_t count = rows / spec.window_length;
  for (std::size_t w = 0; w < count; ++w) plan.windows.push_back({w * spec.window_length, sizes.train, sizes.test});
  plan.dropped_rows = rows - count * spec.window_length;
  return plan;
}

std::string to_string(EvalSpace space) { return space == EvalSpace::Normalized ? "normalized" : "reconstructed"; }

EvalSpace parse_eval_space(std::string_view text) {
  if (text == "normalized") return EvalSpace::Normalized;
  if (text == "reconstructed") return EvalSpace::Reconstructed;
  throw InvalidInput("unknown evaluation space '" + std::string(text) + "' (expected normalized or reconstructed)");
}

MetricSet mean_metrics(std::span<const MetricSet> sets) {
  MetricSet out;
  if (sets.empty()) return out;
  double r2 = 0.0;
  std::size_t r2_count = 0;
  for (const auto& s : sets) {
    out.rmse += s.rmse;
    out.mae += s.mae;
    out.mape += s.mape;
    out.count += s.count;
    out.mape_excluded += s.mape_excluded;
    if (s.r2) {
      r2 += *s.r2;
      ++r2_count;
    }
  }
  const auto n = static_cast<double>(sets.size());
  out.rmse /= n;
  out.mae /= n;
  out.mape /= n;
  if (r2_count > 0) out.r2 = r2 / static_cast<double>(r2_count);
  return out;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t worker) {
    for (std::size_t i = worker; i < count; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run, t);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct FeatureLayout {
  std::vector<std::size_t> columns;     // frame columns fed to the embedding
  std::optional<std::size_t> target;    // position of the target inside `columns`
  std::optional<std::size_t> target_frame_column;
};

FeatureLayout feature_layout(const TimeSeriesFrame& frame, const MethodConfig& config) {
  FeatureLayout layout;
  if (frame.target_column) {
    layout.target_frame_column = frame.column_index(*frame.target_column);
    if (!layout.target_frame_column) {
      throw InvalidInput("target column '" + *frame.target_column + "' is not in the frame");
    }
  }
  for (std::size_t c = 0; c < frame.width(); ++c) {
    if (config.exclude_target && layout.target_frame_column == c) continue;
    if (layout.target_frame_column == c) layout.target = layout.columns.size();
    layout.columns.push_back(c);
  }
  if (layout.columns.empty()) throw InvalidInput("no feature columns left to embed");
  if (config.space == EvalSpace::Reconstructed) {
    if (config.embedding.method != EmbeddingMethod::Pca) {
      throw InvalidInput("reconstructed evaluation is only defined for PCA embeddings");
    }
    if (!layout.target) throw InvalidInput("reconstructed evaluation needs the target column among the embedded features");
  }
  return layout;
}

struct EmbeddedWindow {
  WindowBounds bounds;
  EmbeddingResult embedding{{}, PcaModel{}};
};

std::vector<EmbeddedWindow> embed_windows(const TimeSeriesFrame& frame, const WindowPlan& plan,
                                          const FeatureLayout& layout, const EmbeddingConfig& config,
                                          std::size_t threads) {
  std::vector<EmbeddedWindow> out(plan.windows.size());
  parallel_for(plan.windows.size(), threads, [&](std::size_t w) {
    const auto& b = plan.windows[w];
    const Matrix block = frame.values.row_block(b.first_row, b.train_size + b.test_size).select_columns(layout.columns);
    out[w] = {b, embed_series(block, b.train_size, config)};
  });
  return out;
}

WindowResult score_window(const TimeSeriesFrame& frame, const FeatureLayout& layout, const EmbeddedWindow& window,
                          const MethodConfig& config, bool keep_series) {
  const auto& series = window.embedding.series;
  const auto train = series.train();
  const auto test = series.test();

  auto model = NsftsModel::train(train, config.nsfts);
  const auto raw = model.predict_series(train.back(), test, config.adapt_online);

  std::vector<double> actual(test.size());
  std::vector<double> forecast(test.size());
  std::vector<double> baseline(test.size());
  if (config.space == EvalSpace::Normalized) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      actual[i] = series.normalize(test[i]);
      forecast[i] = series.normalize(raw[i]);
      baseline[i] = series.normalize(i == 0 ? train.back() : test[i - 1]);
    }
  } else {
    const auto& pca = std::get<PcaModel>(window.embedding.model);
    const std::size_t first_test = window.bounds.first_row + window.bounds.train_size;
    for (std::size_t i = 0; i < test.size(); ++i) {
      actual[i] = frame.values(first_test + i, *layout.target_frame_column);
      baseline[i] = frame.values(first_test + i - 1, *layout.target_frame_column);
      forecast[i] = reconstruct_pca(pca, raw[i], *layout.target);
    }
  }

  WindowResult result;
  result.bounds = window.bounds;
  result.model = compute_metrics(actual, forecast);
  result.persistence = compute_metrics(actual, baseline);
  result.reorder_events = model.reorder_events();
  if (keep_series) {
    result.actual = std::move(actual);
    result.forecast = std::move(forecast);
    result.baseline = std::move(baseline);
  }
  return result;
}

std::vector<WindowResult> score_windows(const TimeSeriesFrame& frame, const FeatureLayout& layout,
                                        const std::vector<EmbeddedWindow>& windows, const MethodConfig& config,
                                        const EvalOptions& options) {
  std::vector<WindowResult> results(windows.size());
  parallel_for(windows.size(), options.threads, [&](std::size_t w) {
    results[w] = score_window(frame, layout, windows[w], config, options.keep_series);
    results[w].index = w;
  });
  return results;
}

std::vector<SkillEntry> skill_table(const std::vector<WindowResult>& windows, const MetricSet& aggregate,
                                    const MetricSet& persistence, const EvalOptions& options) {
  std::vector<SkillEntry> out;
  const auto add_persistence = [&](const std::string& metric, auto field) {
    SkillEntry e{"persistence", metric, 0.0, std::nullopt};
    if (persistence.*field > 0.0) e.from_aggregate = skill_score(aggregate.*field, persistence.*field);
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& w : windows) {
      if (w.persistence.*field > 0.0) {
        sum += skill_score(w.model.*field, w.persistence.*field);
        ++used;
      }
    }
    if (used > 0) e.window_mean = sum / static_cast<double>(used);
    out.push_back(std::move(e));
  };
  add_persistence("rmse", &MetricSet::rmse);
  add_persistence("mae", &MetricSet::mae);
  add_persistence("mape", &MetricSet::mape);
  for (const auto& ref : options.references) {
    out.push_back({ref.name, "rmse", skill_score(aggregate.rmse, ref.rmse), std::nullopt});
  }
  return out;
}

EvaluationReport assemble(const MethodConfig& config, const WindowSpec& spec, const WindowPlan& plan,
                          std::vector<WindowResult> results, const EvalOptions& options) {
  EvaluationReport report;
  report.config = config;
  report.spec = spec;
  report.dropped_rows = plan.dropped_rows;
  std::vector<MetricSet> model;
  std::vector<MetricSet> baseline;
  for (const auto& r : results) {
    model.push_back(r.model);
    baseline.push_back(r.persistence);
  }
  report.aggregate = mean_metrics(model);
  report.persistence_aggregate = mean_metrics(baseline);
  report.windows = std::move(results);
  report.skill = skill_table(report.windows, report.aggregate, report.persistence_aggregate, options);
  return report;
}

}  // namespace

EvaluationReport sliding_window_eval(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                     const MethodConfig& config, const EvalOptions& options) {
  validate(config.nsfts);
  const auto layout = feature_layout(frame, config);
  const auto plan = plan_windows(frame.size(), spec, config.nsfts.residual_window);
  if (plan.dropped_rows > 0) {
    log_info("dropping " + std::to_string(plan.dropped_rows) + " trailing rows beyond the last full window");
  }
  const auto embedded = embed_windows(frame, plan, layout, config.embedding, options.threads);
  auto results = score_windows(frame, layout, embedded, config, options);
  return assemble(config, spec, plan, std::move(results), options);
}

GridResult grid_search(const TimeSeriesFrame& frame, const ParameterGrid& grid, const WindowSpec& spec,
                       const MethodConfig& base, const EvalOptions& options) {
  const bool kernel = base.embedding.method == EmbeddingMethod::Kpca;
  std::vector<std::optional<double>> gammas;
  if (kernel) {
    for (double g : grid.gammas) gammas.emplace_back(g);
  } else {
    gammas.emplace_back(std::nullopt);
  }
  if (grid.kappas.empty() || grid.residual_windows.empty() || gammas.empty()) {
    throw InvalidInput("parameter grid has an empty axis");
  }

  const auto layout = feature_layout(frame, base);
  GridResult result;
  for (const auto& gamma : gammas) {
    MethodConfig config = base;
    if (gamma) config.embedding.gamma = gamma;

    // Embeddings depend only on the window split and gamma; reuse them across
    // the fuzzy parameters.
    std::vector<EmbeddedWindow> embedded;
    std::string embed_error;
    try {
      const auto plan = plan_windows(frame.size(), spec, 0);
      embedded = embed_windows(frame, plan, layout, config.embedding, options.threads);
    } catch (const std::exception& e) {
      embed_error = e.what();
    }

    for (int kappa : grid.kappas) {
      for (std::size_t we : grid.residual_windows) {
        GridRow row{kappa, we, gamma, false, embed_error, {}, std::nullopt};
        if (embed_error.empty()) {
          try {
            config.nsfts.kappa = kappa;
            config.nsfts.residual_window = we;
            validate(config.nsfts);
            const auto plan = plan_windows(frame.size(), spec, we);
            EvalOptions quiet = options;
            quiet.keep_series = false;
            const auto report = assemble(config, spec, plan, score_windows(frame, layout, embedded, config, quiet), quiet);
            row.ok = true;
            row.aggregate = report.aggregate;
            if (report.persistence_aggregate.rmse > 0.0) {
              row.skill_rmse = skill_score(report.aggregate.rmse, report.persistence_aggregate.rmse);
            }
          } catch (const std::exception& e) {
            row.error = e.what();
          }
        }
        result.rows.push_back(std::move(row));
      }
    }
  }

  std::stable_sort(result.rows.begin(), result.rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return false;
    if (a.aggregate.rmse != b.aggregate.rmse) return a.aggregate.rmse < b.aggregate.rmse;
    if (a.aggregate.mae != b.aggregate.mae) return a.aggregate.mae < b.aggregate.mae;
    return a.kappa < b.kappa;
  });
  if (!result.rows.empty() && result.rows.front().ok) result.best = 0;
  return result;
}

}  // namespace ensfts
