#include "ensfts/serialization.hpp"

#include <fstream>
#include <sstream>

#include "ensfts/error.hpp"

namespace ensfts {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "ensfts-model";

json header(const char* kind) { return {{"format", kFormatTag}, {"version", kModelFormatVersion}, {"kind", kind}}; }

json stats_json(const StandardizationStats& s) { return {{"means", s.means}, {"std_devs", s.std_devs}}; }

StandardizationStats stats_from(const json& j) {
  StandardizationStats s;
  j.at("means").get_to(s.means);
  j.at("std_devs").get_to(s.std_devs);
  if (s.means.size() != s.std_devs.size()) throw LoadError("standardization arrays differ in length");
  return s;
}

json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const PcaModel& model) {
  json j = header("pca");
  j["stats"] = stats_json(model.stats);
  j["component"] = model.component;
  j["eigenvalue"] = model.eigenvalue;
  return j;
}

json to_json(const KpcaModel& model) {
  json j = header("kpca");
  j["stats"] = stats_json(model.stats);
  j["gamma"] = model.gamma;
  j["training_points"] = {{"rows", model.training_points.rows()},
                          {"cols", model.training_points.cols()},
                          {"values", std::vector<double>(model.training_points.entries().begin(),
                                                         model.training_points.entries().end())}};
  j["alpha"] = model.alpha;
  j["lambda"] = model.lambda;
  j["train_kernel_row_means"] = model.train_kernel_row_means;
  j["train_kernel_grand_mean"] = model.train_kernel_grand_mean;
  j["training_scores"] = model.training_scores;
  return j;
}

json to_json(const NsftsModel& model) {
  json j = header("nsfts");
  const auto& p = model.params();
  j["params"] = {{"kappa", p.kappa},
                 {"residual_window", p.residual_window},
                 {"margin_ratio", p.margin_ratio},
                 {"perturbation", to_string(p.perturbation)},
                 {"order", NsftsModel::order}};
  j["universe"] = {{"lb", model.universe().lb}, {"ub", model.universe().ub}, {"margin_ratio", model.universe().margin_ratio}};
  json sets = json::array();
  for (const auto& s : model.sets()) {
    sets.push_back({{"index", s.index},
                    {"label", s.label},
                    {"l", s.lower},
                    {"c", s.peak},
                    {"u", s.upper},
                    {"delta", s.displacement},
                    {"rho", s.scale}});
  }
  j["sets"] = std::move(sets);
  json rules = json::array();
  for (const auto& r : model.rules()) rules.push_back({{"precedent", r.precedent}, {"consequents", r.consequents}});
  j["rules"] = std::move(rules);
  j["residuals"] = model.residuals().entries();
  j["reorder_events"] = model.reorder_events();
  return j;
}

json to_json(const AnyModel& model) {
  return std::visit([](const auto& m) { return to_json(m); }, model);
}

AnyModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormatTag) throw LoadError("not an ensfts model document");
    const auto& version = doc.at("version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
      throw LoadError("unsupported model format version " + version.dump() + " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "pca") {
      PcaModel m;
      m.stats = stats_from(doc.at("stats"));
      doc.at("component").get_to(m.component);
      m.eigenvalue = doc.at("eigenvalue").get<double>();
      if (m.component.size() != m.stats.features()) throw LoadError("component length does not match feature count");
      return m;
    }
    if (kind == "kpca") {
      KpcaModel m;
      m.stats = stats_from(doc.at("stats"));
      m.gamma = doc.at("gamma").get<double>();
      const auto& tp = doc.at("training_points");
      m.training_points = Matrix(tp.at("rows").get<std::size_t>(), tp.at("cols").get<std::size_t>(),
                                 tp.at("values").get<std::vector<double>>());
      doc.at("alpha").get_to(m.alpha);
      m.lambda = doc.at("lambda").get<double>();
      doc.at("train_kernel_row_means").get_to(m.train_kernel_row_means);
      m.train_kernel_grand_mean = doc.at("train_kernel_grand_mean").get<double>();
      doc.at("training_scores").get_to(m.training_scores);
      const std::size_t n = m.training_points.rows();
      if (m.alpha.size() != n || m.train_kernel_row_means.size() != n ||
          m.training_points.cols() != m.stats.features()) {
        throw LoadError("kernel PCA arrays are inconsistent with the training point count");
      }
      return m;
    }
    if (kind == "nsfts") {
      const auto& jp = doc.at("params");
      NsftsParams p;
      p.kappa = jp.at("kappa").get<int>();
      p.residual_window = jp.at("residual_window").get<std::size_t>();
      p.margin_ratio = jp.at("margin_ratio").get<double>();
      p.perturbation = parse_perturbation_form(jp.at("perturbation").get<std::string>());
      const auto& ju = doc.at("universe");
      const Universe u{ju.at("lb").get<double>(), ju.at("ub").get<double>(), ju.at("margin_ratio").get<double>()};
      std::vector<FuzzySet> sets;
      for (const auto& js : doc.at("sets")) {
        FuzzySet s;
        s.index = js.at("index").get<int>();
        s.label = js.at("label").get<std::string>();
        s.lower = js.at("l").get<double>();
        s.peak = js.at("c").get<double>();
        s.upper = js.at("u").get<double>();
        s.displacement = js.at("delta").get<double>();
        s.scale = js.at("rho").get<double>();
        sets.push_back(std::move(s));
      }
      std::vector<Rule> rules;
      for (const auto& jr : doc.at("rules")) {
        rules.push_back({jr.at("precedent").get<int>(), jr.at("consequents").get<std::vector<int>>()});
      }
      const auto residuals = doc.at("residuals").get<std::vector<double>>();
      return NsftsModel::from_state(p, u, std::move(sets), rules, residuals,
                                    doc.at("reorder_events").get<std::size_t>());
    }
    throw LoadError("unknown model kind '" + kind + "'");
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(std::string("malformed model document: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void save_model(const std::filesystem::path& path, const AnyModel& model) { write_json(path, to_json(model)); }

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("model file '" + path.string() + "' is not valid JSON (truncated?): " + e.what());
  }
  return model_from_json(doc);
}

json to_json(const MetricSet& m) {
  return {{"rmse", m.rmse},
          {"mae", m.mae},
          {"mape", m.mape},
          {"r2", optional_real(m.r2)},
          {"count", m.count},
          {"mape_excluded", m.mape_excluded}};
}

json to_json(const MethodConfig& c) {
  return {{"method", to_string(c.embedding.method)},
          {"gamma", optional_real(c.embedding.gamma)},
          {"kpca_max_training_points", c.embedding.kpca.max_training_points},
          {"kappa", c.nsfts.kappa},
          {"residual_window", c.nsfts.residual_window},
          {"margin_ratio", c.nsfts.margin_ratio},
          {"perturbation", to_string(c.nsfts.perturbation)},
          {"adapt_online", c.adapt_online},
          {"eval_space", to_string(c.space)},
          {"exclude_target", c.exclude_target}};
}

json to_json(const WindowSpec& s) {
  return {{"window_length", s.window_length}, {"train_fraction", s.train_fraction}};
}

json to_json(const EvaluationReport& report) {
  json windows = json::array();
  for (const auto& w : report.windows) {
    json jw = {{"index", w.index},
               {"first_row", w.bounds.first_row},
               {"train_size", w.bounds.train_size},
               {"test_size", w.bounds.test_size},
               {"model", to_json(w.model)},
               {"persistence", to_json(w.persistence)},
               {"reorder_events", w.reorder_events}};
    windows.push_back(std::move(jw));
  }
  json skill = json::array();
  for (const auto& s : report.skill) {
    skill.push_back({{"reference", s.reference},
                     {"metric", s.metric},
                     {"from_aggregate", s.from_aggregate},
                     {"window_mean", optional_real(s.window_mean)}});
  }
  return {{"config", to_json(report.config)},
          {"windows_spec", to_json(report.spec)},
          {"window_count", report.windows.size()},
          {"dropped_rows", report.dropped_rows},
          {"aggregate", to_json(report.aggregate)},
          {"persistence_aggregate", to_json(report.persistence_aggregate)},
          {"skill", std::move(skill)},
          {"per_window", std::move(windows)}};
}

json to_json(const GridResult& grid) {
  json rows = json::array();
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& r = grid.rows[i];
    json jr = {{"rank", i + 1},
               {"kappa", r.kappa},
               {"residual_window", r.residual_window},
               {"gamma", optional_real(r.gamma)},
               {"ok", r.ok}};
    if (r.ok) {
      jr["aggregate"] = to_json(r.aggregate);
      jr["skill_rmse_vs_persistence"] = optional_real(r.skill_rmse);
    } else {
      jr["error"] = r.error;
    }
    rows.push_back(std::move(jr));
  }
  return {{"rows", std::move(rows)}, {"best", grid.best ? json(*grid.best) : json(nullptr)}};
}

namespace {

std::string csv_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

void write_window_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  std::ostringstream out;
  out << "window,first_row,train_size,test_size,rmse,mae,mape,r2,persistence_rmse,persistence_mae,"
         "persistence_mape,persistence_r2,skill_rmse\n";
  for (const auto& w : report.windows) {
    out << w.index << ',' << w.bounds.first_row << ',' << w.bounds.train_size << ',' << w.bounds.test_size << ','
        << format_real(w.model.rmse) << ',' << format_real(w.model.mae) << ',' << format_real(w.model.mape) << ','
        << csv_real(w.model.r2) << ',' << format_real(w.persistence.rmse) << ',' << format_real(w.persistence.mae)
        << ',' << format_real(w.persistence.mape) << ',' << csv_real(w.persistence.r2) << ','
        << (w.persistence.rmse > 0.0 ? format_real(skill_score(w.model.rmse, w.persistence.rmse)) : "") << '\n';
  }
  write_text(path, out.str());
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& grid) {
  std::ostringstream out;
  out << "rank,kappa,residual_window,gamma,status,rmse,mae,mape,r2,skill_rmse,error\n";
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& r = grid.rows[i];
    out << i + 1 << ',' << r.kappa << ',' << r.residual_window << ',' << csv_real(r.gamma) << ','
        << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
      out << format_real(r.aggregate.rmse) << ',' << format_real(r.aggregate.mae) << ','
          << format_real(r.aggregate.mape) << ',' << csv_real(r.aggregate.r2) << ',' << csv_real(r.skill_rmse) << ',';
    } else {
      std::string msg = r.error;
      for (char& c : msg) {
        if (c == ',' || c == '\n') c = ';';
      }
      out << ",,,,," << msg;
    }
    out << '\n';
  }
  write_text(path, out.str());
}

}  // namespace ensfts
