#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ensfts/ensfts.hpp"

namespace py = pybind11;
using namespace ensfts;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    const auto n = static_cast<std::size_t>(a.shape(0));
    return Matrix(n, 1, std::vector<double>(a.data(), a.data() + n));
  }
  if (a.ndim() != 2) throw InvalidInput("expected a 1-D or 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw InvalidInput("expected a 1-D array");
  return {a.data(), a.data() + a.shape(0)};
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.entries().begin(), m.entries().end(), out.mutable_data());
  return out;
}

py::object json_to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

TimeSeriesFrame frame_from(const Array& values, std::optional<std::vector<std::string>> names,
                           std::optional<std::string> target) {
  TimeSeriesFrame frame;
  frame.values = to_matrix(values);
  if (names) {
    if (names->size() != frame.width()) throw InvalidInput("column_names must match the number of columns");
    frame.column_names = *names;
  } else {
    for (std::size_t c = 0; c < frame.width(); ++c) frame.column_names.push_back("x" + std::to_string(c));
  }
  for (std::size_t r = 0; r < frame.size(); ++r) frame.timestamps.push_back(static_cast<Timestamp>(r) * 600);
  if (target) {
    if (!frame.column_index(*target)) throw InvalidInput("unknown target column '" + *target + "'");
    frame.target_column = target;
  }
  return frame;
}

MethodConfig method_from(const std::string& method, std::optional<double> gamma, int kappa,
                         std::size_t residual_window, double margin_ratio, const std::string& perturbation,
                         bool adapt_online, const std::string& eval_space, bool exclude_target,
                         std::size_t kpca_max_points) {
  MethodConfig c;
  c.embedding.method = parse_embedding_method(method);
  c.embedding.gamma = gamma;
  c.embedding.kpca.max_training_points = kpca_max_points;
  c.nsfts = {kappa, residual_window, margin_ratio, parse_perturbation_form(perturbation)};
  c.adapt_online = adapt_online;
  c.space = parse_eval_space(eval_space);
  c.exclude_target = exclude_target;
  return c;
}

py::dict metrics_dict(const MetricSet& m) {
  py::dict d;
  d["rmse"] = m.rmse;
  d["mae"] = m.mae;
  d["mape"] = m.mape;
  d["r2"] = m.r2 ? py::cast(*m.r2) : py::none();
  d["count"] = m.count;
  d["mape_excluded"] = m.mape_excluded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ensfts, m) {
  m.doc() = "Embedded non-stationary fuzzy time series forecasting";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidInput> invalid(m, "InvalidInput", error.ptr());
  static py::exception<NumericalFailure> numerical(m, "NumericalFailure", error.ptr());
  static py::exception<DegenerateEmbedding> degenerate(m, "DegenerateEmbedding", error.ptr());
  static py::exception<IngestError> ingest(m, "IngestError", error.ptr());
  static py::exception<LoadError> load(m, "LoadError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
      py::set_error(invalid, e.what());
    } catch (const NumericalFailure& e) {
      py::set_error(numerical, e.what());
    } catch (const DegenerateEmbedding& e) {
      py::set_error(degenerate, e.what());
    } catch (const IngestError& e) {
      py::set_error(ingest, e.what());
    } catch (const LoadError& e) {
      py::set_error(load, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<PcaModel>(m, "PcaModel")
      .def_property_readonly("component", [](const PcaModel& p) { return to_array(p.component); })
      .def_readonly("eigenvalue", &PcaModel::eigenvalue)
      .def("project", [](const PcaModel& p, const Array& point) { return project_pca(p, to_vector(point)); })
      .def("transform",
           [](const PcaModel& p, const Array& data) {
             const auto x = to_matrix(data);
             std::vector<double> out(x.rows());
             for (std::size_t r = 0; r < x.rows(); ++r) out[r] = project_pca(p, x.row(r));
             return to_array(out);
           })
      .def("reconstruct", &reconstruct_pca, py::arg("score"), py::arg("feature"));

  py::class_<KpcaModel>(m, "KpcaModel")
      .def_readonly("gamma", &KpcaModel::gamma)
      .def_readonly("eigenvalue", &KpcaModel::lambda)
      .def_property_readonly("alpha", [](const KpcaModel& k) { return to_array(k.alpha); })
      .def_property_readonly("training_scores", [](const KpcaModel& k) { return to_array(k.training_scores); })
      .def("project", [](const KpcaModel& k, const Array& point) { return project_kpca(k, to_vector(point)); })
      .def("transform", [](const KpcaModel& k, const Array& data) {
        const auto x = to_matrix(data);
        std::vector<double> out(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) out[r] = project_kpca(k, x.row(r));
        return to_array(out);
      });

  m.def("fit_pca", [](const Array& data) { return fit_pca(to_matrix(data)); }, py::arg("data"));
  m.def(
      "fit_kpca",
      [](const Array& data, double gamma, std::size_t max_training_points) {
        KpcaOptions o;
        o.max_training_points = max_training_points;
        return fit_kpca(to_matrix(data), gamma, o);
      },
      py::arg("data"), py::arg("gamma"), py::arg("max_training_points") = 0);
  m.def(
      "rbf_kernel_matrix", [](const Array& a, const Array& b, double gamma) {
        return to_array(rbf_kernel_matrix(to_matrix(a), to_matrix(b), gamma));
      },
      py::arg("a"), py::arg("b"), py::arg("gamma"));
  m.def(
      "center_kernel", [](const Array& k) { return to_array(center_kernel(to_matrix(k))); }, py::arg("kernel"));
  m.def(
      "sym_eigen",
      [](const Array& a) {
        const auto e = sym_eigen(to_matrix(a));
        return py::make_tuple(to_array(e.values), to_array(e.vectors));
      },
      py::arg("matrix"));

  py::class_<NsftsModel>(m, "NsftsModel")
      .def_static(
          "train",
          [](const Array& series, int kappa, std::size_t residual_window, double margin_ratio,
             const std::string& perturbation) {
            NsftsParams p{kappa, residual_window, margin_ratio, parse_perturbation_form(perturbation)};
            return NsftsModel::train(to_vector(series), p);
          },
          py::arg("series"), py::arg("kappa") = 5, py::arg("residual_window") = 3, py::arg("margin_ratio") = 0.1,
          py::arg("perturbation") = "widening")
      .def_property_readonly("kappa", &NsftsModel::kappa)
      .def_property_readonly("universe",
                             [](const NsftsModel& n) { return py::make_tuple(n.universe().lb, n.universe().ub); })
      .def_property_readonly("rules",
                             [](const NsftsModel& n) {
                               py::dict d;
                               for (const auto& r : n.rules()) d[py::int_(r.precedent)] = r.consequents;
                               return d;
                             })
      .def_property_readonly("residuals", [](const NsftsModel& n) { return n.residuals().entries(); })
      .def_property_readonly("reorder_events", &NsftsModel::reorder_events)
      .def("perturbed_midpoints", [](const NsftsModel& n) { return to_array(n.perturbed_midpoints()); })
      .def("fuzzify", [](const NsftsModel& n, double y) { return to_array(n.fuzzify(y)); })
      .def("forecast_step", &NsftsModel::forecast_step, py::arg("y"))
      .def("update_residuals", &NsftsModel::update_residuals, py::arg("actual"), py::arg("predicted"))
      .def("adapt", &NsftsModel::adapt, py::arg("y"))
      .def(
          "predict_series",
          [](NsftsModel& n, double last_observed, const Array& test, bool adapt_online) {
            return to_array(n.predict_series(last_observed, to_vector(test), adapt_online));
          },
          py::arg("last_observed"), py::arg("test"), py::arg("adapt_online") = true)
      .def("copy", [](const NsftsModel& n) { return NsftsModel(n); });

  m.def(
      "compute_metrics",
      [](const Array& actual, const Array& predicted) {
        return metrics_dict(compute_metrics(to_vector(actual), to_vector(predicted)));
      },
      py::arg("actual"), py::arg("predicted"));
  m.def("skill_score", &skill_score, py::arg("metric_forecast"), py::arg("metric_reference"));
  m.def(
      "persistence_forecast", [](const Array& s) { return to_array(persistence_forecast(to_vector(s))); },
      py::arg("series"));

  m.def(
      "sliding_window_eval",
      [](const Array& values, std::size_t window_length, double train_fraction, const std::string& method,
         std::optional<double> gamma, int kappa, std::size_t residual_window, double margin_ratio,
         const std::string& perturbation, bool adapt_online, const std::string& eval_space,
         std::optional<std::vector<std::string>> column_names, std::optional<std::string> target,
         bool exclude_target, std::size_t kpca_max_points, std::size_t threads) {
        const auto frame = frame_from(values, std::move(column_names), std::move(target));
        const auto config = method_from(method, gamma, kappa, residual_window, margin_ratio, perturbation,
                                        adapt_online, eval_space, exclude_target, kpca_max_points);
        EvalOptions options;
        options.threads = threads;
        EvaluationReport report;
        {
          py::gil_scoped_release release;
          report = sliding_window_eval(frame, {window_length, train_fraction}, config, options);
        }
        return json_to_python(to_json(report));
      },
      py::arg("values"), py::arg("window_length") = 657, py::arg("train_fraction") = 0.75,
      py::arg("method") = "pca", py::arg("gamma") = py::none(), py::arg("kappa") = 5, py::arg("residual_window") = 3,
      py::arg("margin_ratio") = 0.1, py::arg("perturbation") = "widening", py::arg("adapt_online") = true,
      py::arg("eval_space") = "normalized", py::arg("column_names") = py::none(), py::arg("target") = py::none(),
      py::arg("exclude_target") = false, py::arg("kpca_max_points") = 0, py::arg("threads") = 0);

  m.def(
      "grid_search",
      [](const Array& values, std::vector<int> kappas, std::vector<std::size_t> residual_windows,
         std::vector<double> gammas, std::size_t window_length, double train_fraction, const std::string& method,
         std::size_t threads) {
        const auto frame = frame_from(values, std::nullopt, std::nullopt);
        const auto base = method_from(method, std::nullopt, 5, 3, 0.1, "widening", true, "normalized", false, 0);
        EvalOptions options;
        options.threads = threads;
        GridResult result;
        {
          py::gil_scoped_release release;
          result = grid_search(frame, {std::move(kappas), std::move(residual_windows), std::move(gammas)},
                               {window_length, train_fraction}, base, options);
        }
        return json_to_python(to_json(result));
      },
      py::arg("values"), py::arg("kappas") = std::vector<int>{5, 15, 30, 45, 60},
      py::arg("residual_windows") = std::vector<std::size_t>{3, 4, 5},
      py::arg("gammas") = std::vector<double>{0.1, 10, 0.5}, py::arg("window_length") = 657,
      py::arg("train_fraction") = 0.75, py::arg("method") = "pca", py::arg("threads") = 0);

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& timestamp_column,
         std::vector<std::string> drop_columns, std::optional<std::string> target) {
        const auto frame = load_csv(path, {timestamp_column, std::move(drop_columns), std::move(target)});
        py::array_t<std::int64_t> stamps(static_cast<py::ssize_t>(frame.size()));
        std::copy(frame.timestamps.begin(), frame.timestamps.end(), stamps.mutable_data());
        py::dict d;
        d["timestamps"] = stamps;
        d["columns"] = frame.column_names;
        d["values"] = to_array(frame.values);
        d["target"] = frame.target_column ? py::cast(*frame.target_column) : py::none();
        return d;
      },
      py::arg("path"), py::arg("timestamp_column") = "date", py::arg("drop_columns") = std::vector<std::string>{},
      py::arg("target") = py::none());

  m.def(
      "generate_synthetic",
      [](std::size_t length, const std::string& kind, std::size_t shift_at, double magnitude, std::uint64_t seed,
         double noise_std, double level) {
        return to_array(generate_synthetic({length, parse_drift_kind(kind), shift_at, magnitude, seed, noise_std, level}));
      },
      py::arg("length") = 500, py::arg("kind") = "mean_shift", py::arg("shift_at") = 250, py::arg("magnitude") = 0.0,
      py::arg("seed") = 0, py::arg("noise_std") = 1.0, py::arg("level") = 0.0);
  m.def(
      "generate_sensor_frame",
      [](std::size_t rows, std::size_t columns, std::uint64_t seed) {
        const auto frame = generate_sensor_frame({rows, columns, seed});
        return py::make_tuple(to_array(frame.values), frame.column_names);
      },
      py::arg("rows") = 1000, py::arg("columns") = 26, py::arg("seed") = 0);

  m.def(
      "save_model",
      [](const std::filesystem::path& path, const py::object& model) {
        if (py::isinstance<PcaModel>(model)) return save_model(path, model.cast<PcaModel>());
        if (py::isinstance<KpcaModel>(model)) return save_model(path, model.cast<KpcaModel>());
        if (py::isinstance<NsftsModel>(model)) return save_model(path, model.cast<NsftsModel>());
        throw InvalidInput("save_model expects a PcaModel, KpcaModel or NsftsModel");
      },
      py::arg("path"), py::arg("model"));
  m.def(
      "load_model",
      [](const std::filesystem::path& path) {
        return std::visit([](auto&& model) { return py::cast(std::move(model)); }, load_model(path));
      },
      py::arg("path"));
}
