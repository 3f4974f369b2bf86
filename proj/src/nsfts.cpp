#include "ensfts/nsfts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ensfts/error.hpp"
#include "ensfts/log.hpp"

namespace ensfts {

Universe build_universe(std::span<const double> train, double margin_ratio) {
  if (train.empty()) throw InvalidInput("cannot build a universe from an empty series");
  if (!(margin_ratio > 0.0 && margin_ratio < 1.0)) throw InvalidInput("margin ratio must lie in (0, 1)");
  const auto [lo_it, hi_it] = std::minmax_element(train.begin(), train.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("series contains non-finite values");

  Universe u{lo - margin_ratio * std::abs(lo), hi + margin_ratio * std::abs(hi), margin_ratio};
  if (lo == hi) {
    constexpr double eps = 1e-6;
    u.lb -= eps;
    u.ub += eps;
    log_warning("constant training series; universe widened by 1e-6");
  }
  return u;
}

double membership(const Triangle& t, double y) {
  if (y < t.lower || y > t.upper) return 0.0;
  if (y == t.peak) return 1.0;
  double mu = 0.0;
  if (y < t.peak) {
    mu = t.peak > t.lower ? (y - t.lower) / (t.peak - t.lower) : 1.0;
  } else {
    mu = t.upper > t.peak ? (t.upper - y) / (t.upper - t.peak) : 1.0;
  }
  return std::clamp(mu, 0.0, 1.0);
}

std::string to_string(PerturbationForm form) {
  return form == PerturbationForm::Widening ? "widening" : "literal";
}

PerturbationForm parse_perturbation_form(std::string_view text) {
  if (text == "widening") return PerturbationForm::Widening;
  if (text == "literal") return PerturbationForm::Literal;
  throw InvalidInput("unknown perturbation form '" + std::string(text) + "' (expected widening or literal)");
}

Triangle perturb(const FuzzySet& set, PerturbationForm form) {
  const double d = set.displacement;
  const double half = set.scale / 2.0;
  if (form == PerturbationForm::Literal) {
    return {half - (set.lower + d), set.peak + d, half + (set.upper + d)};
  }
  return {(set.lower + d) - half, set.peak + d, (set.upper + d) + half};
}

double membership(const FuzzySet& set, double y, PerturbationForm form) { return membership(perturb(set, form), y); }

std::vector<FuzzySet> build_partitions(const Universe& universe, int kappa) {
  if (kappa < 3) throw InvalidInput("at least 3 fuzzy sets are required, got " + std::to_string(kappa));
  if (!(universe.lb < universe.ub)) throw InvalidInput("universe lower bound must be below upper bound");
  const double width = universe.ub - universe.lb;
  const double denom = static_cast<double>(kappa - 1);
  std::vector<double> c(static_cast<std::size_t>(kappa));
  for (int i = 0; i < kappa; ++i) c[static_cast<std::size_t>(i)] = universe.lb + i * width / denom;

  std::vector<FuzzySet> sets(static_cast<std::size_t>(kappa));
  for (int i = 0; i < kappa; ++i) {
    const auto k = static_cast<std::size_t>(i);
    auto& s = sets[k];
    s.index = i;
    s.label = "A" + std::to_string(i);
    s.peak = c[k];
    s.lower = i == 0 ? c[0] - (c[1] - c[0]) : c[k - 1];
    s.upper = i == kappa - 1 ? c[k] + (c[k] - c[k - 1]) : c[k + 1];
  }
  return sets;
}

ResidualWindow::ResidualWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidInput("residual window capacity must be positive");
}

void ResidualWindow::push(double error) {
  entries_.push_back(error);
  while (entries_.size() > capacity_) entries_.pop_front();
}

double ResidualWindow::mean() const {
  if (entries_.empty()) return 0.0;
  return std::accumulate(entries_.begin(), entries_.end(), 0.0) / static_cast<double>(entries_.size());
}

double ResidualWindow::stddev() const {
  if (entries_.empty()) return 0.0;
  const double m = mean();
  double s = 0.0;
  for (double e : entries_) s += (e - m) * (e - m);
  return std::sqrt(s / static_cast<double>(entries_.size()));
}

void validate(const NsftsParams& params) {
  if (params.kappa < 3) throw InvalidInput("kappa must be at least 3, got " + std::to_string(params.kappa));
  if (params.residual_window < 1) throw InvalidInput("residual window must be at least 1");
  if (!(params.margin_ratio > 0.0 && params.margin_ratio < 1.0)) {
    throw InvalidInput("margin ratio must lie in (0, 1)");
  }
}

NsftsModel NsftsModel::train(std::span<const double> series, const NsftsParams& params) {
  validate(params);
  if (series.size() < params.residual_window + 2) {
    throw InvalidInput("training series of length " + std::to_string(series.size()) + " is shorter than w_e + 2 = " +
                       std::to_string(params.residual_window + 2));
  }

  NsftsModel model;
  model.params_ = params;
  model.universe_ = build_universe(series, params.margin_ratio);
  model.sets_ = build_partitions(model.universe_, params.kappa);
  model.residuals_ = ResidualWindow(params.residual_window);
  model.consequents_.assign(static_cast<std::size_t>(params.kappa), {});

  int previous = model.crisp_label(series[0]);
  for (std::size_t t = 1; t < series.size(); ++t) {
    const int current = model.crisp_label(series[t]);
    model.consequents_[static_cast<std::size_t>(previous)].push_back(current);
    previous = current;
  }
  for (auto& c : model.consequents_) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  const std::size_t n = series.size();
  for (std::size_t t = n - params.residual_window; t < n; ++t) {
    const double predicted = model.forecast_step(series[t - 1]);
    model.residuals_.push(series[t] - predicted);
  }
  return model;
}

NsftsModel NsftsModel::from_state(const NsftsParams& params, const Universe& universe, std::vector<FuzzySet> sets,
                                  const std::vector<Rule>& rules, std::span<const double> residuals,
                                  std::size_t reorder_events) {
  validate(params);
  if (sets.size() != static_cast<std::size_t>(params.kappa)) {
    throw InvalidInput("stored model has " + std::to_string(sets.size()) + " sets, kappa is " +
                       std::to_string(params.kappa));
  }
  NsftsModel model;
  model.params_ = params;
  model.universe_ = universe;
  model.sets_ = std::move(sets);
  model.consequents_.assign(static_cast<std::size_t>(params.kappa), {});
  for (const auto& rule : rules) {
    const auto in_range = [&](int i) { return i >= 0 && i < params.kappa; };
    if (!in_range(rule.precedent) || rule.consequents.empty() ||
        !std::all_of(rule.consequents.begin(), rule.consequents.end(), in_range)) {
      throw InvalidInput("stored rule references a set outside [0, kappa)");
    }
    auto& c = model.consequents_[static_cast<std::size_t>(rule.precedent)];
    c = rule.consequents;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  model.residuals_ = ResidualWindow(params.residual_window);
  for (double e : residuals) model.residuals_.push(e);
  model.reorder_events_ = reorder_events;
  return model;
}

std::vector<Rule> NsftsModel::rules() const {
  std::vector<Rule> out;
  for (std::size_t p = 0; p < consequents_.size(); ++p) {
    if (!consequents_[p].empty()) out.push_back({static_cast<int>(p), consequents_[p]});
  }
  return out;
}

std::vector<Triangle> NsftsModel::perturbed_sets() const {
  std::vector<Triangle> out;
  out.reserve(sets_.size());
  for (const auto& s : sets_) out.push_back(perturb(s, params_.perturbation));
  return out;
}

std::vector<double> NsftsModel::perturbed_midpoints() const {
  std::vector<double> out;
  out.reserve(sets_.size());
  for (const auto& s : sets_) out.push_back(s.peak + s.displacement);
  return out;
}

std::vector<double> NsftsModel::fuzzify(double y) const {
  std::vector<double> grades;
  grades.reserve(sets_.size());
  for (const auto& s : sets_) grades.push_back(membership(s, y, params_.perturbation));
  return grades;
}

namespace {

int nearest_index(std::span<const double> midpoints, double y) {
  int best = 0;
  for (std::size_t i = 1; i < midpoints.size(); ++i) {
    if (std::abs(y - midpoints[i]) < std::abs(y - midpoints[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

int NsftsModel::crisp_label(double y) const {
  const auto grades = fuzzify(y);
  const auto it = std::max_element(grades.begin(), grades.end());
  if (*it > 0.0) return static_cast<int>(it - grades.begin());
  return nearest_index(perturbed_midpoints(), y);
}

double NsftsModel::forecast_step(double y) const {
  const auto grades = fuzzify(y);
  const auto midpoints = perturbed_midpoints();

  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < grades.size(); ++j) {
    const auto& consequents = consequents_[j];
    if (grades[j] <= 0.0 || consequents.empty()) continue;
    double mp = 0.0;
    for (int c : consequents) mp += midpoints[static_cast<std::size_t>(c)];
    mp /= static_cast<double>(consequents.size());
    weighted += grades[j] * mp;
    total += grades[j];
  }
  if (total > 0.0) return weighted / total;
  return midpoints[static_cast<std::size_t>(nearest_index(midpoints, y))];
}

void NsftsModel::update_residuals(double actual, double predicted) { residuals_.push(actual - predicted); }

void NsftsModel::adapt(double y) {
  const double d_l = y < universe_.lb ? universe_.lb - y : 0.0;
  const double d_u = y > universe_.ub ? y - universe_.ub : 0.0;
  const double range = d_u - d_l;
  const double range_mid = range / 2.0;
  const double mean = residuals_.mean();
  const double sigma = residuals_.stddev();
  const int k = params_.kappa;

  std::vector<double> delta(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    delta[static_cast<std::size_t>(i)] =
        mean + (i * range / (k + 1) - range_mid) + (i * 2.0 * sigma / (k - 1) - sigma);
  }

  // Displacements large enough to cross neighbouring peaks are re-sorted so
  // that the perturbed midpoints stay ordered.
  std::vector<double> peaks(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) peaks[i] = sets_[i].peak + delta[i];
  if (!std::is_sorted(peaks.begin(), peaks.end(), std::less_equal<>())) {
    std::sort(peaks.begin(), peaks.end());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = peaks[i] - sets_[i].peak;
    ++reorder_events_;
    std::ostringstream msg;
    msg << "adapt(" << y << ") reordered perturbed midpoints (event " << reorder_events_ << ")";
    log_info(msg.str());
  }

  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double before = delta[i == 0 ? 0 : idx - 1];
    const double after = delta[i == k - 1 ? idx : idx + 1];
    sets_[idx].displacement = delta[idx];
    sets_[idx].scale = std::abs(before - after);
  }
}

std::vector<double> NsftsModel::predict_series(double last_observed, std::span<const double> test,
                                               bool adapt_online) {
  std::vector<double> forecasts;
  forecasts.reserve(test.size());
  double previous = last_observed;
  for (double actual : test) {
    const double predicted = forecast_step(previous);
    forecasts.push_back(predicted);
    if (adapt_online) {
      update_residuals(actual, predicted);
      adapt(actual);
    }
    previous = actual;
  }
  return forecasts;
}

}  // namespace ensfts
