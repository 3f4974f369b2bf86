#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

namespace ensfts {

struct Universe {
  double lb = 0.0;
  double ub = 1.0;
  double margin_ratio = 0.1;
};

// lb = min - r*|min|, ub = max + r*|max|. A constant series is widened by
// 1e-6 on each side (with a warning) so that lb < ub.
Universe build_universe(std::span<const double> train, double margin_ratio);

struct Triangle {
  double lower = 0.0;
  double peak = 0.0;
  double upper = 0.0;
};

double membership(const Triangle& t, double y);

enum class PerturbationForm {
  Widening,  // (l + delta) - rho/2, c + delta, (u + delta) + rho/2
  Literal,   // rho/2 - (l + delta), c + delta, rho/2 + (u + delta)
};

std::string to_string(PerturbationForm form);
PerturbationForm parse_perturbation_form(std::string_view text);

struct FuzzySet {
  int index = 0;
  std::string label;
  double lower = 0.0;
  double peak = 0.0;
  double upper = 0.0;
  double displacement = 0.0;  // delta
  double scale = 0.0;         // rho

  Triangle base() const { return {lower, peak, upper}; }
};

Triangle perturb(const FuzzySet& set, PerturbationForm form = PerturbationForm::Widening);
double membership(const FuzzySet& set, double y, PerturbationForm form = PerturbationForm::Widening);

// Uniform triangles with peaks c_i = lb + i*(ub - lb)/(kappa - 1) and
// supports [c_{i-1}, c_{i+1}]; the two edge sets extend one step past U.
std::vector<FuzzySet> build_partitions(const Universe& universe, int kappa);

struct Rule {
  int precedent = 0;
  std::vector<int> consequents;  // ascending, unique

  friend bool operator==(const Rule&, const Rule&) = default;
};

// Fixed-capacity FIFO of the most recent one-step errors.
class ResidualWindow {
 public:
  explicit ResidualWindow(std::size_t capacity = 1);

  void push(double error);
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<double> entries() const { return {entries_.begin(), entries_.end()}; }

  double mean() const;
  double stddev() const;  // population

 private:
  std::size_t capacity_;
  std::deque<double> entries_;
};

struct NsftsParams {
  int kappa = 5;
  std::size_t residual_window = 3;
  double margin_ratio = 0.1;
  PerturbationForm perturbation = PerturbationForm::Widening;
};

void validate(const NsftsParams& params);

// First-order non-stationary fuzzy time series. Rules are learned once; the
// fuzzy sets move and stretch online from the residual statistics.
//
// Not thread-safe for concurrent adapt(); copy the model per stream.
class NsftsModel {
 public:
  // Throws InvalidInput when the series is shorter than residual_window + 2
  // or the parameters are out of range.
  static NsftsModel train(std::span<const double> series, const NsftsParams& params);

  // Reassembles a model from stored state (used by deserialisation).
  static NsftsModel from_state(const NsftsParams& params, const Universe& universe, std::vector<FuzzySet> sets,
                               const std::vector<Rule>& rules, std::span<const double> residuals,
                               std::size_t reorder_events);

  const NsftsParams& params() const { return params_; }
  const Universe& universe() const { return universe_; }
  const std::vector<FuzzySet>& sets() const { return sets_; }
  std::vector<Rule> rules() const;
  const ResidualWindow& residuals() const { return residuals_; }
  int kappa() const { return params_.kappa; }
  static constexpr int order = 1;

  std::vector<Triangle> perturbed_sets() const;
  std::vector<double> perturbed_midpoints() const;

  // Membership of y in every (perturbed) set; all zeros outside the supports.
  std::vector<double> fuzzify(double y) const;
  // Index of the highest membership, lowest index on ties; nearest perturbed
  // midpoint when y lies outside every support.
  int crisp_label(double y) const;

  // One-step forecast of y(t+1) from y(t).
  double forecast_step(double y) const;

  void update_residuals(double actual, double predicted);
  // Recomputes displacement and scale of every set from the residual window
  // and the position of y relative to U.
  void adapt(double y);

  // One-step forecasts for each test value, the first made from
  // `last_observed`. With adapt_online the revealed value is fed back
  // (residual push, then adapt) after each forecast is recorded.
  std::vector<double> predict_series(double last_observed, std::span<const double> test, bool adapt_online);

  // Number of adapt() calls whose raw displacements would have reordered
  // the perturbed midpoints and were re-sorted instead.
  std::size_t reorder_events() const { return reorder_events_; }

 private:
  NsftsModel() = default;

  NsftsParams params_;
  Universe universe_;
  std::vector<FuzzySet> sets_;
  std::vector<std::vector<int>> consequents_;  // indexed by precedent
  ResidualWindow residuals_;
  std::size_t reorder_events_ = 0;
};

}  // namespace ensfts
