#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "marma/core.hpp"
#include "marma/estimation.hpp"
#include "marma/random.hpp"

namespace marma {

/// sin(2 pi t / period) or cos(2 pi t / period).
struct HarmonicTerm {
  enum class Fn { sin, cos };
  Fn fn = Fn::sin;
  double period = 1.0;

  double operator()(double t) const;
  std::string label() const;  // e.g. "sin(2*pi*t/12)"
};

/// Deterministic covariates evaluated on the time index.
struct CovariateRule {
  std::vector<HarmonicTerm> terms;

  int size() const noexcept { return static_cast<int>(terms.size()); }
  /// Rows for t = first, first + 1, ..., first + count - 1.
  Eigen::MatrixXd rows(long first, long count) const;
};

struct ScenarioSpec {
  explicit ScenarioSpec(const ModelSpec& model) : model(model), gamma(model) {}
  ScenarioSpec(const ModelSpec& model, ParamVector gamma) : model(model), gamma(std::move(gamma)) {}

  ModelSpec model;
  ParamVector gamma;
  int n = 100;
  int burn_in = 100;
  CovariateRule covariates;
  int replicas = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulatedSeries {
  SeriesData data;
  Eigen::VectorXd mu;  // conditional means used to draw each y_t
};

/// Generates burn_in + length steps and keeps the last `length` (default n).
/// Covariates are evaluated on the full index s = 1..burn_in + length, so
/// retained observation t carries rule(burn_in + t).
SimulatedSeries simulate(const ScenarioSpec& scenario, Rng& rng, std::optional<int> length = std::nullopt);
/// Single series from the scenario seed.
SimulatedSeries simulate(const ScenarioSpec& scenario);

struct ParamSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
};

struct ReplicaFit {
  bool ok = false;  // fitted and converged
  Eigen::VectorXd estimate;
  Eigen::VectorXd std_errors;  // empty when K_n is singular
  std::string failure;
};

struct McReport {
  std::string kind;  // "point", "gof" or "coverage"
  int replicas = 0;
  int n_converged = 0;
  int n_failed = 0;

  // point estimation
  std::vector<ParamSummary> converged_only;
  std::vector<ParamSummary> all_replicas;
  std::vector<ReplicaFit> fits;

  // goodness of fit (5% level, over converged replicas)
  double ks_rejection = 0.0;
  double ad_rejection = 0.0;

  // coverage[i][k]: level levels[i], horizon k + 1
  std::vector<double> levels;
  std::vector<std::vector<double>> coverage;
  std::vector<std::vector<double>> mean_width;
};

struct McOptions {
  int threads = 1;
  FitOptions fit;
  /// Model fitted to each replica; defaults to the generating model.
  std::optional<ModelSpec> fit_model;
};

McReport mc_point_estimation(const ScenarioSpec& scenario, const McOptions& options = {});
McReport mc_goodness_of_fit(const ScenarioSpec& scenario, const McOptions& options = {});
McReport mc_coverage(const ScenarioSpec& scenario, int horizon, int paths, const std::vector<double>& levels,
                     const McOptions& options = {});

/// Mean, median and sample standard deviation of each column.
std::vector<ParamSummary> summarize(const std::vector<Eigen::VectorXd>& estimates, const std::vector<std::string>& names,
                                    const Eigen::VectorXd& truth);

}  // namespace marma
