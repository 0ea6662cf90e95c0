#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "marma/core.hpp"
#include "marma/diagnostics.hpp"
#include "marma/estimation.hpp"

namespace marma {

struct ForecastResult {
  int horizon = 0;
  Eigen::VectorXd point;  // mu_{n+1}, ..., mu_{n+h}
  Eigen::MatrixXd boot;   // m x h bootstrap paths; empty for point forecasts
  std::vector<Interval> intervals;
  double level = 0.0;     // delta
  std::uint64_t seed = 0;
  int clamp_count = 0;

  bool has_intervals() const noexcept { return boot.size() > 0; }
};

/// h-step point forecasts. `new_x` holds the covariates for n+1..n+h
/// (h x r; may have zero columns when r = 0).
ForecastResult predict(const ParamVector& gamma, const ModelSpec& spec, const SeriesData& data,
                       const Eigen::MatrixXd& new_x, int h);
ForecastResult predict(const FitResult& fit, const SeriesData& data, const Eigen::MatrixXd& new_x, int h);

/// Delta-method interval for mu_t (1-based t):
///   mu_t -+ z_{1-delta/2} sqrt(Z' K_n^{-1} Z) / g'(mu_t),  Z = row t of D,
/// clipped to (0, 1). delta = 1 gives the degenerate interval at mu_t.
Interval insample_interval(const FitResult& fit, const SeriesData& data, int t, double delta);
std::vector<Interval> insample_intervals(const FitResult& fit, const SeriesData& data, double delta);

struct BootstrapOptions {
  int horizon = 1;
  int paths = 500;       // m >= 50
  double level = 0.05;   // delta
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Bootstrap prediction intervals: m future paths simulated from the fitted
/// model, conditioned on the observed history; path b uses its own substream
/// so the result does not depend on the thread count.
ForecastResult bootstrap_intervals(const FitResult& fit, const SeriesData& data, const Eigen::MatrixXd& new_x,
                                   const BootstrapOptions& options);
ForecastResult bootstrap_intervals(const ParamVector& gamma, const ModelSpec& spec, const SeriesData& data,
                                   const Eigen::MatrixXd& new_x, const BootstrapOptions& options);

/// Linear interpolation between order statistics (the "type 7" rule).
/// `sorted` must be ascending and nonempty.
double empirical_quantile(const std::vector<double>& sorted, double prob);

}  // namespace marma
