#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "marma/core.hpp"
#include "marma/estimation.hpp"

namespace marma {

struct ResidualSet {
  Eigen::VectorXd simple;    // y_t - mu_t
  Eigen::VectorXd quantile;  // Phi^{-1}(F(y_t; p_t))
  int clamp_count = 0;       // CDF values pulled into [1e-12, 1 - 1e-12]
};

/// Residuals at the fitted parameters.
ResidualSet residuals(const FitResult& fit, const SeriesData& data);
/// Residuals at an arbitrary parameter vector.
ResidualSet residuals(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Null hypothesis for the normality tests.
///   composite: normal with mean and variance estimated from the sample
///              (Lilliefors KS, Stephens-modified Anderson-Darling).
///   standard:  fully specified N(0, 1), nothing estimated.
enum class NormalityNull { composite, standard };

// Normality tests of residuals. Both need at least 8 values.
TestResult ks_normality(std::span<const double> z, NormalityNull null = NormalityNull::composite);
TestResult ad_normality(std::span<const double> z, NormalityNull null = NormalityNull::composite);

/// sup_x |F_n(x) - cdf(x)| for the empirical CDF of z.
double ks_distance(std::span<const double> z, const std::function<double(double)>& cdf);
/// One-sample KS test against a fully specified continuous CDF; p-value from
/// the Kolmogorov limit with Stephens' finite-n scaling.
TestResult ks_test(std::span<const double> z, const std::function<double(double)>& cdf);

/// P(sqrt(n) D_n <= x) in the Kolmogorov limit.
double kolmogorov_cdf(double x);
/// Limiting null CDF of the Anderson-Darling statistic, with the n-dependent
/// correction of Marsaglia and Marsaglia.
double anderson_darling_cdf(double a2, std::size_t n);

struct WaldResult {
  double z = 0.0;
  double p_value = 1.0;
};

/// z = (gamma_j - gamma_star) / se_j, two-sided normal p-value.
WaldResult wald_test(const FitResult& fit, int j, double gamma_star);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// gamma_j -+ z_{1 - delta/2} se_j for every parameter, 0 < delta < 1.
std::vector<Interval> confint(const FitResult& fit, double delta);

struct AcfResult {
  std::vector<double> acf;  // lags 0..max_lag
  double band = 0.0;        // 1.96 / sqrt(n)
};

AcfResult residual_acf(std::span<const double> z, int max_lag);

}  // namespace marma
