#include "marma/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "marma/distribution.hpp"
#include "marma/errors.hpp"
#include "marma/special.hpp"

namespace marma {
namespace {

constexpr double kCdfClamp = 1e-12;

void require_length(std::span<const double> z, const char* who) {
  if (z.size() < 8) throw DataError(std::string(who) + ": need at least 8 values");
  for (double v : z)
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": values must be finite");
}

void require_inference(const FitResult& fit) {
  if (fit.info_singular || fit.std_errors.size() != fit.gamma_hat.size())
    throw SingularInformationError("conditional information matrix is singular; no standard errors");
}

// Marsaglia & Marsaglia (2004), "Evaluating the Anderson-Darling distribution".
double adinf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0)
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  return std::exp(-std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

double errfix(double n, double x) {
  if (x > 0.8)
    return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n;
  const double c = 0.01265 + 0.1757 / n;
  if (x < c) {
    double v = x / c;
    v = std::sqrt(v) * (1.0 - v) * (49.0 * v - 102.0);
    return v * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
  }
  double v = (x - c) / (0.8 - c);
  v = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * v) * v) * v) * v) * v;
  return v * (0.04213 + 0.01365 / n) / n;
}

struct Moments {
  double mean;
  double sd;
};

Moments moments(std::span<const double> z) {
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(z.size() - 1));
  if (!(sd > 0.0)) throw DataError("normality test: sample has zero variance");
  return {mean, sd};
}

}  // namespace

ResidualSet residuals(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec) {
  const FilterOutput f = filter(gamma, data, spec);
  const auto n = f.mu.size();
  ResidualSet out;
  out.simple = data.y - f.mu;
  out.quantile.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double u = cdf(data.y[t], Shape(f.shape[t]));
    if (u < kCdfClamp || u > 1.0 - kCdfClamp) {
      u = std::clamp(u, kCdfClamp, 1.0 - kCdfClamp);
      ++out.clamp_count;
    }
    out.quantile[t] = special::normal_quantile(u);
  }
  return out;
}

ResidualSet residuals(const FitResult& fit, const SeriesData& data) {
  return residuals(fit.gamma_hat, data, fit.spec);
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.18) {
    // Theta-function form, fast for small x.
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(-(2 * k - 1) * (2 * k - 1) * w);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    tail += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return 1.0 - 2.0 * tail;
}

double anderson_darling_cdf(double a2, std::size_t n) {
  const double x = adinf(a2);
  return std::clamp(x + errfix(static_cast<double>(n), x), 0.0, 1.0);
}

double ks_distance(std::span<const double> z, const std::function<double(double)>& cdf) {
  std::vector<double> s(z.begin(), z.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

TestResult ks_test(std::span<const double> z, const std::function<double(double)>& cdf) {
  if (z.empty()) throw DataError("ks_test: empty sample");
  const double d = ks_distance(z, cdf);
  const double rn = std::sqrt(static_cast<double>(z.size()));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  return {d, std::clamp(1.0 - kolmogorov_cdf(lambda), 0.0, 1.0)};
}

TestResult ks_normality(std::span<const double> z, NormalityNull null) {
  require_length(z, "ks_normality");
  if (null == NormalityNull::standard) return ks_test(z, special::normal_cdf);

  const Moments mom = moments(z);
  const double d = ks_distance(z, [&](double v) { return special::normal_cdf((v - mom.mean) / mom.sd); });
  // Lilliefors null: Dallal-Wilkinson approximation, Stephens' form above 0.1.
  const double n = static_cast<double>(z.size());
  const double kd = n <= 100 ? d : d * std::pow(n / 100.0, 0.49);
  const double nd = std::min(n, 100.0);
  double p = std::exp(-7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * std::sqrt(nd + 2.78019) - 0.122119 +
                      0.974598 / std::sqrt(nd) + 1.67997 / nd);
  if (p > 0.1) {
    const double kk = (std::sqrt(n) - 0.01 + 0.85 / std::sqrt(n)) * d;
    if (kk <= 0.302)
      p = 1.0;
    else if (kk <= 0.5)
      p = 2.76773 - 19.828315 * kk + 80.709644 * kk * kk - 138.55152 * kk * kk * kk + 81.218052 * std::pow(kk, 4);
    else if (kk <= 0.9)
      p = -4.901232 + 40.662806 * kk - 97.490286 * kk * kk + 94.029866 * kk * kk * kk - 32.355711 * std::pow(kk, 4);
    else if (kk <= 1.31)
      p = 6.198765 - 19.558097 * kk + 23.186922 * kk * kk - 12.234627 * kk * kk * kk + 2.423045 * std::pow(kk, 4);
    else
      p = 0.0;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

TestResult ad_normality(std::span<const double> z, NormalityNull null) {
  require_length(z, "ad_normality");
  const bool composite = null == NormalityNull::composite;
  const Moments mom = composite ? moments(z) : Moments{0.0, 1.0};
  std::vector<double> s(z.begin(), z.end());
  for (double& v : s) v = (v - mom.mean) / mom.sd;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  constexpr double kMin = std::numeric_limits<double>::min();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(special::normal_cdf(s[i]), kMin);
    const double hi = std::max(special::normal_sf(s[n - 1 - i]), kMin);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  const double nn = static_cast<double>(n);
  const double a2 = -nn - acc / nn;
  if (!composite) return {a2, std::clamp(1.0 - anderson_darling_cdf(a2, n), 0.0, 1.0)};

  // Stephens' modified statistic and piecewise p-value for the estimated-
  // parameter case.
  const double aa = a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
  double p;
  if (aa < 0.2)
    p = 1.0 - std::exp(-13.436 + 101.14 * aa - 223.73 * aa * aa);
  else if (aa < 0.34)
    p = 1.0 - std::exp(-8.318 + 42.796 * aa - 59.938 * aa * aa);
  else if (aa < 0.6)
    p = std::exp(0.9177 - 4.279 * aa - 1.38 * aa * aa);
  else if (aa < 10.0)
    p = std::exp(1.2937 - 5.709 * aa + 0.0186 * aa * aa);
  else
    p = 3.7e-24;
  return {a2, std::clamp(p, 0.0, 1.0)};
}

WaldResult wald_test(const FitResult& fit, int j, double gamma_star) {
  require_inference(fit);
  if (j < 0 || j >= fit.gamma_hat.size()) throw DimensionError("wald_test: parameter index out of range");
  const double z = (fit.gamma_hat.flat()[j] - gamma_star) / fit.std_errors[j];
  return {z, std::erfc(std::fabs(z) / std::numbers::sqrt2)};
}

std::vector<Interval> confint(const FitResult& fit, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confint: level must lie in (0, 1)");
  require_inference(fit);
  const double zq = special::normal_quantile(1.0 - delta / 2.0);
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(fit.gamma_hat.size()));
  for (int j = 0; j < fit.gamma_hat.size(); ++j) {
    const double est = fit.gamma_hat.flat()[j];
    const double half = zq * fit.std_errors[j];
    out.push_back({est - half, est + half});
  }
  return out;
}

AcfResult residual_acf(std::span<const double> z, int max_lag) {
  const auto n = static_cast<int>(z.size());
  if (max_lag < 0 || 2 * max_lag >= n) throw DomainError("residual_acf: max_lag must be below length / 2");
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double denom = 0.0;
  for (double v : z) denom += (v - mean) * (v - mean);
  AcfResult out;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  out.acf.resize(static_cast<std::size_t>(max_lag) + 1);
  out.acf[0] = 1.0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double num = 0.0;
    for (int t = 0; t + lag < n; ++t) num += (z[t] - mean) * (z[t + lag] - mean);
    out.acf[lag] = denom > 0.0 ? num / denom : 0.0;
  }
  return out;
}

}  // namespace marma
