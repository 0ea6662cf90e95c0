#include "marma/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "marma/distribution.hpp"
#include "marma/errors.hpp"
#include "marma/parallel.hpp"
#include "marma/random.hpp"
#include "marma/special.hpp"

namespace marma {
namespace {

// Histories of g(Y), X'beta and r over 1..n+h; the first n entries hold the
// in-sample reconstruction.
struct History {
  std::vector<double> gy, xb, resid;
  double next_eta = 0.0;  // eta_{n+1}
};

void check_future(const ModelSpec& spec, const Eigen::MatrixXd& new_x, int h) {
  if (h < 1) throw DomainError("forecast horizon must be at least 1");
  if (spec.n_covariates > 0 && (new_x.rows() < h || new_x.cols() != spec.n_covariates))
    throw DimensionError("future covariates must be supplied as a " + std::to_string(h) + " x " +
                         std::to_string(spec.n_covariates) + " matrix");
}

History reconstruct(const LinearPredictor& lp, const ModelSpec& spec, const SeriesData& data,
                    const Eigen::MatrixXd& new_x, int h) {
  const auto n = static_cast<std::size_t>(data.size());
  History hist;
  hist.gy.resize(n + h);
  hist.xb.resize(n + h);
  hist.resid.assign(n + h, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    hist.gy[t] = spec.link.g(data.y[t]);
    hist.xb[t] = lp.covariate_effect(data.x.row(static_cast<Eigen::Index>(t)));
    const double eta = lp.eta(std::span(hist.gy).first(t), std::span(hist.xb).first(t),
                              std::span(hist.resid).first(t), hist.xb[t]);
    if (!std::isfinite(eta)) throw NumericalError("linear predictor is not finite", t + 1);
    hist.resid[t] = hist.gy[t] - eta;
  }
  for (int k = 0; k < h; ++k)
    hist.xb[n + k] = spec.n_covariates > 0 ? lp.covariate_effect(new_x.row(k)) : 0.0;
  hist.next_eta = lp.eta(std::span(hist.gy).first(n), std::span(hist.xb).first(n), std::span(hist.resid).first(n),
                         hist.xb[n]);
  return hist;
}

void require_inference(const FitResult& fit) {
  if (fit.info_singular || fit.covariance.rows() != fit.gamma_hat.size())
    throw SingularInformationError("conditional information matrix is singular");
}

}  // namespace

double empirical_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw DimensionError("empirical_quantile: empty sample");
  const double pos = std::clamp(prob, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ForecastResult predict(const ParamVector& gamma, const ModelSpec& spec, const SeriesData& data,
                       const Eigen::MatrixXd& new_x, int h) {
  data.validate(spec);
  check_future(spec, new_x, h);
  const LinearPredictor lp(gamma, spec, data.x);
  History hist = reconstruct(lp, spec, data, new_x, h);
  const std::size_t n = data.size();

  ForecastResult out;
  out.horizon = h;
  out.point.resize(h);
  for (int k = 0; k < h; ++k) {
    const std::size_t t = n + k;
    const double eta = k == 0 ? hist.next_eta
                              : lp.eta(std::span(hist.gy).first(t), std::span(hist.xb).first(t),
                                       std::span(hist.resid).first(t), hist.xb[t]);
    if (!std::isfinite(eta)) throw NumericalError("forecast linear predictor is not finite", t + 1);
    const auto inv = spec.link.g_inv_checked(eta);
    out.clamp_count += inv.clamped ? 1 : 0;
    out.point[k] = inv.value;
    hist.gy[t] = spec.link.g(inv.value);
    hist.resid[t] = 0.0;
  }
  return out;
}

ForecastResult predict(const FitResult& fit, const SeriesData& data, const Eigen::MatrixXd& new_x, int h) {
  return predict(fit.gamma_hat, fit.spec, data, new_x, h);
}

std::vector<Interval> insample_intervals(const FitResult& fit, const SeriesData& data, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("insample_interval: level must lie in (0, 1]");
  require_inference(fit);
  const FilterOutput f = filter(fit.gamma_hat, data, fit.spec);
  const double zq = special::normal_quantile(1.0 - delta / 2.0);
  std::vector<Interval> out(data.size());
  for (Eigen::Index t = 0; t < f.mu.size(); ++t) {
    const auto z = f.deriv.row(t);
    const double var_eta = std::max(0.0, (z * fit.covariance * z.transpose())(0, 0));
    const double mu = f.mu[t];
    const double half = f.clamped[static_cast<std::size_t>(t)] ? 0.0 : zq * std::sqrt(var_eta) * fit.spec.link.dmu_deta(f.eta[t]);
    out[t] = {std::clamp(mu - half, 0.0, 1.0), std::clamp(mu + half, 0.0, 1.0)};
  }
  return out;
}

Interval insample_interval(const FitResult& fit, const SeriesData& data, int t, double delta) {
  if (t < 1 || static_cast<std::size_t>(t) > data.size()) throw DomainError("insample_interval: t out of range");
  return insample_intervals(fit, data, delta)[static_cast<std::size_t>(t - 1)];
}

ForecastResult bootstrap_intervals(const ParamVector& gamma, const ModelSpec& spec, const SeriesData& data,
                                   const Eigen::MatrixXd& new_x, const BootstrapOptions& options) {
  const int h = options.horizon;
  const int m = options.paths;
  if (m < 50) throw DomainError("bootstrap needs at least 50 paths");
  if (!(options.level > 0.0 && options.level < 1.0)) throw DomainError("bootstrap level must lie in (0, 1)");
  ForecastResult out = predict(gamma, spec, data, new_x, h);
  out.level = options.level;
  out.seed = options.seed;

  const LinearPredictor lp(gamma, spec, data.x);
  const History base = reconstruct(lp, spec, data, new_x, h);
  const std::size_t n = data.size();
  const Link& link = spec.link;

  const unsigned threads = resolve_threads(options.threads);
  std::vector<History> scratch(threads, base);
  std::vector<int> clamps(static_cast<std::size_t>(m), 0);
  out.boot.resize(m, h);

  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t b, unsigned w) {
    History& path = scratch[w];
    Rng rng = Rng::substream(options.seed, b);
    for (int k = 0; k < h; ++k) {
      const std::size_t t = n + k;
      const double eta = k == 0 ? base.next_eta
                                : lp.eta(std::span(path.gy).first(t), std::span(path.xb).first(t),
                                         std::span(path.resid).first(t), path.xb[t]);
      const auto inv = link.g_inv_checked(eta);
      clamps[b] += inv.clamped ? 1 : 0;
      const double y = sample_one(mean_to_shape(inv.value, inv.complement), rng);
      path.gy[t] = link.g(y);
      path.resid[t] = path.gy[t] - eta;
      out.boot(static_cast<Eigen::Index>(b), k) = y;
    }
  });
  out.clamp_count = 0;
  for (int c : clamps) out.clamp_count += c;

  out.intervals.resize(static_cast<std::size_t>(h));
  std::vector<double> column(static_cast<std::size_t>(m));
  for (int k = 0; k < h; ++k) {
    for (int b = 0; b < m; ++b) column[b] = out.boot(b, k);
    std::sort(column.begin(), column.end());
    out.intervals[k] = {empirical_quantile(column, options.level / 2.0),
                        empirical_quantile(column, 1.0 - options.level / 2.0)};
  }
  return out;
}

ForecastResult bootstrap_intervals(const FitResult& fit, const SeriesData& data, const Eigen::MatrixXd& new_x,
                                   const BootstrapOptions& options) {
  return bootstrap_intervals(fit.gamma_hat, fit.spec, data, new_x, options);
}

}  // namespace marma
