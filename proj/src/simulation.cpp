#include "marma/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>

#include "marma/diagnostics.hpp"
#include "marma/distribution.hpp"
#include "marma/errors.hpp"
#include "marma/forecast.hpp"
#include "marma/parallel.hpp"

namespace marma {
namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t replica) {
  return mix_seed(mix_seed(seed ^ 0x5bd1e9955bd1e995ULL) + replica);
}

ReplicaFit fit_replica(const SeriesData& data, const ModelSpec& model, const FitOptions& options,
                       FitResult* keep = nullptr) {
  ReplicaFit out;
  try {
    FitResult res = fit(data, model, options);
    out.estimate = res.gamma_hat.flat();
    out.std_errors = res.std_errors;
    out.ok = res.converged;
    if (!res.converged) out.failure = res.message;
    if (keep) *keep = std::move(res);
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

}  // namespace

double HarmonicTerm::operator()(double t) const {
  const double arg = 2.0 * std::numbers::pi * t / period;
  return fn == Fn::sin ? std::sin(arg) : std::cos(arg);
}

std::string HarmonicTerm::label() const {
  std::ostringstream os;
  os << (fn == Fn::sin ? "sin" : "cos") << "(2*pi*t/" << period << ")";
  return os.str();
}

Eigen::MatrixXd CovariateRule::rows(long first, long count) const {
  Eigen::MatrixXd x(count, size());
  for (long i = 0; i < count; ++i)
    for (int j = 0; j < size(); ++j) x(i, j) = terms[j](static_cast<double>(first + i));
  return x;
}

void ScenarioSpec::validate() const {
  model.validate();
  if (gamma.size() != model.num_params()) throw DimensionError("scenario parameters do not match the model");
  if (covariates.size() != model.n_covariates)
    throw DimensionError("scenario covariate rule has " + std::to_string(covariates.size()) +
                         " terms, model expects " + std::to_string(model.n_covariates));
  for (const auto& term : covariates.terms)
    if (!(term.period != 0.0) || !std::isfinite(term.period)) throw DomainError("harmonic period must be nonzero");
  if (n < 1) throw DomainError("scenario sample size must be positive");
  if (burn_in < 0) throw DomainError("burn-in must be nonnegative");
  if (replicas < 1) throw DomainError("replica count must be at least 1");
}

SimulatedSeries simulate(const ScenarioSpec& scenario, Rng& rng, std::optional<int> length) {
  scenario.validate();
  const int keep = length.value_or(scenario.n);
  if (keep < 1) throw DomainError("simulation length must be positive");
  const int total = scenario.burn_in + keep;
  const ModelSpec& model = scenario.model;
  const Link& link = model.link;

  const Eigen::MatrixXd x_all = scenario.covariates.rows(1, total);
  const LinearPredictor lp(scenario.gamma, model, x_all);
  std::vector<double> gy(total), xb(total), resid(total), y(total), mu(total);
  for (int s = 0; s < total; ++s) {
    xb[s] = model.n_covariates > 0 ? lp.covariate_effect(x_all.row(s)) : 0.0;
    const double eta = lp.eta(std::span(gy).first(s), std::span(xb).first(s), std::span(resid).first(s), xb[s]);
    if (!std::isfinite(eta))
      throw NumericalError("simulated linear predictor is not finite", static_cast<std::size_t>(s + 1));
    const auto inv = link.g_inv_checked(eta);
    mu[s] = inv.value;
    y[s] = sample_one(mean_to_shape(inv.value, inv.complement), rng);
    gy[s] = link.g(y[s]);
    resid[s] = gy[s] - eta;
  }

  SimulatedSeries out;
  out.data.y = Eigen::Map<const Eigen::VectorXd>(y.data() + scenario.burn_in, keep);
  out.data.x = x_all.bottomRows(keep);
  out.mu = Eigen::Map<const Eigen::VectorXd>(mu.data() + scenario.burn_in, keep);
  return out;
}

SimulatedSeries simulate(const ScenarioSpec& scenario) {
  Rng rng(scenario.seed);
  return simulate(scenario, rng);
}

std::vector<ParamSummary> summarize(const std::vector<Eigen::VectorXd>& estimates,
                                    const std::vector<std::string>& names, const Eigen::VectorXd& truth) {
  std::vector<ParamSummary> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    ParamSummary s;
    s.name = names[j];
    s.truth = j < static_cast<std::size_t>(truth.size()) ? truth[j] : std::nan("");
    std::vector<double> col;
    col.reserve(estimates.size());
    for (const auto& e : estimates) col.push_back(e[static_cast<Eigen::Index>(j)]);
    if (col.empty()) {
      s.mean = s.median = s.sd = std::nan("");
    } else {
      double sum = 0.0;
      for (double v : col) sum += v;
      s.mean = sum / col.size();
      double ss = 0.0;
      for (double v : col) ss += (v - s.mean) * (v - s.mean);
      s.sd = col.size() > 1 ? std::sqrt(ss / (col.size() - 1)) : 0.0;
      s.median = median_of(col);
    }
    out.push_back(s);
  }
  return out;
}

McReport mc_point_estimation(const ScenarioSpec& scenario, const McOptions& options) {
  scenario.validate();
  const ModelSpec model = options.fit_model.value_or(scenario.model);
  McReport report;
  report.kind = "point";
  report.replicas = scenario.replicas;
  report.fits.resize(static_cast<std::size_t>(scenario.replicas));

  parallel_for(report.fits.size(), resolve_threads(options.threads), [&](std::size_t i, unsigned) {
    Rng rng = Rng::substream(scenario.seed, i);
    try {
      const SimulatedSeries sim = simulate(scenario, rng);
      report.fits[i] = fit_replica(sim.data, model, options.fit);
    } catch (const std::exception& e) {
      report.fits[i].failure = e.what();
    }
  });

  std::vector<Eigen::VectorXd> good, all;
  for (const auto& f : report.fits) {
    if (f.estimate.size()) all.push_back(f.estimate);
    if (f.ok) good.push_back(f.estimate);
  }
  report.n_converged = static_cast<int>(good.size());
  report.n_failed = report.replicas - report.n_converged;
  const auto names = ParamVector::names(model);
  const Eigen::VectorXd truth = model == scenario.model ? scenario.gamma.flat() : Eigen::VectorXd();
  report.converged_only = summarize(good, names, truth);
  report.all_replicas = summarize(all, names, truth);
  return report;
}

McReport mc_goodness_of_fit(const ScenarioSpec& scenario, const McOptions& options) {
  scenario.validate();
  const ModelSpec model = options.fit_model.value_or(scenario.model);
  McReport report;
  report.kind = "gof";
  report.replicas = scenario.replicas;
  report.fits.resize(static_cast<std::size_t>(scenario.replicas));
  std::vector<int> ks_reject(report.fits.size(), 0), ad_reject(report.fits.size(), 0);

  parallel_for(report.fits.size(), resolve_threads(options.threads), [&](std::size_t i, unsigned) {
    Rng rng = Rng::substream(scenario.seed, i);
    try {
      const SimulatedSeries sim = simulate(scenario, rng);
      FitResult res(model);
      report.fits[i] = fit_replica(sim.data, model, options.fit, &res);
      if (!report.fits[i].ok) return;
      const ResidualSet rs = residuals(res, sim.data);
      const std::span<const double> z(rs.quantile.data(), static_cast<std::size_t>(rs.quantile.size()));
      ks_reject[i] = ks_normality(z).p_value < 0.05;
      ad_reject[i] = ad_normality(z).p_value < 0.05;
    } catch (const std::exception& e) {
      report.fits[i].ok = false;
      report.fits[i].failure = e.what();
    }
  });

  int ks = 0, ad = 0;
  for (std::size_t i = 0; i < report.fits.size(); ++i) {
    if (!report.fits[i].ok) continue;
    ++report.n_converged;
    ks += ks_reject[i];
    ad += ad_reject[i];
  }
  report.n_failed = report.replicas - report.n_converged;
  if (report.n_converged > 0) {
    report.ks_rejection = static_cast<double>(ks) / report.n_converged;
    report.ad_rejection = static_cast<double>(ad) / report.n_converged;
  }
  return report;
}

McReport mc_coverage(const ScenarioSpec& scenario, int horizon, int paths, const std::vector<double>& levels,
                     const McOptions& options) {
  scenario.validate();
  if (horizon < 1) throw DomainError("coverage horizon must be at least 1");
  if (levels.empty()) throw DomainError("coverage needs at least one level");
  for (double d : levels)
    if (!(d > 0.0 && d < 1.0)) throw DomainError("coverage levels must lie in (0, 1)");
  const ModelSpec model = options.fit_model.value_or(scenario.model);
  const std::size_t reps = static_cast<std::size_t>(scenario.replicas);
  const std::size_t nl = levels.size();

  McReport report;
  report.kind = "coverage";
  report.replicas = scenario.replicas;
  report.levels = levels;
  report.fits.resize(reps);
  // hits[i][l * horizon + k], widths likewise
  std::vector<std::vector<char>> hits(reps);
  std::vector<std::vector<double>> widths(reps);

  parallel_for(reps, resolve_threads(options.threads), [&](std::size_t i, unsigned) {
    Rng rng = Rng::substream(scenario.seed, i);
    try {
      const SimulatedSeries sim = simulate(scenario, rng, scenario.n + horizon);
      SeriesData train{sim.data.y.head(scenario.n), sim.data.x.topRows(scenario.n)};
      const Eigen::MatrixXd future_x = sim.data.x.bottomRows(horizon);
      FitResult res(model);
      report.fits[i] = fit_replica(train, model, options.fit, &res);
      if (!report.fits[i].ok) return;

      BootstrapOptions bo;
      bo.horizon = horizon;
      bo.paths = paths;
      bo.level = levels.front();
      bo.seed = bootstrap_seed(scenario.seed, i);
      bo.threads = 1;
      const ForecastResult fc = bootstrap_intervals(res, train, future_x, bo);

      hits[i].assign(nl * horizon, 0);
      widths[i].assign(nl * horizon, 0.0);
      std::vector<double> column(static_cast<std::size_t>(paths));
      for (int k = 0; k < horizon; ++k) {
        for (int b = 0; b < paths; ++b) column[b] = fc.boot(b, k);
        std::sort(column.begin(), column.end());
        const double truth = sim.data.y[scenario.n + k];
        for (std::size_t l = 0; l < nl; ++l) {
          const double lo = empirical_quantile(column, levels[l] / 2.0);
          const double hi = empirical_quantile(column, 1.0 - levels[l] / 2.0);
          hits[i][l * horizon + k] = lo <= truth && truth <= hi;
          widths[i][l * horizon + k] = hi - lo;
        }
      }
    } catch (const std::exception& e) {
      report.fits[i].ok = false;
      report.fits[i].failure = e.what();
    }
  });

  report.coverage.assign(nl, std::vector<double>(horizon, 0.0));
  report.mean_width.assign(nl, std::vector<double>(horizon, 0.0));
  for (std::size_t i = 0; i < reps; ++i) {
    if (!report.fits[i].ok) continue;
    ++report.n_converged;
    for (std::size_t l = 0; l < nl; ++l)
      for (int k = 0; k < horizon; ++k) {
        report.coverage[l][k] += hits[i][l * horizon + k];
        report.mean_width[l][k] += widths[i][l * horizon + k];
      }
  }
  report.n_failed = report.replicas - report.n_converged;
  if (report.n_converged > 0)
    for (std::size_t l = 0; l < nl; ++l)
      for (int k = 0; k < horizon; ++k) {
        report.coverage[l][k] /= report.n_converged;
        report.mean_width[l][k] /= report.n_converged;
      }
  return report;
}

}  // namespace marma
