#pragma once
// Shared helpers for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "marma/core.hpp"
#include "marma/random.hpp"
#include "marma/simulation.hpp"

namespace testing {

struct Case {
  marma::ModelSpec spec;
  marma::ParamVector gamma;
  marma::SeriesData data;
};

inline double uniform(marma::Rng& rng, double a, double b) { return a + (b - a) * rng.uniform(); }

/// Random orders, link and coefficients; data simulated from the model with
/// harmonic covariates. The returned gamma is a perturbation of the
/// generating one, so it is a generic point, not the maximizer.
inline Case random_case(std::uint64_t seed, marma::LinkKind link, int n) {
  marma::Rng rng(seed);
  marma::ModelSpec spec;
  spec.link = marma::Link(link);
  spec.ar_order = static_cast<int>(rng.next_u64() % 3);
  spec.ma_order = static_cast<int>(rng.next_u64() % 3);
  spec.n_covariates = static_cast<int>(rng.next_u64() % 3);
  std::vector<double> beta, phi, theta;
  for (int i = 0; i < spec.n_covariates; ++i) beta.push_back(uniform(rng, -0.6, 0.6));
  for (int i = 0; i < spec.ar_order; ++i) phi.push_back(uniform(rng, -0.6, 0.6) / spec.ar_order);
  for (int i = 0; i < spec.ma_order; ++i) theta.push_back(uniform(rng, -0.6, 0.6) / spec.ma_order);
  const double alpha = uniform(rng, -0.5, 1.0);
  marma::ScenarioSpec sc(spec, marma::ParamVector::from_parts(spec, alpha, beta, phi, theta));
  sc.n = n;
  sc.burn_in = 50;
  sc.seed = seed ^ 0x9e3779b97f4a7c15ULL;
  for (int i = 0; i < spec.n_covariates; ++i)
    sc.covariates.terms.push_back({i % 2 ? marma::HarmonicTerm::Fn::cos : marma::HarmonicTerm::Fn::sin, 12.0 + 7 * i});
  const marma::SimulatedSeries sim = marma::simulate(sc);
  Eigen::VectorXd g = sc.gamma.flat();
  for (int j = 0; j < g.size(); ++j) g[j] += uniform(rng, -0.1, 0.1);
  return {spec, marma::ParamVector(spec, g), sim.data};
}

/// MARMA(1,1), cloglog, X_t = sin(pi t / 50), the design of the point
/// estimation study.
inline marma::ScenarioSpec harmonic_scenario(int n, double alpha = 0.5, double beta = -0.5, double phi = 0.2,
                                           double theta = -0.4) {
  marma::ModelSpec spec;
  spec.ar_order = 1;
  spec.ma_order = 1;
  spec.n_covariates = 1;
  spec.link = marma::Link(marma::LinkKind::cloglog);
  marma::ScenarioSpec sc(spec, marma::ParamVector::from_parts(spec, alpha, {beta}, {phi}, {theta}));
  sc.n = n;
  sc.burn_in = 100;
  sc.covariates.terms = {{marma::HarmonicTerm::Fn::sin, 100.0}};
  return sc;
}

/// MARMA(p,q) without covariates.
inline marma::ScenarioSpec arma_scenario(int n, double alpha, std::vector<double> phi, std::vector<double> theta,
                                         marma::LinkKind link = marma::LinkKind::cloglog) {
  marma::ModelSpec spec;
  spec.ar_order = static_cast<int>(phi.size());
  spec.ma_order = static_cast<int>(theta.size());
  spec.link = marma::Link(link);
  marma::ScenarioSpec sc(spec, marma::ParamVector::from_parts(spec, alpha, {}, phi, theta));
  sc.n = n;
  sc.burn_in = 100;
  return sc;
}

/// Straightforward re-coding of the eta recursion for cross-checks.
inline Eigen::VectorXd eta_oracle(const marma::ParamVector& gamma, const marma::SeriesData& d,
                                  const marma::ModelSpec& spec) {
  const long n = static_cast<long>(d.size());
  const int p = spec.ar_order, q = spec.ma_order, r = spec.n_covariates;
  Eigen::RowVectorXd xbar = Eigen::RowVectorXd::Zero(r);
  if (p > 0 && r > 0) {
    for (int i = 0; i < p; ++i) xbar += d.x.row(i);
    xbar /= p;
  }
  auto gy = [&](long t) { return t < 0 ? 0.0 : spec.link.g(d.y[t]); };
  auto xrow = [&](long t) -> Eigen::RowVectorXd { return t < 0 ? xbar : Eigen::RowVectorXd(d.x.row(t)); };
  Eigen::VectorXd eta(n), res(n);
  for (long t = 0; t < n; ++t) {
    double e = gamma.alpha();
    if (r > 0) e += xrow(t).dot(gamma.beta());
    for (int i = 1; i <= p; ++i) {
      const double xb = r > 0 ? xrow(t - i).dot(gamma.beta()) : 0.0;
      e += gamma.phi()[i - 1] * (gy(t - i) - xb);
    }
    for (int j = 1; j <= q; ++j) e += gamma.theta()[j - 1] * (t - j >= 0 ? res[t - j] : 0.0);
    eta[t] = e;
    res[t] = gy(t) - e;
  }
  return eta;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Five-point central difference.
template <class F>
double derivative(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace testing
