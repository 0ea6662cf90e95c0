#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "marma/core.hpp"
#include "marma/errors.hpp"
#include "marma/estimation.hpp"
#include "marma/simulation.hpp"
#include "support.hpp"

using namespace marma;

namespace {

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-11) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

SeriesData draw(ScenarioSpec sc, std::uint64_t seed) {
  sc.seed = seed;
  return simulate(sc).data;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("information criteria") {
  const InformationCriteria z = information_criteria(-120.0, 50, 0);
  CHECK(z.aic == 240.0);
  CHECK(z.bic == 240.0);
  CHECK(z.hqc == 240.0);
  const InformationCriteria ic = information_criteria(35.5, 200, 4);
  CHECK(ic.aic == doctest::Approx(-71.0 + 8));
  CHECK(ic.bic == doctest::Approx(-71.0 + 4 * std::log(200.0)));
  CHECK(ic.hqc == doctest::Approx(-71.0 + 8 * std::log(std::log(200.0))));
  for (std::size_t n = 8; n < 2000; n *= 3) CHECK(information_criteria(1.0, n, 3).bic > information_criteria(1.0, n, 3).aic);
}

TEST_CASE("intercept-only fit matches a golden-section search") {
  for (LinkKind link : {LinkKind::logit, LinkKind::cloglog, LinkKind::loglog}) {
    const ScenarioSpec sc = testing::arma_scenario(300, 0.3, {}, {}, link);
    const SeriesData d = draw(sc, 11);
    const FitResult f = fit(d, sc.model);
    REQUIRE(f.converged);
    const double oracle = golden_max(
        [&](double a) { return loglik(ParamVector::from_parts(sc.model, a, {}, {}, {}), d, sc.model); }, -5.0, 5.0);
    CHECK(std::abs(f.gamma_hat.alpha() - oracle) < 1e-6);
  }
}

TEST_CASE("fitted fields") {
  const ScenarioSpec sc = testing::harmonic_scenario(500);
  const SeriesData d = draw(sc, 3);
  const FitResult f = fit(d, sc.model);
  REQUIRE(f.converged);
  CHECK(f.score_norm() <= FitOptions{}.grad_tol);
  CHECK(f.std_errors.size() == 4);
  CHECK((f.std_errors.array() > 0).all());
  CHECK(f.loglik == doctest::Approx(loglik(f.gamma_hat, d, sc.model)).epsilon(1e-14));
  CHECK(f.ic.aic == doctest::Approx(-2 * f.loglik + 8));
  CHECK(f.n_obs == 500);
  CHECK(f.n_evals > 0);
  const Eigen::MatrixXd inv = f.cond_info.inverse();
  for (int j = 0; j < 4; ++j) CHECK(f.std_errors[j] == doctest::Approx(std::sqrt(inv(j, j))).epsilon(1e-10));
  // a local maximum: small moves never increase the likelihood
  for (int j = 0; j < 4; ++j) {
    for (double h : {-1e-3, 1e-3}) {
      ParamVector g = f.gamma_hat;
      g.flat()[j] += h;
      CHECK(loglik(g, d, sc.model) < f.loglik);
    }
  }
}

TEST_CASE("degenerate data") {
  const ModelSpec s = testing::arma_scenario(10, 0.0, {0.1}, {0.1}).model;
  SeriesData d;
  d.y = Eigen::VectorXd::Constant(50, 0.4);
  d.x.resize(50, 0);
  CHECK_THROWS_AS(fit(d, s), DataError);
  d.y = Eigen::Vector3d(0.2, 0.4, 0.6);
  d.x.resize(3, 0);
  CHECK_THROWS_AS(fit(d, s), DataError);
}

TEST_CASE("non-convergence is reported with the best iterate") {
  const ScenarioSpec sc = testing::harmonic_scenario(200);
  const SeriesData d = draw(sc, 5);
  FitOptions o;
  o.max_evals = 3;
  o.polish = false;
  const FitResult f = fit(d, sc.model, o);
  CHECK_FALSE(f.converged);
  CHECK_FALSE(f.message.empty());
  CHECK(std::isfinite(f.loglik));
  CHECK(f.loglik >= loglik(default_start(d, sc.model), d, sc.model));
}

TEST_CASE("singular information is flagged") {
  ScenarioSpec sc = testing::arma_scenario(200, 0.4, {0.3}, {});
  SeriesData d = draw(sc, 9);
  ModelSpec s = sc.model;
  s.n_covariates = 1;
  d.x = Eigen::MatrixXd::Zero(200, 1);
  const FitResult f = fit(d, s);
  CHECK(f.info_singular);
  CHECK(f.std_errors.size() == 0);
}

TEST_CASE("options are validated") {
  FitOptions o;
  o.grad_tol = 0.0;
  CHECK_THROWS(o.validate());
  o = FitOptions{};
  o.max_evals = 0;
  CHECK_THROWS(o.validate());
}

TEST_CASE("default start: least squares without ARMA terms") {
  ModelSpec s;
  s.n_covariates = 2;
  s.link = Link(LinkKind::logit);
  ScenarioSpec sc(s, ParamVector::from_parts(s, 0.2, {0.5, -0.3}, {}, {}));
  sc.n = 150;
  sc.covariates.terms = {{HarmonicTerm::Fn::sin, 12.0}, {HarmonicTerm::Fn::cos, 12.0}};
  const SeriesData d = draw(sc, 4);
  Eigen::MatrixXd a(150, 3);
  Eigen::VectorXd gy(150);
  for (int t = 0; t < 150; ++t) {
    a(t, 0) = 1.0;
    a.block(t, 1, 1, 2) = d.x.row(t);
    gy[t] = s.link.g(d.y[t]);
  }
  const Eigen::VectorXd ls = a.colPivHouseholderQr().solve(gy);
  const ParamVector st = default_start(d, s);
  CHECK((st.flat() - ls).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(default_start(d, s).flat() == st.flat());
}

TEST_CASE("default start beats the zero vector") {
  const ScenarioSpec sc = testing::harmonic_scenario(300);
  int better = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SeriesData d = draw(sc, seed);
    const ParamVector st = default_start(d, sc.model);
    CHECK(st.theta()[0] == 0.0);
    if (loglik(st, d, sc.model) >= loglik(ParamVector(sc.model), d, sc.model)) ++better;
  }
  CHECK(better >= 95);
}

TEST_CASE("an unused MA term is estimated near zero") {
  ScenarioSpec sc = testing::arma_scenario(300, 0.5, {0.4}, {});
  ModelSpec s = sc.model;
  s.ma_order = 1;
  int inside = 0, fitted = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const FitResult f = fit(draw(sc, seed), s);
    if (!f.converged || f.info_singular) continue;
    ++fitted;
    if (std::abs(f.gamma_hat.theta()[0]) < 3 * f.std_errors[s.num_params() - 1]) ++inside;
  }
  CHECK(fitted >= 95);
  CHECK(inside >= 0.9 * fitted);
}

TEST_CASE("rescaling a covariate rescales its coefficient") {
  ModelSpec s;
  s.n_covariates = 1;
  s.link = Link(LinkKind::cloglog);
  ScenarioSpec sc(s, ParamVector::from_parts(s, 0.3, {-0.6}, {}, {}));
  sc.n = 400;
  sc.covariates.terms = {{HarmonicTerm::Fn::sin, 100.0}};
  SeriesData d = draw(sc, 21);
  const FitResult f1 = fit(d, s);
  for (double c : {10.0, 0.25}) {
    SeriesData dc = d;
    dc.x *= c;
    const FitResult f2 = fit(dc, s);
    REQUIRE(f1.converged);
    REQUIRE(f2.converged);
    CHECK(std::abs(f2.gamma_hat.beta()[0] - f1.gamma_hat.beta()[0] / c) < 1e-4);
    CHECK(std::abs(f2.gamma_hat.alpha() - f1.gamma_hat.alpha()) < 1e-4);
  }
}

TEST_CASE("estimation error shrinks with the sample size") {
  // designs whose paths stay away from the boundary (see the simulation notes)
  const std::vector<std::vector<double>> designs = {{0.5, 0.2, -0.4}, {0.5, -0.4, -0.2}, {1.0, 0.4, 0.2}, {1.0, 0.2, -0.4}};
  for (const auto& d : designs) {
    double err[2];
    const int sizes[2] = {100, 500};
    for (int k = 0; k < 2; ++k) {
      const ScenarioSpec sc = testing::harmonic_scenario(sizes[k], d[0], -0.5, d[1], d[2]);
      std::vector<double> e;
      for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const FitResult f = fit(draw(sc, seed), sc.model);
        if (f.converged) e.push_back((f.gamma_hat.flat() - sc.gamma.flat()).cwiseAbs().sum());
      }
      err[k] = median(e);
    }
    CAPTURE(d[1]);
    CHECK(err[1] < err[0]);
  }
}

TEST_CASE("BIC prefers the generating order") {
  // With (phi, theta) = (0.2, -0.4) the AR part only adds psi_2 = -0.04 to the
  // MA(1) representation, too little for BIC at n = 500; (-0.4, -0.2) gives
  // psi = (-0.6, 0.24, ...), which neither pure order matches.
  const ScenarioSpec sc = testing::harmonic_scenario(500, 0.5, -0.5, -0.4, -0.2);
  const std::vector<std::pair<int, int>> orders = {{0, 1}, {1, 0}, {1, 1}, {2, 2}};
  std::vector<std::vector<double>> bic(orders.size());
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SeriesData d = draw(sc, seed);
    for (std::size_t k = 0; k < orders.size(); ++k) {
      ModelSpec s = sc.model;
      s.ar_order = orders[k].first;
      s.ma_order = orders[k].second;
      bic[k].push_back(fit(d, s).ic.bic);
    }
  }
  std::vector<double> med;
  for (const auto& b : bic) med.push_back(median(b));
  CAPTURE(med[0]);
  CAPTURE(med[1]);
  CAPTURE(med[2]);
  CAPTURE(med[3]);
  CHECK(std::min_element(med.begin(), med.end()) - med.begin() == 2);
}

}
