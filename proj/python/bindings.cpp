#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "marma/diagnostics.hpp"
#include "marma/distribution.hpp"
#include "marma/errors.hpp"
#include "marma/estimation.hpp"
#include "marma/forecast.hpp"
#include "marma/random.hpp"
#include "marma/simulation.hpp"

namespace py = pybind11;
using namespace marma;

namespace {

ModelSpec make_spec(int ar, int ma, int r, const std::string& link) {
  ModelSpec s;
  s.ar_order = ar;
  s.ma_order = ma;
  s.n_covariates = r;
  s.link = Link::from_name(link);
  s.validate();
  return s;
}

SeriesData make_data(const Eigen::VectorXd& y, const std::optional<Eigen::MatrixXd>& x) {
  SeriesData d;
  d.y = y;
  d.x = x ? *x : Eigen::MatrixXd(y.size(), 0);
  return d;
}

// A fitted model together with the data it was fitted to.
struct Fitted {
  FitResult fit;
  SeriesData data;
};

Eigen::MatrixXd future_x(const Fitted& f, const std::optional<Eigen::MatrixXd>& new_x, int h) {
  if (new_x) return *new_x;
  if (f.fit.spec.n_covariates > 0) throw DimensionError("new_x is required when the model has covariates");
  return Eigen::MatrixXd(h, 0);
}

py::dict forecast_dict(const ForecastResult& r) {
  py::dict d;
  d["point"] = r.point;
  if (r.has_intervals()) {
    std::vector<double> lo, hi;
    for (const Interval& i : r.intervals) {
      lo.push_back(i.lower);
      hi.push_back(i.upper);
    }
    d["lower"] = lo;
    d["upper"] = hi;
    d["paths"] = r.boot;
  }
  d["clamp_count"] = r.clamp_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(marma, m) {
  m.doc() = "Matsuoka autoregressive moving average models for series on (0, 1)";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<SingularInformationError>(m, "SingularInformationError", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("pdf", [](double x, double p) { return pdf(x, Shape(p)); }, py::arg("x"), py::arg("p"));
  m.def("cdf", [](double x, double p) { return cdf(x, Shape(p)); }, py::arg("x"), py::arg("p"));
  m.def("quantile", [](double q, double p) { return quantile(q, Shape(p)); }, py::arg("q"), py::arg("p"));
  m.def("mean", [](double p) { return mean(Shape(p)); }, py::arg("p"));
  m.def("variance", [](double p) { return variance(Shape(p)); }, py::arg("p"));
  m.def("mean_to_shape", [](double mu) { return mean_to_shape(mu).value(); }, py::arg("mu"));
  m.def(
      "sample",
      [](double p, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return sample(Shape(p), rng, n);
      },
      py::arg("p"), py::arg("n"), py::arg("seed") = 1);

  m.def("link", [](const std::string& name, double x) { return Link::from_name(name).g(x); }, py::arg("name"),
        py::arg("x"));
  m.def("link_inverse", [](const std::string& name, double eta) { return Link::from_name(name).g_inv(eta); },
        py::arg("name"), py::arg("eta"));

  m.def(
      "simulate",
      [](int n, double alpha, std::vector<double> beta, std::vector<double> phi, std::vector<double> theta,
         const std::string& link, std::vector<std::pair<std::string, double>> harmonics, int burn_in,
         std::uint64_t seed) {
        const ModelSpec spec = make_spec(static_cast<int>(phi.size()), static_cast<int>(theta.size()),
                                         static_cast<int>(beta.size()), link);
        ScenarioSpec sc(spec, ParamVector::from_parts(spec, alpha, beta, phi, theta));
        sc.n = n;
        sc.burn_in = burn_in;
        sc.seed = seed;
        for (const auto& [fn, period] : harmonics) {
          if (fn != "sin" && fn != "cos") throw DomainError("harmonic must be 'sin' or 'cos'");
          sc.covariates.terms.push_back({fn == "sin" ? HarmonicTerm::Fn::sin : HarmonicTerm::Fn::cos, period});
        }
        const SimulatedSeries s = simulate(sc);
        py::dict d;
        d["y"] = s.data.y;
        d["x"] = s.data.x;
        d["mu"] = s.mu;
        return d;
      },
      py::arg("n"), py::arg("alpha"), py::arg("beta") = std::vector<double>{}, py::arg("phi") = std::vector<double>{},
      py::arg("theta") = std::vector<double>{}, py::arg("link") = "cloglog",
      py::arg("harmonics") = std::vector<std::pair<std::string, double>>{}, py::arg("burn_in") = 100,
      py::arg("seed") = 1);

  py::class_<Fitted>(m, "Fit")
      .def_property_readonly("names", [](const Fitted& f) { return ParamVector::names(f.fit.spec); })
      .def_property_readonly("estimate", [](const Fitted& f) { return f.fit.gamma_hat.flat(); })
      .def_property_readonly("std_errors", [](const Fitted& f) { return f.fit.std_errors; })
      .def_property_readonly("covariance", [](const Fitted& f) { return f.fit.covariance; })
      .def_property_readonly("loglik", [](const Fitted& f) { return f.fit.loglik; })
      .def_property_readonly("aic", [](const Fitted& f) { return f.fit.ic.aic; })
      .def_property_readonly("bic", [](const Fitted& f) { return f.fit.ic.bic; })
      .def_property_readonly("hqc", [](const Fitted& f) { return f.fit.ic.hqc; })
      .def_property_readonly("converged", [](const Fitted& f) { return f.fit.converged; })
      .def_property_readonly("message", [](const Fitted& f) { return f.fit.message; })
      .def_property_readonly("score_norm", [](const Fitted& f) { return f.fit.score_norm(); })
      .def(
          "confint",
          [](const Fitted& f, double delta) {
            std::vector<std::pair<double, double>> out;
            for (const Interval& i : confint(f.fit, delta)) out.emplace_back(i.lower, i.upper);
            return out;
          },
          py::arg("delta") = 0.05)
      .def(
          "residuals",
          [](const Fitted& f) {
            const ResidualSet r = residuals(f.fit, f.data);
            py::dict d;
            d["simple"] = r.simple;
            d["quantile"] = r.quantile;
            return d;
          })
      .def(
          "predict",
          [](const Fitted& f, int h, const std::optional<Eigen::MatrixXd>& new_x) {
            return forecast_dict(predict(f.fit, f.data, future_x(f, new_x, h), h));
          },
          py::arg("h"), py::arg("new_x") = py::none())
      .def(
          "bootstrap",
          [](const Fitted& f, int h, int paths, double level, std::uint64_t seed, int threads,
             const std::optional<Eigen::MatrixXd>& new_x) {
            BootstrapOptions o;
            o.horizon = h;
            o.paths = paths;
            o.level = level;
            o.seed = seed;
            o.threads = threads;
            py::gil_scoped_release release;
            const ForecastResult r = bootstrap_intervals(f.fit, f.data, future_x(f, new_x, h), o);
            py::gil_scoped_acquire acquire;
            return forecast_dict(r);
          },
          py::arg("h"), py::arg("paths") = 500, py::arg("level") = 0.05, py::arg("seed") = 1, py::arg("threads") = 1,
          py::arg("new_x") = py::none());

  m.def(
      "fit",
      [](const Eigen::VectorXd& y, const std::optional<Eigen::MatrixXd>& x, int ar, int ma, const std::string& link,
         int max_evals) {
        Fitted out{FitResult(ModelSpec{}), make_data(y, x)};
        const ModelSpec spec = make_spec(ar, ma, static_cast<int>(out.data.x.cols()), link);
        FitOptions o;
        o.max_evals = max_evals;
        out.fit = fit(out.data, spec, o);
        return out;
      },
      py::arg("y"), py::arg("x") = py::none(), py::arg("ar") = 0, py::arg("ma") = 0, py::arg("link") = "cloglog",
      py::arg("max_evals") = 4000);

  m.def(
      "ks_normality",
      [](const std::vector<double>& z, bool standard) {
        const TestResult t = ks_normality(z, standard ? NormalityNull::standard : NormalityNull::composite);
        return std::make_pair(t.statistic, t.p_value);
      },
      py::arg("z"), py::arg("standard") = false);
  m.def(
      "ad_normality",
      [](const std::vector<double>& z, bool standard) {
        const TestResult t = ad_normality(z, standard ? NormalityNull::standard : NormalityNull::composite);
        return std::make_pair(t.statistic, t.p_value);
      },
      py::arg("z"), py::arg("standard") = false);
}
