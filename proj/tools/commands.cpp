#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "marma/diagnostics.hpp"
#include "marma/errors.hpp"
#include "marma/estimation.hpp"
#include "marma/forecast.hpp"
#include "marma/simulation.hpp"

namespace marma::cli {

namespace {

struct Flags {
  std::string data, config, out, model, future, order, link, harmonics, format;
  std::uint64_t seed = 0;
  int threads = 0, horizon = 0, boot = 0;
  double level = 0.0;
  CLI::Option *seed_opt = nullptr, *threads_opt = nullptr, *horizon_opt = nullptr, *boot_opt = nullptr,
              *level_opt = nullptr, *order_opt = nullptr, *link_opt = nullptr, *harmonics_opt = nullptr,
              *config_opt = nullptr;
};

void parse_order_flag(const std::string& text, RunConfig& config) {
  const auto comma = text.find(',');
  auto parse_one = [&](const std::string& s) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 0) throw ValidationError("--order: expected p,q with non-negative integers, got '" + text + "'");
    return v;
  };
  if (comma == std::string::npos) throw ValidationError("--order: expected p,q, got '" + text + "'");
  config.ar_order = parse_one(text.substr(0, comma));
  config.ma_order = parse_one(text.substr(comma + 1));
}

RunConfig load_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : read_config(f.config);
  if (f.order_opt && f.order_opt->count()) parse_order_flag(f.order, c);
  if (f.link_opt && f.link_opt->count()) c.link = f.link;
  if (f.harmonics_opt && f.harmonics_opt->count()) c.data.harmonics = parse_harmonics(f.harmonics);
  if (f.horizon_opt && f.horizon_opt->count()) c.forecast.horizon = f.horizon;
  if (f.boot_opt && f.boot_opt->count()) c.forecast.paths = f.boot;
  if (f.level_opt && f.level_opt->count()) c.forecast.level = f.level;
  return c;
}

// --threads, then MARMA_THREADS, then the config, then 1.
int thread_count(const Flags& f, const RunConfig& c) {
  if (f.threads_opt && f.threads_opt->count()) {
    if (f.threads < 1) throw ValidationError("--threads must be at least 1");
    return f.threads;
  }
  if (const char* env = std::getenv("MARMA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      throw ValidationError(std::string("MARMA_THREADS: expected a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return c.threads > 0 ? c.threads : 1;
}

ModelSpec model_spec(const RunConfig& c, int n_covariates) {
  ModelSpec spec;
  spec.ar_order = c.ar_order;
  spec.ma_order = c.ma_order;
  spec.n_covariates = n_covariates;
  try {
    spec.link = Link::from_name(c.link);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("link: ") + e.what());
  }
  spec.validate();
  return spec;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    write_text(path, text);
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string spec_label(const ModelSpec& spec) {
  return "MARMA(" + std::to_string(spec.ar_order) + "," + std::to_string(spec.ma_order) + "), " +
         spec.link.name() + " link, " + std::to_string(spec.n_covariates) + " covariate(s)";
}

// ---- diagnostics summary ---------------------------------------------------

json test_json(const TestResult& t) { return {{"statistic", t.statistic}, {"p_value", t.p_value}}; }

double mean_of(const Eigen::VectorXd& v) { return v.size() ? v.mean() : 0.0; }

double sd_of(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

json wald_json(const FitResult& fit) {
  const auto names = ParamVector::names(fit.spec);
  json arr = json::array();
  for (int j = 0; j < fit.gamma_hat.size(); ++j) {
    json w;
    w["name"] = names[static_cast<std::size_t>(j)];
    w["estimate"] = fit.gamma_hat.flat()[j];
    if (fit.std_errors.size()) {
      const WaldResult r = wald_test(fit, j, 0.0);
      w["std_error"] = fit.std_errors[j];
      w["z"] = r.z;
      w["p_value"] = r.p_value;
    } else {
      w["std_error"] = nullptr;
      w["z"] = nullptr;
      w["p_value"] = nullptr;
    }
    arr.push_back(w);
  }
  return arr;
}

json diagnostics_json(const FitResult& fit, const SeriesData& data, bool with_series) {
  const ResidualSet res = residuals(fit, data);
  const std::span<const double> z(res.quantile.data(), static_cast<std::size_t>(res.quantile.size()));
  json j;
  j["n_obs"] = data.size();
  json q;
  q["mean"] = mean_of(res.quantile);
  q["sd"] = sd_of(res.quantile);
  if (z.size() >= 8) {
    q["ks"] = test_json(ks_normality(z));
    q["ad"] = test_json(ad_normality(z));
    q["ks_standard_normal"] = test_json(ks_normality(z, NormalityNull::standard));
    q["ad_standard_normal"] = test_json(ad_normality(z, NormalityNull::standard));
  }
  j["quantile_residuals"] = q;
  j["simple_residuals"] = {{"mean", mean_of(res.simple)}, {"sd", sd_of(res.simple)}};
  const int max_lag = std::min<int>(20, (static_cast<int>(z.size()) - 1) / 2);
  if (max_lag >= 1) {
    const AcfResult acf = residual_acf(z, max_lag);
    int outside = 0;
    for (int k = 1; k <= max_lag; ++k) outside += std::abs(acf.acf[static_cast<std::size_t>(k)]) > acf.band;
    j["acf"] = {{"max_lag", max_lag},
                {"band", acf.band},
                {"values", std::vector<double>(acf.acf.begin() + 1, acf.acf.end())},
                {"lags_outside_band", outside}};
  }
  j["cdf_clamp_count"] = res.clamp_count;
  if (with_series) {
    j["residuals"] = {
        {"quantile", std::vector<double>(res.quantile.data(), res.quantile.data() + res.quantile.size())},
        {"simple", std::vector<double>(res.simple.data(), res.simple.data() + res.simple.size())}};
  }
  return j;
}

std::string fit_table(const FitResult& fit, const json& diag) {
  std::ostringstream os;
  os << spec_label(fit.spec) << ", n = " << fit.n_obs << '\n';
  os << (fit.converged ? "converged" : "NOT converged") << " after " << fit.n_evals << " evaluations";
  if (!fit.message.empty()) os << " (" << fit.message << ")";
  os << ", max |score| = " << format6(fit.score_norm()) << "\n\n";
  os << pad("parameter", 12, true) << pad("estimate", 14) << pad("std.error", 14) << pad("z", 14)
     << pad("p-value", 14) << '\n';
  const auto names = ParamVector::names(fit.spec);
  for (int j = 0; j < fit.gamma_hat.size(); ++j) {
    os << pad(names[static_cast<std::size_t>(j)], 12, true) << pad(format6(fit.gamma_hat.flat()[j]), 14);
    if (fit.std_errors.size()) {
      const WaldResult w = wald_test(fit, j, 0.0);
      os << pad(format6(fit.std_errors[j]), 14) << pad(format6(w.z), 14) << pad(format6(w.p_value), 14);
    } else {
      os << pad("NA", 14) << pad("NA", 14) << pad("NA", 14);
    }
    os << '\n';
  }
  if (fit.info_singular) os << "conditional information matrix is singular; no standard errors\n";
  os << '\n'
     << "log-likelihood " << format6(fit.loglik) << "   AIC " << format6(fit.ic.aic) << "   BIC "
     << format6(fit.ic.bic) << "   HQC " << format6(fit.ic.hqc) << '\n';
  const json& q = diag["quantile_residuals"];
  os << "quantile residuals: mean " << format6(q["mean"].get<double>()) << ", sd " << format6(q["sd"].get<double>());
  if (q.contains("ks"))
    os << ", KS p " << format6(q["ks"]["p_value"].get<double>()) << ", AD p "
       << format6(q["ad"]["p_value"].get<double>());
  os << '\n';
  if (diag.contains("acf"))
    os << "residual ACF: " << diag["acf"]["lags_outside_band"].get<int>() << " of " << diag["acf"]["max_lag"].get<int>()
       << " lags outside +-" << format6(diag["acf"]["band"].get<double>()) << '\n';
  return os.str();
}

// ---- model loading ---------------------------------------------------------

struct Loaded {
  Dataset dataset;
  FitResult fit;
  RunConfig config;
  std::string hash;
};

// Either reads a saved model and refreshes its inference on the dataset, or
// fits the dataset under the config.
Loaded fitted_model(const Flags& f) {
  RunConfig config = load_config(f);
  if (!f.model.empty()) {
    SavedModel saved = read_model(f.model);
    if (f.harmonics_opt && f.harmonics_opt->count()) saved.layout.harmonics = parse_harmonics(f.harmonics);
    Dataset ds = load_dataset(f.data, saved.layout);
    if (ds.data.x.cols() != saved.fit.spec.n_covariates)
      throw ValidationError(f.data + ": model expects " + std::to_string(saved.fit.spec.n_covariates) +
                            " covariate(s), dataset provides " + std::to_string(ds.data.x.cols()));
    FitResult fit = saved.fit;
    const bool converged = fit.converged;
    const std::string message = fit.message;
    const int evals = fit.n_evals;
    attach_inference(fit, ds.data);
    fit.converged = converged;
    fit.message = message;
    fit.n_evals = evals;
    config.ar_order = fit.spec.ar_order;
    config.ma_order = fit.spec.ma_order;
    config.link = fit.spec.link.name();
    config.data = saved.layout;
    // Hash the model parameters as well as the run settings.
    std::ostringstream key;
    key << config.to_json().dump();
    for (int i = 0; i < fit.gamma_hat.size(); ++i) key << ' ' << format_full(fit.gamma_hat.flat()[i]);
    return {std::move(ds), std::move(fit), config, fnv1a_hex(key.str())};
  }
  Dataset ds = load_dataset(f.data, config.data);
  const ModelSpec spec = model_spec(config, static_cast<int>(ds.data.x.cols()));
  FitResult fit = marma::fit(ds.data, spec, config.fit);
  return {std::move(ds), std::move(fit), config, config.hash()};
}

// ---- commands ---------------------------------------------------------------

int cmd_fit(const Flags& f, std::ostream& out) {
  RunConfig config = load_config(f);
  Dataset ds = load_dataset(f.data, config.data);
  const ModelSpec spec = model_spec(config, static_cast<int>(ds.data.x.cols()));
  const FitResult fit = marma::fit(ds.data, spec, config.fit);
  const Metadata meta{"fit", config.hash(), std::nullopt};
  const json diag = diagnostics_json(fit, ds.data, false);

  json report = model_json(fit, ds, meta);
  json params = wald_json(fit);
  for (std::size_t i = 0; i < params.size(); ++i) {
    report["parameters"][i]["z"] = params[i]["z"];
    report["parameters"][i]["p_value"] = params[i]["p_value"];
  }
  report["diagnostics"] = diag;
  if (!f.out.empty()) write_text(f.out, report.dump(2) + "\n");
  if (f.format == "json")
    out << report.dump(2) << '\n';
  else
    out << fit_table(fit, diag);
  return fit.converged ? kOk : kNotConverged;
}

int cmd_forecast(const Flags& f, std::ostream& out) {
  Loaded m = fitted_model(f);
  const ForecastConfig& fc = m.config.forecast;
  std::uint64_t seed = fc.seed;
  if (f.seed_opt->count()) seed = f.seed;
  const int h = fc.horizon;
  if (h < 1) throw ValidationError("--horizon must be at least 1");

  Eigen::MatrixXd new_x;
  if (!f.future.empty()) {
    new_x = load_future_covariates(f.future, m.dataset, h);
  } else if (auto rule = m.dataset.future_covariates(h)) {
    new_x = std::move(*rule);
  } else {
    throw ValidationError("forecast needs future covariates: pass --future or declare harmonic covariates");
  }

  ForecastResult fr;
  if (fc.paths > 0) {
    BootstrapOptions bo;
    bo.horizon = h;
    bo.paths = fc.paths;
    bo.level = fc.level;
    bo.seed = seed;
    bo.threads = thread_count(f, m.config);
    fr = bootstrap_intervals(m.fit, m.dataset.data, new_x, bo);
  } else {
    fr = predict(m.fit, m.dataset.data, new_x, h);
  }

  // Seed, horizon, paths and level all enter the hash.
  json key = m.config.to_json();
  key["forecast"]["seed"] = seed;
  const Metadata meta{"forecast", fnv1a_hex(m.hash + key.dump()), seed};
  const double last_t = m.dataset.time.size() ? m.dataset.time[m.dataset.time.size() - 1] : 0.0;

  std::ostringstream os;
  if (f.format == "json") {
    json j;
    j["metadata"] = metadata_json(meta);
    j["horizon"] = h;
    j["paths"] = fr.has_intervals() ? fc.paths : 0;
    j["level"] = fr.has_intervals() ? json(fc.level) : json(nullptr);
    j["clamp_count"] = fr.clamp_count;
    json rows = json::array();
    for (int k = 0; k < h; ++k) {
      json r{{"step", k + 1}, {"t", last_t + k + 1}, {"point", fr.point[k]}};
      if (fr.has_intervals()) {
        r["lower"] = fr.intervals[static_cast<std::size_t>(k)].lower;
        r["upper"] = fr.intervals[static_cast<std::size_t>(k)].upper;
      }
      rows.push_back(r);
    }
    j["forecasts"] = rows;
    os << j.dump(2) << '\n';
  } else {
    write_metadata_comments(os, meta);
    if (fr.has_intervals())
      os << "# paths: " << fc.paths << "\n# level: " << format_full(fc.level) << '\n';
    os << "step,t,point" << (fr.has_intervals() ? ",lower,upper" : "") << '\n';
    for (int k = 0; k < h; ++k) {
      os << k + 1 << ',' << format_full(last_t + k + 1) << ',' << format_full(fr.point[k]);
      if (fr.has_intervals())
        os << ',' << format_full(fr.intervals[static_cast<std::size_t>(k)].lower) << ','
           << format_full(fr.intervals[static_cast<std::size_t>(k)].upper);
      os << '\n';
    }
  }
  emit(f.out, os.str(), out);
  return kOk;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  RunConfig config = load_config(f);
  if (config.scenario && f.seed_opt->count()) config.scenario->seed = f.seed;
  const ScenarioSpec scenario = make_scenario(config);
  const SimulatedSeries sim = simulate(scenario);
  const Metadata meta{"simulate", config.hash(), scenario.seed};

  std::ostringstream os;
  write_metadata_comments(os, meta);
  os << "t,y";
  for (const auto& term : scenario.covariates.terms) os << ',' << term.label();
  os << '\n';
  for (Eigen::Index i = 0; i < sim.data.y.size(); ++i) {
    os << i + 1 << ',' << format_full(sim.data.y[i]);
    for (Eigen::Index k = 0; k < sim.data.x.cols(); ++k) os << ',' << format_full(sim.data.x(i, k));
    os << '\n';
  }
  emit(f.out, os.str(), out);
  return kOk;
}

json summaries_json(const std::vector<ParamSummary>& rows) {
  json arr = json::array();
  for (const auto& s : rows)
    arr.push_back({{"name", s.name}, {"truth", s.truth}, {"mean", s.mean}, {"median", s.median}, {"sd", s.sd}});
  return arr;
}

int cmd_mc(const Flags& f, std::ostream& out) {
  RunConfig config = load_config(f);
  if (config.scenario && f.seed_opt->count()) config.scenario->seed = f.seed;
  const ScenarioSpec scenario = make_scenario(config);
  McOptions opt;
  opt.threads = thread_count(f, config);
  opt.fit = config.fit;
  if (config.mc.fit_ar_order) {
    RunConfig fm = config;
    fm.ar_order = *config.mc.fit_ar_order;
    fm.ma_order = *config.mc.fit_ma_order;
    fm.link = *config.mc.fit_link;
    opt.fit_model = model_spec(fm, scenario.model.n_covariates);
  }
  const McConfig& mc = config.mc;
  McReport rep;
  if (mc.kind == "point")
    rep = mc_point_estimation(scenario, opt);
  else if (mc.kind == "gof")
    rep = mc_goodness_of_fit(scenario, opt);
  else
    rep = mc_coverage(scenario, mc.horizon, mc.paths, mc.levels, opt);

  const Metadata meta{"mc", config.hash(), scenario.seed};
  json j;
  j["metadata"] = metadata_json(meta);
  j["kind"] = rep.kind;
  j["scenario"] = config.to_json()["scenario"];
  j["model"] = config.to_json()["model"];
  j["replicas"] = rep.replicas;
  j["n_converged"] = rep.n_converged;
  j["n_failed"] = rep.n_failed;
  json failures = json::array();
  for (std::size_t i = 0; i < rep.fits.size(); ++i)
    if (!rep.fits[i].ok) failures.push_back({{"replica", i}, {"reason", rep.fits[i].failure}});
  j["failures"] = failures;

  std::ostringstream csv;
  write_metadata_comments(csv, meta);
  std::ostringstream table;
  table << "scenario: " << spec_label(scenario.model) << ", n = " << scenario.n << ", burn-in = " << scenario.burn_in
        << ", replicas = " << rep.replicas << "\n";
  table << "converged: " << rep.n_converged << ", failed: " << rep.n_failed << "\n\n";

  if (rep.kind == "point") {
    j["converged_only"] = summaries_json(rep.converged_only);
    j["all_replicas"] = summaries_json(rep.all_replicas);
    json est = json::array();
    for (const auto& r : rep.fits)
      est.push_back(r.estimate.size() ? json(std::vector<double>(r.estimate.data(), r.estimate.data() + r.estimate.size()))
                                      : json(nullptr));
    j["estimates"] = est;
    csv << "subset,parameter,truth,mean,median,sd\n";
    auto rows = [&](const char* subset, const std::vector<ParamSummary>& v) {
      for (const auto& s : v)
        csv << subset << ',' << s.name << ',' << format_full(s.truth) << ',' << format_full(s.mean) << ','
            << format_full(s.median) << ',' << format_full(s.sd) << '\n';
    };
    rows("converged", rep.converged_only);
    rows("all", rep.all_replicas);
    table << pad("parameter", 12, true) << pad("truth", 12) << pad("mean", 12) << pad("median", 12) << pad("sd", 12)
          << "   (converged replicas)\n";
    for (const auto& s : rep.converged_only)
      table << pad(s.name, 12, true) << pad(format6(s.truth), 12) << pad(format6(s.mean), 12)
            << pad(format6(s.median), 12) << pad(format6(s.sd), 12) << '\n';
  } else if (rep.kind == "gof") {
    j["level"] = 0.05;
    j["ks_rejection"] = rep.ks_rejection;
    j["ad_rejection"] = rep.ad_rejection;
    csv << "test,level,rejection_rate\n";
    csv << "KS,0.05," << format_full(rep.ks_rejection) << '\n';
    csv << "AD,0.05," << format_full(rep.ad_rejection) << '\n';
    table << "rejection rate at 5%: KS " << format6(rep.ks_rejection) << ", AD " << format6(rep.ad_rejection) << '\n';
  } else {
    j["horizon"] = mc.horizon;
    j["paths"] = mc.paths;
    json cov = json::array();
    csv << "level,horizon,coverage,mean_width\n";
    table << pad("level", 8, true) << pad("horizon", 8) << pad("coverage", 12) << pad("width", 12) << '\n';
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
      cov.push_back({{"level", rep.levels[l]}, {"coverage", rep.coverage[l]}, {"mean_width", rep.mean_width[l]}});
      for (std::size_t k = 0; k < rep.coverage[l].size(); ++k) {
        csv << format_full(rep.levels[l]) << ',' << k + 1 << ',' << format_full(rep.coverage[l][k]) << ','
            << format_full(rep.mean_width[l][k]) << '\n';
        table << pad(format6(rep.levels[l]), 8, true) << pad(std::to_string(k + 1), 8)
              << pad(format6(rep.coverage[l][k]), 12) << pad(format6(rep.mean_width[l][k]), 12) << '\n';
      }
    }
    j["coverage"] = cov;
  }

  if (!f.out.empty()) {
    write_text(f.out + ".json", j.dump(2) + "\n");
    write_text(f.out + ".csv", csv.str());
  }
  if (f.format == "json")
    out << j.dump(2) << '\n';
  else if (f.format == "csv")
    out << csv.str();
  else
    out << table.str();
  return kOk;
}

int cmd_diagnose(const Flags& f, std::ostream& out) {
  Loaded m = fitted_model(f);
  json j;
  j["metadata"] = metadata_json({"diagnose", m.hash, std::nullopt});
  j["model"] = {{"ar_order", m.fit.spec.ar_order},
                {"ma_order", m.fit.spec.ma_order},
                {"n_covariates", m.fit.spec.n_covariates},
                {"link", m.fit.spec.link.name()}};
  j["loglik"] = m.fit.loglik;
  j["information_criteria"] = {{"aic", m.fit.ic.aic}, {"bic", m.fit.ic.bic}, {"hqc", m.fit.ic.hqc}};
  j["score_norm"] = m.fit.score_norm();
  j["parameters"] = wald_json(m.fit);
  const json diag = diagnostics_json(m.fit, m.dataset.data, true);
  for (auto it = diag.begin(); it != diag.end(); ++it) j[it.key()] = it.value();
  if (f.format == "table") {
    std::ostringstream os;
    os << fit_table(m.fit, diag);
    emit(f.out, os.str(), out);
  } else {
    emit(f.out, j.dump(2) + "\n", out);
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matsuoka ARMA models for time series on (0, 1)", "marma"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MARMA_VERSION));

  Flags ff, fcf, sf, mf, df;
  auto data_opt = [](Flags& f, CLI::App* sub, bool required) {
    auto* o = sub->add_option("--data", f.data, "dataset CSV (header line required)");
    if (required) o->required();
  };
  auto config_opt = [](Flags& f, CLI::App* sub, bool required) {
    f.config_opt = sub->add_option("--config", f.config, "run configuration (JSON)");
    if (required) f.config_opt->required();
  };
  auto model_opts = [](Flags& f, CLI::App* sub) {
    f.order_opt = sub->add_option("--order", f.order, "AR and MA orders as p,q");
    f.link_opt = sub->add_option("--link", f.link, "logit, cloglog or loglog");
    f.harmonics_opt =
        sub->add_option("--harmonics", f.harmonics, "harmonic covariates on the time index, e.g. sin:12,cos:12");
  };
  auto seed_opt = [](Flags& f, CLI::App* sub) { f.seed_opt = sub->add_option("--seed", f.seed, "random seed"); };
  auto threads_opt = [](Flags& f, CLI::App* sub) {
    f.threads_opt = sub->add_option("--threads", f.threads, "worker threads (default: MARMA_THREADS or 1)");
  };

  auto* fit = app.add_subcommand("fit", "fit a model by partial maximum likelihood");
  data_opt(ff, fit, true);
  config_opt(ff, fit, false);
  model_opts(ff, fit);
  fit->add_option("--out", ff.out, "write the fitted model (JSON)");
  fit->add_option("--format", ff.format, "stdout format")->check(CLI::IsMember({"table", "json"}))->default_val("table");

  auto* fc = app.add_subcommand("forecast", "point forecasts and bootstrap prediction intervals");
  data_opt(fcf, fc, true);
  config_opt(fcf, fc, false);
  fc->add_option("--model", fcf.model, "fitted model file; without it the data are fitted first");
  model_opts(fcf, fc);
  fc->add_option("--future", fcf.future, "CSV of covariates for the forecast horizon");
  fcf.horizon_opt = fc->add_option("--horizon", fcf.horizon, "forecast horizon h");
  fcf.boot_opt = fc->add_option("--boot", fcf.boot, "bootstrap paths m (0: point forecasts only)");
  fcf.level_opt = fc->add_option("--level", fcf.level, "interval level delta (coverage 1 - delta)");
  seed_opt(fcf, fc);
  threads_opt(fcf, fc);
  fc->add_option("--out", fcf.out, "output file (default: stdout)");
  fc->add_option("--format", fcf.format, "output format")->check(CLI::IsMember({"csv", "json"}))->default_val("csv");

  auto* sim = app.add_subcommand("simulate", "simulate a series from a scenario");
  config_opt(sf, sim, true);
  model_opts(sf, sim);
  seed_opt(sf, sim);
  sim->add_option("--out", sf.out, "output CSV (default: stdout)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo study of a scenario");
  config_opt(mf, mc, true);
  model_opts(mf, mc);
  seed_opt(mf, mc);
  threads_opt(mf, mc);
  mc->add_option("--out", mf.out, "write <prefix>.json and <prefix>.csv");
  mc->add_option("--format", mf.format, "stdout format")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->default_val("table");

  auto* dg = app.add_subcommand("diagnose", "residual diagnostics for a fitted model");
  data_opt(df, dg, true);
  config_opt(df, dg, false);
  dg->add_option("--model", df.model, "fitted model file; without it the data are fitted first");
  model_opts(df, dg);
  dg->add_option("--out", df.out, "output file (default: stdout)");
  dg->add_option("--format", df.format, "output format")->check(CLI::IsMember({"json", "table"}))->default_val("json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (fit->parsed()) return cmd_fit(ff, out);
    if (fc->parsed()) return cmd_forecast(fcf, out);
    if (sim->parsed()) return cmd_simulate(sf, out);
    if (mc->parsed()) return cmd_mc(mf, out);
    if (dg->parsed()) return cmd_diagnose(df, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const SingularInformationError& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::invalid_argument& e) {  // ValidationError, DimensionError, DataError
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::domain_error& e) {  // DomainError
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kValidation;
}

}  // namespace marma::cli
