#include "io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "marma/errors.hpp"
#include "marma/links.hpp"

#ifndef MARMA_VERSION
#define MARMA_VERSION "0.0.0"
#endif

namespace marma::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

}  // namespace

// ---- CSV -------------------------------------------------------------------

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::string CsvTable::where(std::size_t row) const {
  return "row " + std::to_string(row + 1) + " (line " + std::to_string(lines.at(row)) + ")";
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view);
    if (!have_header) {
      bool numeric = true;
      std::set<std::string> seen;
      for (auto f : fields) {
        double tmp;
        numeric = numeric && parse_double(f, tmp);
        std::string name = unquote(f);
        if (name.empty()) throw ValidationError(source + ": line " + std::to_string(line_no) + ": empty column name");
        if (!seen.insert(name).second)
          throw ValidationError(source + ": line " + std::to_string(line_no) + ": duplicate column '" + name + "'");
        table.header.push_back(std::move(name));
      }
      if (numeric) throw ValidationError(source + ": line " + std::to_string(line_no) + ": header line is missing");
      have_header = true;
      continue;
    }
    const std::size_t row = table.rows.size();
    const std::string at = source + ": row " + std::to_string(row + 1) + " (line " + std::to_string(line_no) + ")";
    if (fields.size() != table.header.size())
      throw ValidationError(at + ": expected " + std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (is_missing(fields[c])) throw ValidationError(at + ": missing value in column '" + table.header[c] + "'");
      if (!parse_double(fields[c], values[c]) || !std::isfinite(values[c]))
        throw ValidationError(at + ": cannot parse '" + std::string(fields[c]) + "' in column '" + table.header[c] +
                              "'");
    }
    table.rows.push_back(std::move(values));
    table.lines.push_back(line_no);
  }
  if (in.bad()) throw IoError(source + ": read error");
  if (!have_header) throw ValidationError(source + ": empty file (header line is mandatory)");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv(in, path);
}

std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

json metadata_json(const Metadata& meta) {
  json j;
  j["tool"] = "marma";
  j["version"] = MARMA_VERSION;
  j["command"] = meta.command;
  j["config_hash"] = meta.config_hash;
  if (meta.seed)
    j["seed"] = *meta.seed;
  else
    j["seed"] = nullptr;
  return j;
}

void write_metadata_comments(std::ostream& out, const Metadata& meta) {
  out << "# marma " << MARMA_VERSION << '\n';
  out << "# command: " << meta.command << '\n';
  out << "# config_hash: " << meta.config_hash << '\n';
  if (meta.seed) out << "# seed: " << *meta.seed << '\n';
}

// ---- datasets --------------------------------------------------------------

namespace {

Eigen::MatrixXd harmonic_rows(const std::vector<HarmonicTerm>& terms, const Eigen::VectorXd& time) {
  Eigen::MatrixXd out(time.size(), static_cast<Eigen::Index>(terms.size()));
  for (Eigen::Index i = 0; i < time.size(); ++i)
    for (std::size_t k = 0; k < terms.size(); ++k) out(i, static_cast<Eigen::Index>(k)) = terms[k](time[i]);
  return out;
}

int find_time_column(const CsvTable& table, const DataLayout& layout, const std::string& source) {
  if (layout.time_column) {
    const int c = table.column(*layout.time_column);
    if (c < 0) throw ValidationError(source + ": no time column '" + *layout.time_column + "'");
    return c;
  }
  int c = table.column("t");
  if (c < 0) c = table.column("time");
  return c;
}

}  // namespace

Dataset load_dataset(const CsvTable& table, const DataLayout& layout) {
  Dataset out;
  out.layout = layout;
  const int ycol = table.column(layout.y_column);
  if (ycol < 0) throw ValidationError("no column named '" + layout.y_column + "'");
  const int tcol = find_time_column(table, layout, "dataset");
  if (tcol == ycol) throw ValidationError("time column and y column coincide");

  std::vector<int> xcols;
  if (layout.covariates) {
    for (const auto& name : *layout.covariates) {
      const int c = table.column(name);
      if (c < 0) throw ValidationError("no covariate column '" + name + "'");
      if (c == ycol || c == tcol) throw ValidationError("column '" + name + "' cannot be a covariate");
      xcols.push_back(c);
    }
  } else if (layout.harmonics.empty()) {
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
      if (c != ycol && c != tcol) xcols.push_back(c);
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.data.y.resize(n);
  out.time.resize(n);
  const auto r_data = static_cast<Eigen::Index>(xcols.size());
  const auto r_harm = static_cast<Eigen::Index>(layout.harmonics.size());
  Eigen::MatrixXd xdata(n, r_data);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const double y = row[static_cast<std::size_t>(ycol)];
    if (!(y > 0.0 && y < 1.0))
      throw ValidationError(table.where(static_cast<std::size_t>(i)) + ": " + layout.y_column + " = " + format6(y) +
                            " is outside (0, 1)");
    out.data.y[i] = y;
    out.time[i] = tcol >= 0 ? row[static_cast<std::size_t>(tcol)] : static_cast<double>(i + 1);
    for (Eigen::Index k = 0; k < r_data; ++k) xdata(i, k) = row[static_cast<std::size_t>(xcols[static_cast<std::size_t>(k)])];
  }
  out.data.x.resize(n, r_data + r_harm);
  out.data.x.leftCols(r_data) = xdata;
  out.data.x.rightCols(r_harm) = harmonic_rows(layout.harmonics, out.time);
  for (int c : xcols) out.covariate_names.push_back(table.header[static_cast<std::size_t>(c)]);
  for (const auto& h : layout.harmonics) out.covariate_names.push_back(h.label());
  return out;
}

Dataset load_dataset(const std::string& path, const DataLayout& layout) {
  const CsvTable table = read_csv(path);
  try {
    return load_dataset(table, layout);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::optional<Eigen::MatrixXd> Dataset::future_covariates(int h) const {
  const auto r_harm = static_cast<Eigen::Index>(layout.harmonics.size());
  if (data.x.cols() != r_harm) return std::nullopt;
  const double last = time.size() ? time[time.size() - 1] : 0.0;
  Eigen::VectorXd t(h);
  for (int k = 0; k < h; ++k) t[k] = last + k + 1;
  return harmonic_rows(layout.harmonics, t);
}

Eigen::MatrixXd load_future_covariates(const std::string& path, const Dataset& dataset, int h) {
  const CsvTable table = read_csv(path);
  if (static_cast<int>(table.rows.size()) < h)
    throw ValidationError(path + ": need " + std::to_string(h) + " rows of future covariates, found " +
                          std::to_string(table.rows.size()));
  const auto r_harm = static_cast<Eigen::Index>(dataset.layout.harmonics.size());
  const auto r_data = dataset.data.x.cols() - r_harm;
  Eigen::MatrixXd x(h, dataset.data.x.cols());
  for (Eigen::Index k = 0; k < r_data; ++k) {
    const auto& name = dataset.covariate_names[static_cast<std::size_t>(k)];
    const int c = table.column(name);
    if (c < 0) throw ValidationError(path + ": no covariate column '" + name + "'");
    for (int i = 0; i < h; ++i) x(i, k) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  if (r_harm > 0) {
    const int tcol = find_time_column(table, dataset.layout, path);
    const double last = dataset.time.size() ? dataset.time[dataset.time.size() - 1] : 0.0;
    Eigen::VectorXd t(h);
    for (int i = 0; i < h; ++i) t[i] = tcol >= 0 ? table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(tcol)] : last + i + 1;
    x.rightCols(r_harm) = harmonic_rows(dataset.layout.harmonics, t);
  }
  return x;
}

// ---- configuration ---------------------------------------------------------

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < -2147483647LL || x > 2147483647LL) throw ValidationError(where + ": integer out of range");
  return static_cast<int>(x);
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ValidationError(where + ": expected a non-negative integer");
}

double get_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ValidationError(where + ": expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_double(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

HarmonicTerm get_harmonic(const json& v, const std::string& where) {
  if (v.is_string()) return parse_harmonic(v.get<std::string>());
  check_keys(v, {"fn", "period"}, where);
  if (!v.contains("fn") || !v.contains("period")) throw ValidationError(where + ": needs 'fn' and 'period'");
  return parse_harmonic(get_string(v["fn"], where + ".fn") + ":" + format_full(get_double(v["period"], where + ".period")));
}

std::vector<HarmonicTerm> get_harmonics(const json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<HarmonicTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_harmonic(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

json harmonic_json(const HarmonicTerm& h) {
  return json{{"fn", h.fn == HarmonicTerm::Fn::sin ? "sin" : "cos"}, {"period", h.period}};
}

json harmonics_json(const std::vector<HarmonicTerm>& terms) {
  json arr = json::array();
  for (const auto& h : terms) arr.push_back(harmonic_json(h));
  return arr;
}

void parse_order(const json& v, int& p, int& q, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(where + ": expected [p, q]");
  p = get_int(v[0], where + "[0]");
  q = get_int(v[1], where + "[1]");
}

void parse_model_section(const json& m, RunConfig& c) {
  check_keys(m, {"order", "ar_order", "ma_order", "link"}, "model");
  if (m.contains("order")) parse_order(m["order"], c.ar_order, c.ma_order, "model.order");
  if (m.contains("ar_order")) c.ar_order = get_int(m["ar_order"], "model.ar_order");
  if (m.contains("ma_order")) c.ma_order = get_int(m["ma_order"], "model.ma_order");
  if (m.contains("link")) c.link = get_string(m["link"], "model.link");
}

DataLayout parse_layout(const json& d, const std::string& where) {
  check_keys(d, {"y_column", "time_column", "covariates", "harmonics"}, where);
  DataLayout l;
  if (d.contains("y_column")) l.y_column = get_string(d["y_column"], where + ".y_column");
  if (d.contains("time_column") && !d["time_column"].is_null())
    l.time_column = get_string(d["time_column"], where + ".time_column");
  if (d.contains("covariates") && !d["covariates"].is_null()) {
    const json& cv = d["covariates"];
    if (!cv.is_array()) throw ValidationError(where + ".covariates: expected an array of column names");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < cv.size(); ++i) names.push_back(get_string(cv[i], where + ".covariates"));
    l.covariates = std::move(names);
  }
  if (d.contains("harmonics")) l.harmonics = get_harmonics(d["harmonics"], where + ".harmonics");
  return l;
}

json layout_json(const DataLayout& l) {
  json j;
  j["y_column"] = l.y_column;
  j["time_column"] = l.time_column ? json(*l.time_column) : json(nullptr);
  j["covariates"] = l.covariates ? json(*l.covariates) : json(nullptr);
  j["harmonics"] = harmonics_json(l.harmonics);
  return j;
}

}  // namespace

HarmonicTerm parse_harmonic(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("harmonic '" + text + "': expected fn:period, e.g. sin:12");
  const std::string_view fn = trim(std::string_view(text).substr(0, colon));
  HarmonicTerm h;
  if (fn == "sin")
    h.fn = HarmonicTerm::Fn::sin;
  else if (fn == "cos")
    h.fn = HarmonicTerm::Fn::cos;
  else
    throw ValidationError("harmonic '" + text + "': function must be sin or cos");
  if (!parse_double(trim(std::string_view(text).substr(colon + 1)), h.period) || !(h.period > 0.0) ||
      !std::isfinite(h.period))
    throw ValidationError("harmonic '" + text + "': period must be a positive number");
  return h;
}

std::vector<HarmonicTerm> parse_harmonics(const std::string& text) {
  std::vector<HarmonicTerm> out;
  for (auto part : split(text))
    if (!part.empty()) out.push_back(parse_harmonic(std::string(part)));
  return out;
}

RunConfig parse_config(const json& j) {
  check_keys(j, {"model", "data", "fit", "forecast", "scenario", "mc", "threads"}, "config");
  RunConfig c;
  if (j.contains("model")) parse_model_section(j["model"], c);
  if (j.contains("data")) c.data = parse_layout(j["data"], "data");
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f, {"max_evals", "grad_tol", "rel_f_tol", "polish", "start"}, "fit");
    if (f.contains("max_evals")) c.fit.max_evals = get_int(f["max_evals"], "fit.max_evals");
    if (f.contains("grad_tol")) c.fit.grad_tol = get_double(f["grad_tol"], "fit.grad_tol");
    if (f.contains("rel_f_tol")) c.fit.rel_f_tol = get_double(f["rel_f_tol"], "fit.rel_f_tol");
    if (f.contains("polish")) c.fit.polish = get_bool(f["polish"], "fit.polish");
    if (f.contains("start") && !f["start"].is_null()) {
      const auto s = get_doubles(f["start"], "fit.start");
      c.fit.start = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    }
  }
  if (j.contains("forecast")) {
    const json& f = j["forecast"];
    check_keys(f, {"horizon", "paths", "level", "seed"}, "forecast");
    if (f.contains("horizon")) c.forecast.horizon = get_int(f["horizon"], "forecast.horizon");
    if (f.contains("paths")) c.forecast.paths = get_int(f["paths"], "forecast.paths");
    if (f.contains("level")) c.forecast.level = get_double(f["level"], "forecast.level");
    if (f.contains("seed")) c.forecast.seed = get_seed(f["seed"], "forecast.seed");
  }
  if (j.contains("scenario") && !j["scenario"].is_null()) {
    const json& s = j["scenario"];
    check_keys(s, {"n", "burn_in", "replicas", "seed", "params", "covariates"}, "scenario");
    ScenarioConfig sc;
    if (s.contains("n")) sc.n = get_int(s["n"], "scenario.n");
    if (s.contains("burn_in")) sc.burn_in = get_int(s["burn_in"], "scenario.burn_in");
    if (s.contains("replicas")) sc.replicas = get_int(s["replicas"], "scenario.replicas");
    if (s.contains("seed")) sc.seed = get_seed(s["seed"], "scenario.seed");
    if (!s.contains("params")) throw ValidationError("scenario: 'params' is required");
    const json& p = s["params"];
    check_keys(p, {"alpha", "beta", "phi", "theta"}, "scenario.params");
    if (p.contains("alpha")) sc.alpha = get_double(p["alpha"], "scenario.params.alpha");
    if (p.contains("beta")) sc.beta = get_doubles(p["beta"], "scenario.params.beta");
    if (p.contains("phi")) sc.phi = get_doubles(p["phi"], "scenario.params.phi");
    if (p.contains("theta")) sc.theta = get_doubles(p["theta"], "scenario.params.theta");
    if (s.contains("covariates")) sc.covariates = get_harmonics(s["covariates"], "scenario.covariates");
    c.scenario = std::move(sc);
  }
  if (j.contains("mc")) {
    const json& m = j["mc"];
    check_keys(m, {"kind", "horizon", "paths", "levels", "fit_model"}, "mc");
    if (m.contains("kind")) c.mc.kind = get_string(m["kind"], "mc.kind");
    if (m.contains("horizon")) c.mc.horizon = get_int(m["horizon"], "mc.horizon");
    if (m.contains("paths")) c.mc.paths = get_int(m["paths"], "mc.paths");
    if (m.contains("levels")) c.mc.levels = get_doubles(m["levels"], "mc.levels");
    if (m.contains("fit_model") && !m["fit_model"].is_null()) {
      RunConfig tmp;
      parse_model_section(m["fit_model"], tmp);
      c.mc.fit_ar_order = tmp.ar_order;
      c.mc.fit_ma_order = tmp.ma_order;
      c.mc.fit_link = tmp.link;
    }
    if (c.mc.kind != "point" && c.mc.kind != "gof" && c.mc.kind != "coverage")
      throw ValidationError("mc.kind: expected point, gof or coverage");
  }
  if (j.contains("threads")) c.threads = get_int(j["threads"], "threads");
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["model"] = {{"ar_order", ar_order}, {"ma_order", ma_order}, {"link", link}};
  j["data"] = layout_json(data);
  json f;
  f["max_evals"] = fit.max_evals;
  f["grad_tol"] = fit.grad_tol;
  f["rel_f_tol"] = fit.rel_f_tol;
  f["polish"] = fit.polish;
  f["start"] = fit.start ? json(std::vector<double>(fit.start->data(), fit.start->data() + fit.start->size()))
                         : json(nullptr);
  j["fit"] = f;
  j["forecast"] = {{"horizon", forecast.horizon},
                   {"paths", forecast.paths},
                   {"level", forecast.level},
                   {"seed", forecast.seed}};
  if (scenario) {
    const auto& s = *scenario;
    j["scenario"] = {{"n", s.n},
                     {"burn_in", s.burn_in},
                     {"replicas", s.replicas},
                     {"seed", s.seed},
                     {"params", {{"alpha", s.alpha}, {"beta", s.beta}, {"phi", s.phi}, {"theta", s.theta}}},
                     {"covariates", harmonics_json(s.covariates)}};
  } else {
    j["scenario"] = nullptr;
  }
  json m;
  m["kind"] = mc.kind;
  m["horizon"] = mc.horizon;
  m["paths"] = mc.paths;
  m["levels"] = mc.levels;
  if (mc.fit_ar_order)
    m["fit_model"] = {{"ar_order", *mc.fit_ar_order}, {"ma_order", *mc.fit_ma_order}, {"link", *mc.fit_link}};
  else
    m["fit_model"] = nullptr;
  j["mc"] = m;
  // threads is left out: it never changes results.
  return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

RunConfig read_config(const std::string& path) { return parse_config(read_json(path)); }

ScenarioSpec make_scenario(const RunConfig& config) {
  if (!config.scenario) throw ValidationError("config has no 'scenario' section");
  const ScenarioConfig& s = *config.scenario;
  ModelSpec spec;
  spec.ar_order = config.ar_order;
  spec.ma_order = config.ma_order;
  spec.n_covariates = static_cast<int>(s.covariates.size());
  try {
    spec.link = Link::from_name(config.link);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("model.link: ") + e.what());
  }
  if (s.beta.size() != s.covariates.size())
    throw ValidationError("scenario.params.beta: need one coefficient per scenario covariate (" +
                          std::to_string(s.covariates.size()) + ")");
  if (static_cast<int>(s.phi.size()) != spec.ar_order)
    throw ValidationError("scenario.params.phi: length must equal the AR order " + std::to_string(spec.ar_order));
  if (static_cast<int>(s.theta.size()) != spec.ma_order)
    throw ValidationError("scenario.params.theta: length must equal the MA order " + std::to_string(spec.ma_order));
  ScenarioSpec out(spec, ParamVector::from_parts(spec, s.alpha, s.beta, s.phi, s.theta));
  out.n = s.n;
  out.burn_in = s.burn_in;
  out.replicas = s.replicas;
  out.seed = s.seed;
  out.covariates.terms = s.covariates;
  out.validate();
  return out;
}

// ---- model files -----------------------------------------------------------

json model_json(const FitResult& fit, const Dataset& dataset, const Metadata& meta) {
  const auto names = ParamVector::names(fit.spec);
  const Eigen::VectorXd& g = fit.gamma_hat.flat();
  json j;
  j["format"] = "marma-model";
  j["version"] = 1;
  j["model"] = {{"ar_order", fit.spec.ar_order},
                {"ma_order", fit.spec.ma_order},
                {"n_covariates", fit.spec.n_covariates},
                {"link", fit.spec.link.name()}};
  j["data"] = layout_json(dataset.layout);
  j["data"]["covariate_names"] = dataset.covariate_names;
  json params = json::array();
  for (int i = 0; i < g.size(); ++i) {
    json p;
    p["name"] = names[static_cast<std::size_t>(i)];
    p["estimate"] = g[i];
    p["std_error"] = fit.std_errors.size() ? json(fit.std_errors[i]) : json(nullptr);
    params.push_back(p);
  }
  j["parameters"] = params;
  json info = json::array();
  for (Eigen::Index r = 0; r < fit.cond_info.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < fit.cond_info.cols(); ++c) row.push_back(fit.cond_info(r, c));
    info.push_back(row);
  }
  j["cond_info"] = info;
  j["fit"] = {{"n_obs", fit.n_obs},
              {"loglik", fit.loglik},
              {"aic", fit.ic.aic},
              {"bic", fit.ic.bic},
              {"hqc", fit.ic.hqc},
              {"converged", fit.converged},
              {"message", fit.message},
              {"n_evals", fit.n_evals},
              {"score_norm", fit.score_norm()},
              {"info_singular", fit.info_singular},
              {"clamp_count", fit.clamp_count}};
  j["metadata"] = metadata_json(meta);
  return j;
}

SavedModel parse_model(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "marma-model") throw ValidationError("not a marma model file");
    const json& m = j.at("model");
    ModelSpec spec;
    spec.ar_order = get_int(m.at("ar_order"), "model.ar_order");
    spec.ma_order = get_int(m.at("ma_order"), "model.ma_order");
    spec.n_covariates = get_int(m.at("n_covariates"), "model.n_covariates");
    spec.link = Link::from_name(get_string(m.at("link"), "model.link"));
    spec.validate();

    json data = j.at("data");
    std::vector<std::string> cov_names;
    for (const auto& v : data.at("covariate_names")) cov_names.push_back(get_string(v, "data.covariate_names"));
    data.erase("covariate_names");
    SavedModel out{FitResult(spec), parse_layout(data, "data"), cov_names};
    if (static_cast<int>(cov_names.size()) != spec.n_covariates)
      throw ValidationError("data.covariate_names: expected " + std::to_string(spec.n_covariates) + " names");

    const json& params = j.at("parameters");
    const int k = spec.num_params();
    if (!params.is_array() || static_cast<int>(params.size()) != k)
      throw ValidationError("parameters: expected " + std::to_string(k) + " entries");
    Eigen::VectorXd g(k), se(k);
    bool have_se = true;
    for (int i = 0; i < k; ++i) {
      g[i] = get_double(params[static_cast<std::size_t>(i)].at("estimate"), "parameters.estimate");
      const json& s = params[static_cast<std::size_t>(i)].at("std_error");
      if (s.is_null())
        have_se = false;
      else
        se[i] = get_double(s, "parameters.std_error");
    }
    FitResult& fit = out.fit;
    fit.gamma_hat = ParamVector(spec, g);
    if (have_se) fit.std_errors = se;
    const json& info = j.at("cond_info");
    if (!info.is_array() || static_cast<int>(info.size()) != k)
      throw ValidationError("cond_info: expected a " + std::to_string(k) + " x " + std::to_string(k) + " matrix");
    fit.cond_info.resize(k, k);
    for (int r = 0; r < k; ++r) {
      const auto row = get_doubles(info[static_cast<std::size_t>(r)], "cond_info");
      if (static_cast<int>(row.size()) != k) throw ValidationError("cond_info: ragged matrix");
      for (int c = 0; c < k; ++c) fit.cond_info(r, c) = row[static_cast<std::size_t>(c)];
    }
    const json& f = j.at("fit");
    fit.n_obs = static_cast<std::size_t>(get_int(f.at("n_obs"), "fit.n_obs"));
    fit.loglik = get_double(f.at("loglik"), "fit.loglik");
    fit.ic = {get_double(f.at("aic"), "fit.aic"), get_double(f.at("bic"), "fit.bic"), get_double(f.at("hqc"), "fit.hqc")};
    fit.converged = get_bool(f.at("converged"), "fit.converged");
    fit.message = get_string(f.at("message"), "fit.message");
    fit.n_evals = get_int(f.at("n_evals"), "fit.n_evals");
    fit.info_singular = get_bool(f.at("info_singular"), "fit.info_singular");
    if (!fit.info_singular) {
      fit.covariance = fit.cond_info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    }
    return out;
  } catch (const ValidationError&) {
    throw;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  } catch (const std::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

SavedModel read_model(const std::string& path) {
  try {
    return parse_model(read_json(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": malformed JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace marma::cli
