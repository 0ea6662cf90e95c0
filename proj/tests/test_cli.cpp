#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "io.hpp"
#include "marma/diagnostics.hpp"
#include "marma/distribution.hpp"

namespace fs = std::filesystem;
using namespace marma;
using namespace marma::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "marma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() / ("marma_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

const char* kScenario = R"({
  "model": {"order": [1, 1], "link": "cloglog"},
  "scenario": {"n": 500, "burn_in": 100, "seed": 11,
               "params": {"alpha": 0.5, "beta": [-0.5], "phi": [-0.4], "theta": [-0.2]},
               "covariates": ["sin:100"]},
  "forecast": {"horizon": 4, "paths": 200, "level": 0.1, "seed": 5}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("csv parsing") {
  std::istringstream ok("# comment\nt,y\n1,0.5\n# another\n2,0.25\n");
  const CsvTable t = parse_csv(ok, "mem");
  CHECK(t.header == std::vector<std::string>{"t", "y"});
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][1] == 0.25);
  CHECK(t.where(1) == "row 2 (line 5)");
  CHECK(t.column("y") == 1);
  CHECK(t.column("x") == -1);

  std::istringstream missing("t,y\n1,0.5\n2,NA\n");
  try {
    parse_csv(missing, "mem");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::istringstream empty_cell("t,y\n1,\n");
  CHECK_THROWS_AS(parse_csv(empty_cell, "mem"), ValidationError);
  std::istringstream ragged("t,y\n1,0.5,3\n");
  CHECK_THROWS_AS(parse_csv(ragged, "mem"), ValidationError);
  std::istringstream text("t,y\n1,abc\n");
  CHECK_THROWS_AS(parse_csv(text, "mem"), ValidationError);
  std::istringstream dup("y,y\n1,0.5\n");
  CHECK_THROWS_AS(parse_csv(dup, "mem"), ValidationError);
  std::istringstream none("");
  CHECK_THROWS_AS(parse_csv(none, "mem"), ValidationError);
}

TEST_CASE("out of range response names its row") {
  std::ostringstream s;
  s << "t,y\n";
  for (int i = 1; i <= 20; ++i) s << i << "," << (i == 17 ? 1.2 : 0.1 + 0.03 * i) << "\n";
  std::istringstream in(s.str());
  const CsvTable t = parse_csv(in, "mem");
  try {
    load_dataset(t, DataLayout{});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 17") != std::string::npos);
    CHECK(std::string(e.what()).find("1.2") != std::string::npos);
  }
}

TEST_CASE("harmonic covariates from the time index") {
  std::ostringstream s;
  s << "t,y\n";
  for (int i = 1; i <= 30; ++i) s << i << "," << 0.3 + 0.01 * i << "\n";
  std::istringstream in(s.str());
  DataLayout layout;
  layout.harmonics = parse_harmonics("sin:12,cos:12");
  const Dataset d = load_dataset(parse_csv(in, "mem"), layout);
  REQUIRE(d.data.x.cols() == 2);
  for (int t = 1; t <= 30; ++t) {
    CHECK(d.data.x(t - 1, 0) == doctest::Approx(std::sin(2 * std::numbers::pi * t / 12)).epsilon(1e-15));
    CHECK(d.data.x(t - 1, 1) == doctest::Approx(std::cos(2 * std::numbers::pi * t / 12)).epsilon(1e-15));
  }
  CHECK(d.data.x(2, 0) == doctest::Approx(1.0));
  const auto fut = d.future_covariates(2);
  REQUIRE(fut.has_value());
  CHECK((*fut)(0, 0) == doctest::Approx(std::sin(2 * std::numbers::pi * 31 / 12)).epsilon(1e-15));
  CHECK_THROWS(parse_harmonic("tan:12"));
  CHECK_THROWS(parse_harmonic("sin:0"));
  CHECK_THROWS(parse_harmonic("sin"));
}

TEST_CASE("configuration") {
  const RunConfig c = parse_config(nlohmann::json::parse(kScenario));
  CHECK(c.ar_order == 1);
  CHECK(c.ma_order == 1);
  CHECK(c.scenario->covariates.size() == 1);
  CHECK(c.forecast.paths == 200);
  CHECK(c.hash() == parse_config(nlohmann::json::parse(kScenario)).hash());
  CHECK(c.hash() == parse_config(c.to_json()).hash());
  RunConfig threaded = c;
  threaded.threads = 8;
  CHECK(threaded.hash() == c.hash());
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"model": {"order": [1, 1], "lnk": "logit"}})")), ValidationError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"modle": {}})")), ValidationError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"forecast": {"horizon": "3"}})")), ValidationError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"mc": {"kind": "nonsense"}})")), ValidationError);
  CHECK_THROWS_AS(make_scenario(parse_config(nlohmann::json::parse(
                      R"({"model": {"order": [1, 0]}, "scenario": {"params": {"alpha": 0.1, "phi": [0.1, 0.2]}}})"))),
                  ValidationError);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  CHECK(call({"fit", "--data", tmp / "nope.csv"}).code == kIo);
  CHECK(call({"fit"}).code == kValidation);
  CHECK(call({"frobnicate"}).code == kValidation);
  spit(tmp / "bad.json", "{ not json");
  CHECK(call({"simulate", "--config", tmp / "bad.json"}).code == kIo);
  spit(tmp / "unknown.json", R"({"scenario": {"params": {"alpha": 0.1}}, "extra": 1})");
  const Outcome u = call({"simulate", "--config", tmp / "unknown.json"});
  CHECK(u.code == kValidation);
  CHECK(u.err.find("extra") != std::string::npos);

  std::ostringstream s;
  s << "t,y\n";
  for (int i = 1; i <= 20; ++i) s << i << "," << (i == 17 ? 1.2 : 0.1 + 0.03 * i) << "\n";
  spit(tmp / "range.csv", s.str());
  const Outcome r = call({"fit", "--data", tmp / "range.csv"});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("row 17") != std::string::npos);
  CHECK(call({"fit", "--data", tmp / "range.csv", "--order", "1"}).code == kValidation);
  CHECK(call({"fit", "--data", tmp / "range.csv", "--link", "probit"}).code == kValidation);
}

TEST_CASE("simulate, fit, forecast and diagnose") {
  TempDir tmp;
  spit(tmp / "run.json", kScenario);
  const Outcome sim = call({"simulate", "--config", tmp / "run.json", "--out", tmp / "data.csv"});
  REQUIRE(sim.code == kOk);
  const std::string data = slurp(tmp / "data.csv");
  CHECK(data.find("# seed: 11") != std::string::npos);
  CHECK(data.find("t,y,sin(2*pi*t/100)") != std::string::npos);

  const Outcome fitted =
      call({"fit", "--data", tmp / "data.csv", "--config", tmp / "run.json", "--harmonics", "sin:100", "--out",
            tmp / "model.json", "--format", "json"});
  REQUIRE(fitted.code == kOk);
  const auto report = nlohmann::json::parse(fitted.out);
  const std::vector<double> truth = {0.5, -0.5, -0.4, -0.2};
  REQUIRE(report["parameters"].size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const double est = report["parameters"][j]["estimate"];
    const double se = report["parameters"][j]["std_error"];
    CAPTURE(j);
    CHECK(std::abs(est - truth[j]) < 3 * se);
    CHECK(report["parameters"][j].contains("p_value"));
  }
  CHECK(report["fit"]["converged"] == true);
  CHECK(report["metadata"]["config_hash"].is_string());
  CHECK(report["fit"].contains("aic"));
  CHECK(report["diagnostics"]["quantile_residuals"].contains("ks"));

  const Outcome table = call({"fit", "--data", tmp / "data.csv", "--config", tmp / "run.json"});
  CHECK(table.code == kOk);
  CHECK(table.out.find("theta1") != std::string::npos);
  // the stored column and the declared harmonic are the same covariate
  const Outcome column = call({"fit", "--data", tmp / "data.csv", "--config", tmp / "run.json", "--format", "json"});
  REQUIRE(column.code == kOk);
  CHECK(nlohmann::json::parse(column.out)["fit"]["loglik"].get<double>() ==
        doctest::Approx(report["fit"]["loglik"].get<double>()).epsilon(1e-12));

  const std::vector<std::string> fc = {"forecast", "--data", tmp / "data.csv", "--model", tmp / "model.json",
                                       "--config", tmp / "run.json", "--out", tmp / "fc1.csv"};
  REQUIRE(call(fc).code == kOk);
  std::vector<std::string> again = fc;
  again.back() = tmp / "fc2.csv";
  again.push_back("--threads");
  again.push_back("4");
  REQUIRE(call(again).code == kOk);
  const std::string f1 = slurp(tmp / "fc1.csv");
  CHECK(f1 == slurp(tmp / "fc2.csv"));
  CHECK(f1.find("step,t,point,lower,upper") != std::string::npos);
  CHECK(f1.find("# seed: 5") != std::string::npos);
  // rows: step 1..4 at t = 501..504, point inside the interval
  std::istringstream in(f1);
  const CsvTable rows = parse_csv(in, "fc1");
  REQUIRE(rows.rows.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(rows.rows[k][1] == 501 + k);
    CHECK(rows.rows[k][3] <= rows.rows[k][2]);
    CHECK(rows.rows[k][2] <= rows.rows[k][4]);
  }

  const Outcome js = call({"forecast", "--data", tmp / "data.csv", "--model", tmp / "model.json", "--horizon", "2",
                           "--boot", "0", "--format", "json"});
  REQUIRE(js.code == kOk);
  const auto fj = nlohmann::json::parse(js.out);
  CHECK(fj["forecasts"].size() == 2);
  CHECK(fj["paths"] == 0);
  CHECK(fj["forecasts"][0]["point"].get<double>() == doctest::Approx(rows.rows[0][2]).epsilon(1e-15));

  const Outcome dg = call({"diagnose", "--data", tmp / "data.csv", "--model", tmp / "model.json"});
  REQUIRE(dg.code == kOk);
  const auto dj = nlohmann::json::parse(dg.out);
  CHECK(dj["parameters"].size() == 4);
  CHECK(dj["quantile_residuals"]["ks"]["p_value"].get<double>() > 0.0);
  CHECK(dj["acf"]["values"].size() == 20);
  CHECK(dj["residuals"]["quantile"].size() == 500);
  CHECK(dj["loglik"].get<double>() == doctest::Approx(report["fit"]["loglik"].get<double>()).epsilon(1e-14));
}

TEST_CASE("forecast needs future covariates for data columns") {
  TempDir tmp;
  std::ostringstream s;
  s << "t,y,x\n";
  for (int i = 1; i <= 60; ++i) s << i << "," << 0.3 + 0.2 * std::sin(i * 0.7) << "," << std::cos(i * 0.3) << "\n";
  spit(tmp / "d.csv", s.str());
  const Outcome no = call({"forecast", "--data", tmp / "d.csv", "--horizon", "2", "--boot", "0"});
  CHECK(no.code == kValidation);
  CHECK(no.err.find("future") != std::string::npos);
  spit(tmp / "future.csv", "t,x\n61,0.1\n62,0.2\n");
  CHECK(call({"forecast", "--data", tmp / "d.csv", "--horizon", "2", "--boot", "0", "--future", tmp / "future.csv"}).code ==
        kOk);
}

TEST_CASE("non-convergence exits with its own code") {
  TempDir tmp;
  spit(tmp / "run.json", kScenario);
  REQUIRE(call({"simulate", "--config", tmp / "run.json", "--out", tmp / "data.csv"}).code == kOk);
  spit(tmp / "tight.json", R"({"model": {"order": [1, 1]}, "fit": {"max_evals": 2, "polish": false}})");
  const Outcome r = call({"fit", "--data", tmp / "data.csv", "--config", tmp / "tight.json", "--out", tmp / "m.json"});
  CHECK(r.code == kNotConverged);
  CHECK(fs::exists(tmp / "m.json"));
}

TEST_CASE("iid simulation passes the distribution check") {
  TempDir tmp;
  spit(tmp / "iid.json", R"({"model": {"order": [0, 0], "link": "logit"},
    "scenario": {"n": 5000, "burn_in": 0, "seed": 3, "params": {"alpha": -0.2}}})");
  REQUIRE(call({"simulate", "--config", tmp / "iid.json", "--out", tmp / "iid.csv"}).code == kOk);
  const Dataset d = load_dataset(tmp / "iid.csv", DataLayout{});
  const Shape p = mean_to_shape(Link(LinkKind::logit).g_inv(-0.2));
  const std::vector<double> y(d.data.y.data(), d.data.y.data() + d.data.y.size());
  CHECK(ks_test(y, [&](double x) { return cdf(x, p); }).p_value > 0.01);
}

TEST_CASE("mc output is reproducible") {
  TempDir tmp;
  spit(tmp / "mc.json", R"({"model": {"order": [1, 1], "link": "cloglog"},
    "scenario": {"n": 200, "replicas": 12, "seed": 4,
                 "params": {"alpha": 0.5, "beta": [-0.5], "phi": [0.2], "theta": [-0.4]}, "covariates": ["sin:100"]},
    "mc": {"kind": "point"}})");
  REQUIRE(call({"mc", "--config", tmp / "mc.json", "--out", tmp / "a", "--threads", "1"}).code == kOk);
  REQUIRE(call({"mc", "--config", tmp / "mc.json", "--out", tmp / "b", "--threads", "3"}).code == kOk);
  CHECK(slurp(tmp / "a.json") == slurp(tmp / "b.json"));
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  const auto j = nlohmann::json::parse(slurp(tmp / "a.json"));
  CHECK(j["replicas"] == 12);
  CHECK(j["converged_only"].size() == 4);
  CHECK(j["converged_only"][0]["name"] == "alpha");
  const std::string csv = slurp(tmp / "a.csv");
  CHECK(csv.find("subset,parameter,truth,mean,median,sd") != std::string::npos);
}

TEST_CASE("the installed binary") {
  TempDir tmp;
  spit(tmp / "run.json", kScenario);
  const std::string exe = MARMA_EXE;
  CHECK(std::system((exe + " --help > " + tmp / "help.txt").c_str()) == 0);
  CHECK(slurp(tmp / "help.txt").find("simulate") != std::string::npos);
  CHECK(std::system((exe + " simulate --config " + tmp / "run.json" + " --out " + tmp / "x.csv").c_str()) == 0);
  REQUIRE(call({"simulate", "--config", tmp / "run.json", "--out", tmp / "y.csv"}).code == kOk);
  CHECK(slurp(tmp / "x.csv") == slurp(tmp / "y.csv"));
  const int status = std::system((exe + " fit --data " + tmp / "missing.csv" + " 2> " + tmp / "err.txt").c_str());
  CHECK(WEXITSTATUS(status) == kIo);
}

}
