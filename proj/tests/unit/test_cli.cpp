#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "catpool/cli/commands.hpp"
#include "catpool/cli/config.hpp"
#include "catpool/cli/csv_io.hpp"
#include "catpool/errors.hpp"

using namespace catpool;
using namespace catpool::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace fs = std::filesystem;

namespace {

// Fresh scratch directory; the output-dir variable is cleared so the
// configured directory is used.
fs::path scratch(const std::string& name) {
  ::unsetenv(kOutputDirEnv);
  const fs::path dir = fs::temp_directory_path() / ("catpool_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error_field(const std::string& json) {
  try {
    parse_config(json).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig c = default_config();
  c.output_dir = dir.string();
  c.m = 4000;
  c.xi_levels = {0.1};
  c.p_grid = {0.9};
  c.seeds = {1, 2};
  c.optimizer.stall_limit = 20;
  c.optimizer.max_iterations = 60;
  return c;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(CATPOOL_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("default configuration") {
  const auto c = default_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.p_grid.size() == 176);
  CHECK(c.p_grid.front() == 0.8);
  CHECK(c.p_grid.back() == 0.975);
  const auto xi = c.resolved_xi_grid();
  REQUIRE(xi.size() == 4);
  CHECK_THAT(xi[0], WithinAbs(std::pow(0.1, 1.0 / 8.5), 1e-15));
}

TEST_CASE("arithmetic grids are exact at the ends") {
  const auto g = arithmetic_grid(0.8, 0.975, 0.001);
  CHECK(g[100] == 0.9);
  CHECK_THROWS_AS(arithmetic_grid(1, 0, 0.1), ConfigError);
}

TEST_CASE("config validation names the offending field") {
  CHECK_THAT(config_error_field(R"({"p_grid": [0.5, 1.2]})"), ContainsSubstring("p_grid"));
  CHECK_THAT(config_error_field(R"({"p_grid": [0.0]})"), ContainsSubstring("p_grid"));
  CHECK_THAT(config_error_field(R"({"xi_grid": [0.5, -1]})"), ContainsSubstring("xi_grid"));
  CHECK_THAT(config_error_field(R"({"xi_grid": [0]})"), ContainsSubstring("xi_grid"));
  CHECK_THAT(config_error_field(R"({"m": 5})"), ContainsSubstring("m"));
  CHECK_THAT(config_error_field(R"({"sample": 5})"), ContainsSubstring("sample"));
  CHECK_THAT(config_error_field(R"({"model": {"laws": [{"alpha": -1, "scale": 1}]}})"), ContainsSubstring("model"));
  CHECK_THAT(config_error_field(R"({"lambda_policy": "explicit"})"), ContainsSubstring("lambdas"));
  CHECK_THAT(config_error_field(R"({"optimizer": {"algorithms": ["XYZ"]}})"), ContainsSubstring("optimizer.algorithms"));
  CHECK_THAT(config_error_field("{not json"), ContainsSubstring("JSON"));
  CHECK(config_error_field(R"({"p_grid": {"from": 0.9, "to": 0.99, "step": 0.01}, "m": 10})").empty());
}

TEST_CASE("numbers round trip through text") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02e23}) CHECK(parse_number(format_number(v)) == v);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(format_number(inf) == "inf");
  CHECK(format_number(-inf) == "-inf");
  CHECK(parse_number("inf") == inf);
  CHECK(std::isnan(parse_number(format_number(std::nan("")))));
  CHECK_THROWS_AS(parse_number("1.5x"), SchemaError);
}

TEST_CASE("csv tables round trip") {
  const fs::path dir = scratch("csv");
  const fs::path path = dir / "t.csv";
  {
    CsvWriter w(path.string(), {"name", "value"});
    w.row({"plain", "1"});
    w.row({"with,comma", "inf"});
    w.row({"with \"quote\"", "2.5"});
    CHECK_THROWS_AS(w.row({"short"}), DomainError);
    w.close();
  }
  const CsvTable t = read_csv(path.string());
  REQUIRE(t.rows.size() == 3);
  CHECK(t.text(1, "name") == "with,comma");
  CHECK(t.text(2, "name") == "with \"quote\"");
  CHECK(t.number(1, "value") == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(t.column("missing"), SchemaError);
  CHECK(slurp(path).find('\r') == std::string::npos);
}

TEST_CASE("the RV golden file") {
  const RvGolden golden = read_rv_golden(default_rv_golden_path());
  CHECK(golden.settings.grid == 10'000);
  CHECK(golden.settings.replications == 100'000);
  REQUIRE(golden.values.count(0.01) == 1);
  CHECK(golden.values.at(0.1) < golden.values.at(0.05));
  CHECK(golden.values.at(0.05) < golden.values.at(0.01));

  const fs::path path = scratch("golden") / "g.txt";
  write_rv_golden(path.string(), golden);
  const RvGolden back = read_rv_golden(path.string());
  CHECK(back.values == golden.values);
  CHECK(back.settings.seed == golden.settings.seed);
}

TEST_CASE("asymptotic command") {
  const fs::path dir = scratch("asymptotic");
  ExperimentConfig c = default_config();
  c.output_dir = dir.string();
  c.xi_grid = {std::pow(0.1, 1.0 / 8.5), 1.0};
  cmd_asymptotic(c);
  const CsvTable t = read_csv((dir / "asymptotic.csv").string());
  REQUIRE(t.rows.size() == 4);
  CHECK_THAT(t.number(0, "lambda_lower"), WithinAbs(1.3111, 1e-4));
  CHECK_THAT(t.number(0, "lambda_upper"), WithinAbs(2.3111, 1e-4));
  CHECK_THAT(t.number(1, "lambda_upper"), WithinAbs(2.4568, 1e-4));
  CHECK(t.number(2, "dr_min") == 1.0);
  CHECK(t.number(3, "dr_min") == 1.0);

  ExperimentConfig m2 = c;
  m2.model.laws = {{8.5, 100.0}, {9.0, 100.0}};
  m2.xi_grid = {std::pow(0.1, 1.0 / 8.5)};
  cmd_asymptotic(m2);
  const CsvTable u = read_csv((dir / "asymptotic.csv").string());
  CHECK(u.text(1, "lambda_upper") == "inf");
  CHECK_THAT(u.number(1, "lambda_lower"), WithinAbs(1.2915, 1e-4));
}

TEST_CASE("simulate-dr command shape, ordering in xi and idempotency") {
  const fs::path dir = scratch("simulate");
  ExperimentConfig c = small_config(dir);
  c.xi_levels = {0.1, 0.7};
  c.p_grid = {0.85, 0.9, 0.95};
  cmd_simulate_dr(c);
  const std::string first = slurp(dir / "dr_curves.csv");
  const CsvTable t = read_csv((dir / "dr_curves.csv").string());
  CHECK(t.rows.size() == 2 * 3 * 2 * 2);
  double low = 0.0, high = 0.0;
  const double xi_low = c.resolved_xi_grid()[0];
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK_THAT(t.number(r, "dr"), WithinAbs(t.number(r, "retained") + t.number(r, "share"), 1e-12));
    CHECK(t.number(r, "dr") < 1.0);
    (t.number(r, "xi") == xi_low ? low : high) += t.number(r, "dr");
  }
  CHECK(low < high);
  cmd_simulate_dr(c);
  CHECK(slurp(dir / "dr_curves.csv") == first);

  c.lambda_policy = LambdaPolicy::Optimize;
  CHECK_THROWS_AS(cmd_simulate_dr(c), ConfigError);
}

TEST_CASE("optimize command") {
  const fs::path dir = scratch("optimize");
  ExperimentConfig c = small_config(dir);
  c.lambda_policy = LambdaPolicy::Optimize;
  const auto runs = cmd_optimize(c);
  CHECK(runs.size() == 2);
  const CsvTable t = read_csv((dir / "optimize.csv").string());
  REQUIRE(t.rows.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(t.number(r, "pi_distance") >= 0.0);
    CHECK(t.text(r, "algorithm") == "GSA");
    CHECK(t.number(r, "lambda_1") >= 1.0);
  }
  CHECK(t.number(0, "objective") == runs[0].best_value);

  // Every column except the wall time is reproducible.
  cmd_optimize(c);
  const CsvTable again = read_csv((dir / "optimize.csv").string());
  for (std::size_t r = 0; r < 2; ++r)
    for (const auto& col : t.header)
      if (col != "time_seconds") CHECK(again.text(r, col) == t.text(r, col));
}

TEST_CASE("compare command") {
  const fs::path dir = scratch("compare");
  ExperimentConfig c = small_config(dir);
  c.optimizer.algorithms = {Algorithm::GSA, Algorithm::DE};
  const auto report = cmd_compare(c);
  const CsvTable t = read_csv((dir / "comparison.csv").string());
  CHECK(t.rows.size() == 4);
  for (std::size_t j = 0; j < 2; ++j) CHECK((report.errors[j][0] == 0.0 || report.errors[j][1] == 0.0));
  CHECK(fs::exists(dir / "comparison.json"));
  const CsvTable e = read_csv((dir / "ecdf_time.csv").string());
  CHECK(e.number(e.rows.size() - 1, "F") == 1.0);
  CHECK_NOTHROW(read_csv((dir / "ecdf_error.csv").string()));

  c.optimizer.algorithms = {Algorithm::GSA};
  CHECK_THROWS_AS(cmd_compare(c), ConfigError);
}

TEST_CASE("ingest command") {
  const fs::path dir = scratch("ingest");
  const fs::path claims = dir / "claims.csv";
  {
    std::ofstream f(claims);
    f << "dateOfLoss,state,buildingDamageAmount,contentsDamageAmount\n"
      << "2001-06-09,FL,100,50\n"
      << "2001-06-10,FL,10,5\n"
      << "1970-01-01,FL,1,1\n"
      << "2001-06-10,TX,1,1\n"
      << "bad,FL,1,1\n";
  }
  ExperimentConfig c = default_config();
  c.output_dir = dir.string();
  c.ingest.input = claims.string();
  const IngestSummary s = cmd_ingest(c);
  CHECK(s.parse.rows == 5);
  CHECK(s.parse.accepted == 2);
  CHECK(s.skipped_states == 1);
  CHECK(s.out_of_window == 1);
  CHECK(s.accepted_total_cents == 16500);
  CHECK(s.parse.rejects.size() == 2);
  const auto series = read_series((dir / "series.csv").string());
  REQUIRE(series.size() == 3);
  for (const auto& x : series) CHECK(x.cents.size() == 552);
  const CsvTable rejects = read_csv((dir / "rejects.csv").string());
  CHECK(rejects.rows.size() == 2);
}

TEST_CASE("synthetic empirical pipeline") {
  const fs::path dir = scratch("empirical");
  ExperimentConfig c = default_config();
  c.output_dir = dir.string();
  c.empirical.synthetic.months = 3000;
  c.empirical.k_max = 400;
  const auto summary = cmd_empirical(c, true);
  CHECK(summary.synthetic);
  CHECK(summary.m == 3000);
  CHECK(summary.k == 300);
  REQUIRE(summary.states.size() == 3);
  for (const auto& s : summary.states) CHECK(s.rv.critical_value > 0.0);
  for (const char* name : {"hill.csv", "theta.csv", "tests.csv", "empirical_dr.csv"})
    CHECK_NOTHROW(read_csv((dir / name).string()));
  const CsvTable dr = read_csv((dir / "empirical_dr.csv").string());
  for (std::size_t r = 0; r < dr.rows.size(); ++r) CHECK(dr.number(r, "p") > 0.8);
}

TEST_CASE("output directory override") {
  const fs::path dir = scratch("override");
  const fs::path env_dir = dir / "from_env";
  ExperimentConfig c = default_config();
  c.output_dir = (dir / "from_config").string();
  CHECK(prepare_output_dir(c) == fs::path(c.output_dir));
  ::setenv(kOutputDirEnv, env_dir.string().c_str(), 1);
  CHECK(prepare_output_dir(c) == env_dir);
  CHECK(fs::is_directory(env_dir));
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("failure exit codes") {
  CHECK(report_failure(std::make_exception_ptr(ConfigError("m", "bad"))) == kExitConfig);
  CHECK(report_failure(std::make_exception_ptr(DomainError("bad"))) == kExitConfig);
  CHECK(report_failure(std::make_exception_ptr(SchemaError("bad"))) == kExitData);
  CHECK(report_failure(std::make_exception_ptr(IoError("bad"))) == kExitData);
  CHECK(report_failure(std::make_exception_ptr(DegeneratePoolError("bad"))) == kExitDegenerate);
  CHECK(report_failure(std::make_exception_ptr(DegenerateDataError("bad"))) == kExitDegenerate);
}

TEST_CASE("tool exit codes") {
  const fs::path dir = scratch("tool");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"p_grid": [1.5]})";
  // Constant monthly losses tie every tail order statistic.
  const fs::path flat = dir / "flat.csv";
  {
    std::ofstream f(flat);
    f << "state,year,month,loss_cents\n";
    for (const char* state : {"CA", "FL", "NY"})
      for (int i = 0; i < 552; ++i) f << state << ',' << 1978 + i / 12 << ',' << i % 12 + 1 << ",100\n";
  }
  const std::string out = " -o " + dir.string();
  CHECK(run_tool("asymptotic" + out) == kExitOk);
  CHECK(run_tool("asymptotic -c " + bad.string() + out) == kExitConfig);
  CHECK(run_tool("asymptotic -c " + (dir / "missing.json").string() + out) == kExitConfig);
  CHECK(run_tool("ingest --input " + (dir / "missing.csv").string() + out) == kExitData);
  CHECK(run_tool("empirical --data " + flat.string() + out) == kExitDegenerate);
  CHECK(run_tool("no-such-command") != kExitOk);
}
