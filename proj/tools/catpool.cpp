#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "catpool/cli/commands.hpp"
#include "catpool/errors.hpp"

using namespace catpool;
using namespace catpool::cli;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> m;
  std::string output_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON experiment configuration");
  cmd->add_option("--seed", o.seed, "Single seed replacing the configured seed list");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-m,--sample-size", o.m, "Simulated sample size");
  cmd->add_option("-o,--output-dir", o.output_dir, "Output directory (overrides " + std::string(kOutputDirEnv) + ")");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig config = o.config_path.empty() ? default_config() : load_config(o.config_path);
  if (o.seed) config.seeds = {*o.seed};
  if (o.threads) config.threads = *o.threads;
  if (o.m) config.m = *o.m;
  if (!o.output_dir.empty()) {
    config.output_dir = o.output_dir;
    ::setenv(kOutputDirEnv, o.output_dir.c_str(), 1);
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Catastrophe risk pooling: diversification ratios, layer optimization and tail estimation"};
  app.require_subcommand(1);

  CommonOptions asym_o, sim_o, opt_o, cmp_o, ing_o, emp_o, rv_o;

  auto* asym = app.add_subcommand("asymptotic", "Feasible boxes and minimal limiting DR per xi");
  add_common(asym, asym_o);

  auto* sim = app.add_subcommand("simulate-dr", "Simulated DR curves over the xi and p grids");
  add_common(sim, sim_o);

  std::vector<std::string> opt_algorithms;
  auto* opt = app.add_subcommand("optimize", "Minimize the pooled DR over layer multipliers");
  add_common(opt, opt_o);
  opt->add_option("-a,--algorithm", opt_algorithms, "GSA, DE, ABC, HS or PSO (repeatable)");

  std::vector<std::string> cmp_algorithms;
  auto* cmp = app.add_subcommand("compare", "Compare optimizers under a shared protocol");
  add_common(cmp, cmp_o);
  cmp->add_option("-a,--algorithm", cmp_algorithms, "Algorithms to compare (default: all five)");

  std::string ing_input, ing_output, ing_start, ing_end, ing_delim;
  std::vector<std::string> ing_states;
  auto* ing = app.add_subcommand("ingest", "Aggregate a claims export into monthly state series");
  add_common(ing, ing_o);
  ing->add_option("-i,--input", ing_input, "Claims file");
  ing->add_option("--output", ing_output, "Series file (relative paths land in the output directory)");
  ing->add_option("--states", ing_states, "State codes to keep");
  ing->add_option("--window-start", ing_start, "First month, YYYY-MM");
  ing->add_option("--window-end", ing_end, "Last month, YYYY-MM");
  ing->add_option("--delimiter", ing_delim, "Field delimiter");

  std::string emp_data;
  bool emp_synthetic = false;
  auto* emp = app.add_subcommand("empirical", "Tail estimation, tests and empirical DR curves");
  add_common(emp, emp_o);
  emp->add_option("-d,--data", emp_data, "Aggregated series file");
  emp->add_flag("--synthetic", emp_synthetic, "Use synthetic Frechet series instead of data");

  std::string rv_output;
  std::optional<std::size_t> rv_replications, rv_grid;
  auto* rv = app.add_subcommand("rv-critical", "Simulate critical values of the regular-variation test");
  add_common(rv, rv_o);
  rv->add_option("--output", rv_output, "Golden file path (default: <output-dir>/rv_critical_values.txt)");
  rv->add_option("--replications", rv_replications, "Monte Carlo replications");
  rv->add_option("--grid", rv_grid, "Brownian bridge grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*asym) {
      cmd_asymptotic(resolve(asym_o));
      std::cout << "wrote asymptotic.csv\n";
    } else if (*sim) {
      cmd_simulate_dr(resolve(sim_o));
      std::cout << "wrote dr_curves.csv\n";
    } else if (*opt) {
      ExperimentConfig config = resolve(opt_o);
      if (!opt_algorithms.empty()) {
        config.optimizer.algorithms.clear();
        for (const auto& a : opt_algorithms) config.optimizer.algorithms.push_back(parse_algorithm(a));
      }
      const auto runs = cmd_optimize(config);
      std::cout << "wrote optimize.csv (" << runs.size() << " runs)\n";
    } else if (*cmp) {
      ExperimentConfig config = resolve(cmp_o);
      if (!cmp_algorithms.empty()) {
        config.optimizer.algorithms.clear();
        for (const auto& a : cmp_algorithms) config.optimizer.algorithms.push_back(parse_algorithm(a));
      } else if (config.optimizer.algorithms.size() < 2) {
        config.optimizer.algorithms.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
      }
      const auto report = cmd_compare(config);
      std::cout << "wrote comparison.csv, comparison.json, ecdf_time.csv, ecdf_error.csv (" << report.problems.size()
                << " problems)\n";
    } else if (*ing) {
      ExperimentConfig config = resolve(ing_o);
      if (!ing_input.empty()) config.ingest.input = ing_input;
      if (!ing_output.empty()) config.ingest.output = ing_output;
      if (!ing_states.empty()) config.ingest.states = ing_states;
      if (!ing_delim.empty()) {
        if (ing_delim.size() != 1) throw ConfigError("delimiter", "expected a single character");
        config.ingest.schema.delimiter = ing_delim[0];
      }
      if (!ing_start.empty() || !ing_end.empty()) {
        auto ym = [](const std::string& text, const char* field) {
          int y = 0, mo = 0;
          if (std::sscanf(text.c_str(), "%d-%d", &y, &mo) != 2 || mo < 1 || mo > 12)
            throw ConfigError(field, "expected YYYY-MM");
          return YearMonth{y, mo};
        };
        if (!ing_start.empty()) config.ingest.window.start = ym(ing_start, "window-start");
        if (!ing_end.empty()) config.ingest.window.end = ym(ing_end, "window-end");
        config.validate();
      }
      const IngestSummary s = cmd_ingest(config);
      std::cout << "rows " << s.parse.rows << ", aggregated " << s.parse.accepted << ", other states "
                << s.skipped_states << ", rejected " << s.parse.rejects.size() << " (" << s.out_of_window
                << " outside the window)\n"
                << "total " << s.accepted_total_cents << " cents; wrote " << s.output.string() << " and rejects.csv\n";
    } else if (*emp) {
      ExperimentConfig config = resolve(emp_o);
      if (!emp_data.empty()) config.empirical.data = emp_data;
      const EmpiricalSummary s = cmd_empirical(config, emp_synthetic);
      std::cout << (s.synthetic ? "synthetic" : "data") << " series: m=" << s.m << ", k=" << s.k << ", h=" << s.h << '\n';
      for (std::size_t i = 0; i < s.states.size(); ++i) {
        const auto& st = s.states[i];
        std::cout << "  " << st.state << ": alpha_hat=" << st.hill.alpha << " (zero months " << st.zero_months
                  << ", RV statistic " << st.rv.statistic << (st.rv.reject ? ", rejected" : ", not rejected") << ")";
        if (s.synthetic) std::cout << " generating alpha=" << s.generating_alphas[i];
        std::cout << '\n';
      }
      for (const auto& p : s.pools) {
        std::cout << "  " << p.name << ":";
        for (double a : p.alphas) std::cout << ' ' << a;
        if (p.equivalence) std::cout << " pooled, equivalence p-value " << p.equivalence->p_value;
        std::cout << ", max DR over xi<1 " << p.max_dr << '\n';
      }
      if (s.theta_hat) std::cout << "  theta_hat(h=" << s.h << ")=" << *s.theta_hat << '\n';
      if (s.synthetic) std::cout << "  hill recovery within 10%: " << (s.hill_recovered ? "yes" : "no") << '\n';
      std::cout << "wrote hill.csv, theta.csv, tests.csv, empirical_dr.csv\n";
      if (s.synthetic && !s.hill_recovered) return kExitDegenerate;
    } else if (*rv) {
      ExperimentConfig config = resolve(rv_o);
      if (rv_replications) config.rv.settings.replications = *rv_replications;
      if (rv_grid) config.rv.settings.grid = *rv_grid;
      if (rv_o.seed) config.rv.settings.seed = *rv_o.seed;
      const std::string path =
          rv_output.empty() ? (prepare_output_dir(config) / "rv_critical_values.txt").string() : rv_output;
      const RvGolden g = cmd_rv_critical(config, path);
      for (auto it = g.values.rbegin(); it != g.values.rend(); ++it)
        std::cout << "level " << it->first << ": " << it->second << '\n';
      std::cout << "wrote " << path << '\n';
    }
  } catch (...) {
    return report_failure(std::current_exception());
  }
  return kExitOk;
}
