#include "catpool/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <json.hpp>

#include "catpool/errors.hpp"
#include "catpool/ingest.hpp"
#include "catpool/parallel.hpp"
#include "catpool/pool.hpp"

namespace catpool::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

void require_laws(const ExperimentConfig& config) {
  if (!config.model.has_laws()) throw ConfigError("model.laws", "this command simulates and needs Frechet laws");
}

std::vector<double> lambdas_for(const ExperimentConfig& config, double xi) {
  if (config.lambda_policy == LambdaPolicy::Explicit) return config.lambdas;
  return caller_order_box(config.tail_model(xi)).lower;
}

std::string problem_name(double xi, double p, std::uint64_t seed) {
  return "xi=" + num(xi) + ";p=" + num(p) + ";seed=" + std::to_string(seed);
}

OptimizerConfig optimizer_config(const ExperimentConfig& config, const SearchBox& bounds, std::uint64_t seed,
                                 Algorithm algorithm) {
  OptimizerConfig c;
  c.stall_limit = config.optimizer.stall_limit;
  c.max_iterations = config.optimizer.max_iterations;
  c.params.population_size = config.optimizer.population_size;
  c.seed = seed;
  c.bounds = bounds;
  c.algorithm = algorithm;
  return c;
}

struct Cell {
  double xi;
  double p;
  std::uint64_t seed;
};

std::vector<Cell> problem_grid(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (double xi : config.resolved_xi_grid())
    for (double p : config.p_grid)
      for (std::uint64_t seed : config.seeds) cells.push_back({xi, p, seed});
  return cells;
}

json ecdf_json(const Ecdf& e) { return {{"x", e.x}, {"F", e.F}}; }

void write_ecdf(const fs::path& path, const ComparisonReport& report, const std::vector<Ecdf>& ecdfs) {
  CsvWriter out(path.string(), {"algorithm", "x", "F"});
  for (std::size_t k = 0; k < ecdfs.size(); ++k)
    for (std::size_t j = 0; j < ecdfs[k].x.size(); ++j)
      out.row({std::string(algorithm_name(report.algorithms[k])), num(ecdfs[k].x[j]), num(ecdfs[k].F[j])});
  out.close();
}

std::size_t state_index(const std::vector<LossSeries>& series, const std::string& state) {
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].state == state) return i;
  throw SchemaError("series data has no state '" + state + "'");
}

std::vector<LossSeries> synthetic_series(const ExperimentConfig& config) {
  const SyntheticConfig& s = config.empirical.synthetic;
  std::vector<LossSeries> out;
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    const auto draws = frechet_sample(make_frechet(s.alphas[i], 1.0), s.months, config.seeds.front(), i);
    LossSeries series{s.states[i], {2000, 1}, {}};
    for (double d : draws) series.cents.push_back(std::llround(std::min(d * 100.0, 9e18)));
    out.push_back(std::move(series));
  }
  return out;
}

double rv_critical_for(const ExperimentConfig& config, double significance) {
  const std::string golden = default_rv_golden_path();
  if (fs::exists(golden)) {
    const RvGolden table = read_rv_golden(golden);
    for (const auto& [level, value] : table.values)
      if (std::fabs(level - significance) < 1e-12) return value;
  }
  RvCriticalSettings settings = config.rv.settings;
  settings.threads = config.threads;
  return rv_critical_value(significance, settings);
}

}  // namespace

int report_failure(const std::exception_ptr& failure) {
  try {
    std::rethrow_exception(failure);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegeneratePoolError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DegenerateDataError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  const char* env = std::getenv(kOutputDirEnv);
  const fs::path dir = env && *env ? fs::path(env) : fs::path(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::string default_rv_golden_path() { return std::string(CATPOOL_DATA_DIR) + "/rv_critical_values.txt"; }

FeasibleBox caller_order_box(const TailModel& model) {
  const FeasibleBox box = feasible_box(model);
  FeasibleBox out{std::vector<double>(box.size()), std::vector<double>(box.size())};
  for (std::size_t k = 0; k < box.size(); ++k) {
    out.lower[model.order()[k]] = box.lower[k];
    out.upper[model.order()[k]] = box.upper[k];
  }
  return out;
}

void cmd_asymptotic(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = prepare_output_dir(config);
  CsvWriter out((dir / "asymptotic.csv").string(), {"xi", "i", "lambda_lower", "lambda_upper", "dr_min"});
  for (double xi : config.resolved_xi_grid()) {
    const TailModel model = config.tail_model(xi);
    const FeasibleBox box = caller_order_box(model);
    const std::vector<double> dr_min = minimal_asymptotic_dr(model);
    std::vector<double> dr_caller(dr_min.size());
    for (std::size_t k = 0; k < dr_min.size(); ++k) dr_caller[model.order()[k]] = dr_min[k];
    for (std::size_t i = 0; i < box.size(); ++i)
      out.row({num(xi), num(i + 1), num(box.lower[i]), num(box.upper[i]), num(dr_caller[i])});
  }
  out.close();
}

void cmd_simulate_dr(const ExperimentConfig& config) {
  config.validate();
  require_laws(config);
  if (config.lambda_policy == LambdaPolicy::Optimize)
    throw ConfigError("lambda_policy", "simulate-dr needs box_lower or explicit");
  const fs::path dir = prepare_output_dir(config);
  const auto& laws = config.model.laws;
  const std::vector<double> xis = config.resolved_xi_grid();
  std::vector<std::vector<double>> lambdas;
  for (double xi : xis) lambdas.push_back(lambdas_for(config, xi));

  // reports[seed][xi][p]
  std::vector<std::vector<std::vector<DrReport>>> reports(
      config.seeds.size(), std::vector<std::vector<DrReport>>(xis.size(), std::vector<DrReport>(config.p_grid.size())));
  parallel_for(config.seeds.size(), config.threads, [&](std::size_t s) {
    const auto losses = std::make_shared<const LossMatrix>(simulate_losses(laws, config.m, config.seeds[s]));
    for (std::size_t q = 0; q < config.p_grid.size(); ++q) {
      const double p = config.p_grid[q];
      const std::vector<double> order_stats = column_order_stats(*losses, p);
      for (std::size_t x = 0; x < xis.size(); ++x) {
        const PoolSample pool = build_pool_sample(losses, simulation_layers(laws, xis[x], p, lambdas[x]));
        reports[s][x][q] = dr_simulated(pool, laws, p, order_stats);
      }
    }
  });

  CsvWriter out((dir / "dr_curves.csv").string(), {"xi", "p", "i", "dr", "retained", "share", "seed"});
  for (std::size_t s = 0; s < config.seeds.size(); ++s)
    for (std::size_t x = 0; x < xis.size(); ++x)
      for (const DrReport& r : reports[s][x])
        for (std::size_t i = 0; i < r.dr.size(); ++i)
          out.row({num(xis[x]), num(r.p), num(i + 1), num(r.dr[i]), num(r.retained_ratio[i]), num(r.share_ratio[i]),
                   std::to_string(config.seeds[s])});
  out.close();
}

std::vector<OptimizerRun> cmd_optimize(const ExperimentConfig& config) {
  config.validate();
  require_laws(config);
  const fs::path dir = prepare_output_dir(config);
  const std::vector<Cell> cells = problem_grid(config);
  const auto& algorithms = config.optimizer.algorithms;
  const std::size_t na = algorithms.size();
  std::vector<OptimizerRun> runs(cells.size() * na);
  std::vector<double> distances(runs.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const TailModel model = config.tail_model(cell.xi);
    const FeasibleBox box = caller_order_box(model);
    const Objective objective = pool_objective({config.model.laws, config.m, cell.seed}, model, cell.p);
    for (std::size_t a = 0; a < na; ++a) {
      runs[c * na + a] = minimize(objective, optimizer_config(config, search_box_from_feasible(box), cell.seed, algorithms[a]));
      distances[c * na + a] = distance_to_box(runs[c * na + a].best_point, box);
    }
  });

  std::vector<std::string> header{"xi", "p", "seed", "algorithm"};
  for (std::size_t i = 0; i < config.model.size(); ++i) header.push_back("lambda_" + std::to_string(i + 1));
  for (const char* h : {"objective", "pi_distance", "time_seconds", "converged"}) header.push_back(h);
  CsvWriter out((dir / "optimize.csv").string(), header);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t a = 0; a < na; ++a) {
      const OptimizerRun& run = runs[c * na + a];
      std::vector<std::string> row{num(cells[c].xi), num(cells[c].p), std::to_string(cells[c].seed),
                                   std::string(algorithm_name(run.algorithm))};
      for (double l : run.best_point) row.push_back(num(l));
      row.push_back(num(run.best_value));
      row.push_back(num(distances[c * na + a]));
      row.push_back(num(run.wall_time));
      row.push_back(run.converged ? "true" : "false");
      out.row(row);
    }
  }
  out.close();
  return runs;
}

ComparisonReport cmd_compare(const ExperimentConfig& config) {
  config.validate();
  require_laws(config);
  if (config.optimizer.algorithms.size() < 2)
    throw ConfigError("optimizer.algorithms", "compare needs at least two algorithms");
  const fs::path dir = prepare_output_dir(config);
  std::vector<Problem> problems;
  for (const Cell& cell : problem_grid(config)) {
    const TailModel model = config.tail_model(cell.xi);
    problems.push_back({problem_name(cell.xi, cell.p, cell.seed),
                        pool_objective({config.model.laws, config.m, cell.seed}, model, cell.p),
                        search_box_from_feasible(caller_order_box(model))});
  }
  const OptimizerConfig base =
      optimizer_config(config, problems.front().bounds, config.seeds.front(), config.optimizer.algorithms.front());
  const ComparisonReport report = compare_optimizers(problems, config.optimizer.algorithms, base, config.threads);

  CsvWriter out((dir / "comparison.csv").string(), {"problem", "algorithm", "time_seconds", "error"});
  for (std::size_t j = 0; j < report.problems.size(); ++j)
    for (std::size_t k = 0; k < report.algorithms.size(); ++k)
      out.row({report.problems[j], std::string(algorithm_name(report.algorithms[k])), num(report.times[j][k]),
               num(report.errors[j][k])});
  out.close();
  write_ecdf(dir / "ecdf_time.csv", report, report.ecdf_time);
  write_ecdf(dir / "ecdf_error.csv", report, report.ecdf_error);

  json doc;
  doc["problems"] = report.problems;
  for (Algorithm a : report.algorithms) doc["algorithms"].push_back(std::string(algorithm_name(a)));
  doc["values"] = report.values;
  doc["times"] = report.times;
  doc["errors"] = report.errors;
  doc["converged"] = report.converged;
  for (std::size_t k = 0; k < report.algorithms.size(); ++k) {
    const std::string name(algorithm_name(report.algorithms[k]));
    doc["ecdf_time"][name] = ecdf_json(report.ecdf_time[k]);
    doc["ecdf_error"][name] = ecdf_json(report.ecdf_error[k]);
  }
  std::ofstream js(dir / "comparison.json", std::ios::binary | std::ios::trunc);
  if (!js) throw IoError("cannot write comparison.json");
  js << doc.dump(2) << '\n';
  return report;
}

IngestSummary cmd_ingest(const ExperimentConfig& config) {
  config.validate();
  const IngestSection& ing = config.ingest;
  if (ing.input.empty()) throw ConfigError("ingest.input", "no claims file given");
  const fs::path dir = prepare_output_dir(config);
  IngestSummary summary;
  const std::set<std::string> states(ing.states.begin(), ing.states.end());
  MonthlyAggregator aggregator(states, ing.window);
  std::vector<RejectedRow> window_rejects;
  summary.parse = for_each_claim(ing.input, ing.schema, [&](const ClaimRecord& record) {
    if (!states.count(record.state)) {
      ++summary.skipped_states;
    } else if (!aggregator.add(record)) {
      window_rejects.push_back({record.row, "date of loss outside the window"});
    }
  });
  summary.parse.accepted -= summary.skipped_states + window_rejects.size();
  summary.parse.rejects.insert(summary.parse.rejects.end(), window_rejects.begin(), window_rejects.end());
  std::sort(summary.parse.rejects.begin(), summary.parse.rejects.end(),
            [](const RejectedRow& a, const RejectedRow& b) { return a.row < b.row; });
  summary.out_of_window = aggregator.out_of_window();
  summary.accepted_total_cents = aggregator.accepted_total_cents();
  summary.series = aggregator.series();
  summary.output = fs::path(ing.output).is_absolute() ? fs::path(ing.output) : dir / ing.output;
  persist_series(summary.series, summary.output.string());

  CsvWriter rejects((dir / "rejects.csv").string(), {"row", "reason"});
  for (const RejectedRow& r : summary.parse.rejects) rejects.row({std::to_string(r.row), r.reason});
  rejects.close();
  return summary;
}

EmpiricalSummary cmd_empirical(const ExperimentConfig& config, bool synthetic) {
  config.validate();
  const EmpiricalSection& emp = config.empirical;
  const fs::path dir = prepare_output_dir(config);
  EmpiricalSummary summary;
  summary.synthetic = synthetic;

  std::vector<LossSeries> series;
  std::vector<PoolConfig> pools = emp.pools;
  if (synthetic) {
    series = synthetic_series(config);
    summary.generating_alphas = emp.synthetic.alphas;
    pools = {{"synthetic", emp.synthetic.states, false}};
  } else {
    if (emp.data.empty()) throw ConfigError("empirical.data", "no series file given");
    series = read_series(emp.data);
  }
  if (series.empty()) throw SchemaError("series data holds no state");
  const std::size_t m = series.front().cents.size();
  for (const auto& s : series)
    if (s.cents.size() != m) throw SchemaError("series differ in length");
  summary.m = m;
  summary.k = emp.k.value_or(default_tail_count(m));
  summary.h = emp.h.value_or(default_tail_count(m));

  std::vector<std::string> used;
  for (const auto& pool : pools)
    for (const auto& s : pool.states)
      if (std::find(used.begin(), used.end(), s) == used.end()) used.push_back(s);

  std::map<std::string, std::vector<double>> values;
  for (const auto& s : used) values[s] = series[state_index(series, s)].values();

  // Hill sweeps and per-state estimates on the positive months.
  CsvWriter hill((dir / "hill.csv").string(), {"state", "k", "alpha_hat"});
  const double critical = rv_critical_for(config, emp.significance);
  std::map<std::string, HillEstimate> estimates;
  for (const auto& s : used) {
    const PositivePart positive = positive_part(values[s]);
    const std::size_t mp = positive.values.size();
    if (mp < 3) throw DegenerateDataError("state " + s + " has fewer than 3 positive months");
    const std::size_t k_max = std::min(emp.k_max ? emp.k_max : mp / 2, mp - 1);
    std::vector<std::size_t> ks;
    for (std::size_t k = std::max<std::size_t>(emp.k_min, 1); k <= k_max; ++k) ks.push_back(k);
    for (const HillEstimate& e : hill_sweep(positive.values, ks)) hill.row({s, num(e.k), num(e.alpha)});
    StateEstimate est;
    est.state = s;
    est.zero_months = positive.excluded;
    est.hill = hill_estimate(positive.values, summary.k);
    est.rv = rv_test(positive.values, summary.k, emp.significance, critical);
    estimates[s] = est.hill;
    summary.states.push_back(est);
  }
  hill.close();

  // Scale of the tail-equivalent pair.
  std::optional<std::pair<std::string, std::string>> pair = emp.theta_pair;
  if (!pair) {
    for (const auto& pool : pools)
      if (pool.states.size() >= 2 && (pool.pooled || !pair)) {
        pair = {pool.states[1], pool.states[0]};
        if (pool.pooled) break;
      }
  }
  CsvWriter theta((dir / "theta.csv").string(), {"h", "theta_hat"});
  if (pair) {
    for (const auto& s : {pair->first, pair->second})
      if (!values.count(s)) values[s] = series[state_index(series, s)].values();
    const auto& sample = values[pair->first];
    const auto& reference = values[pair->second];
    const std::size_t h_max = std::min(emp.k_max ? emp.k_max : m / 2, m - 1);
    std::vector<std::size_t> hs;
    for (std::size_t h = std::max<std::size_t>(emp.k_min, 1); h <= h_max; ++h) hs.push_back(h);
    const auto thetas = scale_sweep(sample, reference, hs);
    for (std::size_t i = 0; i < hs.size(); ++i) theta.row({num(hs[i]), num(thetas[i])});
    summary.theta_hat = scale_estimate(sample, reference, summary.h);
  }
  theta.close();

  // Tests.
  CsvWriter tests((dir / "tests.csv").string(), {"test", "k", "statistic", "critical_or_p"});
  for (const auto& est : summary.states)
    tests.row({"rv:" + est.state, num(est.rv.k), num(est.rv.statistic), num(est.rv.critical_value)});
  for (std::size_t a = 0; a < used.size(); ++a) {
    for (std::size_t b = a + 1; b < used.size(); ++b) {
      const CorrelationTests c = correlation_tests(values[used[a]], values[used[b]]);
      const std::string names = used[a] + "-" + used[b];
      tests.row({"pearson:" + names, "", num(c.pearson.coefficient), num(c.pearson.p_value)});
      tests.row({"spearman:" + names, "", num(c.spearman.coefficient), num(c.spearman.p_value)});
    }
  }

  // DR curves.
  std::vector<double> p_grid;
  for (double p : config.p_grid)
    if (p > 0.8) p_grid.push_back(p);
  if (p_grid.empty()) throw ConfigError("p_grid", "empirical DR needs p > 0.8");
  CsvWriter dr((dir / "empirical_dr.csv").string(), {"pool", "xi", "p", "i", "state", "dr", "retained", "share"});
  for (const auto& pool : pools) {
    PoolOutcome outcome;
    outcome.name = pool.name;
    outcome.states = pool.states;
    std::vector<HillEstimate> members;
    for (const auto& s : pool.states) members.push_back(estimates.at(s));
    if (pool.pooled) {
      const TailEquivalenceResult te = tail_equivalence_from_estimates(members);
      outcome.equivalence = te;
      outcome.alphas.assign(pool.states.size(), te.pooled.alpha_pool);
      tests.row({"tail_equivalence:" + pool.name, num(summary.k), num(te.statistic), num(te.p_value)});
    } else {
      for (const auto& e : members) outcome.alphas.push_back(e.alpha);
    }
    std::vector<std::vector<double>> columns;
    for (const auto& s : pool.states) columns.push_back(values[s]);
    const LossMatrix data = LossMatrix::from_columns(columns);
    for (double level : config.xi_levels) {
      const double xi = std::pow(level, 1.0 / outcome.alphas[0]);
      outcome.xi.push_back(xi);
      std::vector<double> lambdas;
      for (double a : outcome.alphas) lambdas.push_back(std::pow(xi, -outcome.alphas[0] / a));
      const LambdaVector lv(lambdas);
      for (double p : p_grid) {
        const DrReport r = dr_empirical(data, outcome.alphas, xi, lv, p);
        for (std::size_t i = 0; i < r.dr.size(); ++i) {
          dr.row({pool.name, num(xi), num(p), num(i + 1), pool.states[i], num(r.dr[i]), num(r.retained_ratio[i]),
                  num(r.share_ratio[i])});
          if (xi < 1.0) outcome.max_dr = std::max(outcome.max_dr, r.dr[i]);
        }
      }
    }
    summary.pools.push_back(std::move(outcome));
  }
  tests.close();
  dr.close();

  if (synthetic) {
    summary.hill_recovered = true;
    for (std::size_t i = 0; i < summary.states.size(); ++i) {
      const double rel = std::fabs(summary.states[i].hill.alpha - emp.synthetic.alphas[i]) / emp.synthetic.alphas[i];
      if (!(rel <= 0.10)) summary.hill_recovered = false;
    }
  }
  return summary;
}

RvGolden cmd_rv_critical(const ExperimentConfig& config, const std::string& path) {
  config.validate();
  RvGolden golden;
  golden.settings = config.rv.settings;
  RvCriticalSettings settings = config.rv.settings;
  settings.threads = config.threads;
  golden.values = rv_critical_values(config.rv.levels, settings);
  fs::path out(path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_rv_golden(path, golden);
  return golden;
}

}  // namespace catpool::cli
