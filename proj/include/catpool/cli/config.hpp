#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catpool/frechet.hpp"
#include "catpool/ingest.hpp"
#include "catpool/optimize.hpp"
#include "catpool/pool.hpp"
#include "catpool/stat_tests.hpp"

namespace catpool::cli {

// Either per-participant Frechet laws (needed for simulation) or a bare tail
// description (alphas, thetas) that only supports the asymptotic command.
struct ModelConfig {
  std::vector<FrechetParams> laws;
  std::vector<double> alphas;
  std::vector<double> thetas;

  bool has_laws() const noexcept { return !laws.empty(); }
  std::size_t size() const noexcept { return has_laws() ? laws.size() : alphas.size(); }
};

enum class LambdaPolicy { BoxLower, Explicit, Optimize };

struct OptimizerSection {
  std::vector<Algorithm> algorithms{Algorithm::GSA};
  std::size_t stall_limit = 500;
  std::size_t max_iterations = 10'000;
  std::size_t population_size = 20;
};

struct PoolConfig {
  std::string name;
  std::vector<std::string> states;
  bool pooled = false;  // common tail index from the pooled estimator
};

struct SyntheticConfig {
  std::vector<std::string> states{"S1", "S2", "S3"};
  std::vector<double> alphas{0.555, 0.646, 0.719};
  std::size_t months = 24'000;
};

struct EmpiricalSection {
  std::string data;  // aggregated series file
  std::vector<PoolConfig> pools;
  std::optional<std::size_t> k;  // default: 10% of the series length
  std::optional<std::size_t> h;
  std::size_t k_min = 5;
  std::size_t k_max = 0;  // 0: half the positive observations
  std::optional<std::pair<std::string, std::string>> theta_pair;  // (sample, reference)
  double significance = 0.05;
  SyntheticConfig synthetic;
};

struct IngestSection {
  std::string input;
  std::string output = "series.csv";
  std::vector<std::string> states{"CA", "FL", "NY"};
  MonthWindow window{{1978, 1}, {2023, 12}};
  ClaimSchema schema;
};

struct RvSection {
  RvCriticalSettings settings;
  std::vector<double> levels{0.10, 0.05, 0.01};
};

struct ExperimentConfig {
  ModelConfig model;
  std::vector<double> xi_grid;  // explicit values; empty selects xi_levels
  std::vector<double> xi_levels{0.1, 0.3, 0.5, 0.7};
  std::vector<double> p_grid;
  LambdaPolicy lambda_policy = LambdaPolicy::BoxLower;
  std::vector<double> lambdas;
  std::size_t m = 100'000;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = ".";
  unsigned threads = 1;
  OptimizerSection optimizer;
  EmpiricalSection empirical;
  IngestSection ingest;
  RvSection rv;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // xi_grid, or level^(1/alpha_1) for each level with alpha_1 the smallest
  // tail index of the model.
  std::vector<double> resolved_xi_grid() const;
  TailModel tail_model(double xi) const;
};

// Evenly spaced grid from `from` to `to` inclusive, built by index.
std::vector<double> arithmetic_grid(double from, double to, double step);

// Two Frechet laws (8.5, 100) and (8.5, 90), p from 0.8 to 0.975 by 0.001.
ExperimentConfig default_config();

// Parses a JSON document over the defaults; unknown keys are errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

LambdaPolicy parse_lambda_policy(const std::string& name);
std::string lambda_policy_name(LambdaPolicy policy);

}  // namespace catpool::cli
