#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catpool/cli/config.hpp"
#include "catpool/cli/csv_io.hpp"
#include "catpool/evt.hpp"
#include "catpool/montecarlo.hpp"
#include "catpool/optimize.hpp"
#include "catpool/stat_tests.hpp"

namespace catpool::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

inline constexpr const char* kOutputDirEnv = "CATPOOL_OUTPUT_DIR";

// Maps an exception to the process exit code and prints it to stderr.
int report_failure(const std::exception_ptr& failure);

// CATPOOL_OUTPUT_DIR overrides the configured directory; created on demand.
std::filesystem::path prepare_output_dir(const ExperimentConfig& config);

std::string default_rv_golden_path();

// The feasible box in the caller's participant order.
FeasibleBox caller_order_box(const TailModel& model);

// asymptotic.csv: xi, i, lambda_lower, lambda_upper, dr_min.
void cmd_asymptotic(const ExperimentConfig& config);

// dr_curves.csv: xi, p, i, dr, retained, share, seed.
void cmd_simulate_dr(const ExperimentConfig& config);

// optimize.csv: xi, p, seed, algorithm, lambda_1..lambda_n, objective,
// pi_distance, time_seconds, converged.
std::vector<OptimizerRun> cmd_optimize(const ExperimentConfig& config);

// comparison.csv, comparison.json, ecdf_time.csv, ecdf_error.csv over the
// (xi, p, seed) problem grid.
ComparisonReport cmd_compare(const ExperimentConfig& config);

// parse.accepted counts aggregated rows only; rows of unselected states are
// skipped and out-of-window rows join parse.rejects.
struct IngestSummary {
  ParseSummary parse;
  std::size_t skipped_states = 0;
  std::size_t out_of_window = 0;
  std::int64_t accepted_total_cents = 0;
  std::vector<LossSeries> series;
  std::filesystem::path output;
};

// Claims export -> canonical monthly series file plus rejects.csv.
IngestSummary cmd_ingest(const ExperimentConfig& config);

struct StateEstimate {
  std::string state;
  HillEstimate hill;
  std::size_t zero_months = 0;
  RvTestResult rv;
};

struct PoolOutcome {
  std::string name;
  std::vector<std::string> states;
  std::vector<double> alphas;
  std::optional<TailEquivalenceResult> equivalence;
  std::vector<double> xi;
  double max_dr = 0.0;  // over every xi < 1, p and participant
};

struct EmpiricalSummary {
  bool synthetic = false;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t h = 0;
  std::vector<StateEstimate> states;
  std::vector<PoolOutcome> pools;
  std::optional<double> theta_hat;
  std::vector<double> generating_alphas;  // synthetic runs only
  bool hill_recovered = false;            // synthetic runs: every |rel err| <= 10%
};

// hill.csv, theta.csv, tests.csv, empirical_dr.csv from an aggregated series
// file, or from synthetic Frechet series when `synthetic` is set.
EmpiricalSummary cmd_empirical(const ExperimentConfig& config, bool synthetic);

// Writes the golden critical-value table to `path`.
RvGolden cmd_rv_critical(const ExperimentConfig& config, const std::string& path);

}  // namespace catpool::cli
