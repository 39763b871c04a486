#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "catpool/frechet.hpp"
#include "catpool/montecarlo.hpp"
#include "catpool/pool.hpp"

namespace catpool {

using Objective = std::function<double(std::span<const double>)>;

enum class Algorithm { GSA, DE, ABC, HS, PSO };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::GSA, Algorithm::DE, Algorithm::ABC, Algorithm::HS,
                                               Algorithm::PSO};

std::string_view algorithm_name(Algorithm algorithm) noexcept;
// Case-insensitive; throws DomainError on unknown names.
Algorithm parse_algorithm(std::string_view name);

// Compact search region; every coordinate finite with lower < upper.
struct SearchBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  void validate() const;
};

// Copies the feasible box, replacing +infinity upper edges by lower + span.
SearchBox search_box_from_feasible(const FeasibleBox& box, double span = 1e4);

// Generalized simulated annealing with a Tsallis visiting distribution.
struct GsaParams {
  double visiting = 2.62;
  double acceptance = -5.0;
  double initial_temperature = 5230.0;
  double restart_temperature_ratio = 2e-5;
  bool local_search = true;
  std::size_t local_search_budget = 200;  // evaluations per dimension
};

struct DeParams {
  double weight = 0.8;     // F
  double crossover = 0.9;  // CR
};

struct AbcParams {
  std::size_t limit = 0;  // 0 selects colony size * dimension
};

struct HsParams {
  double memory_rate = 0.9;  // HMCR
  double pitch_rate = 0.7;   // PAR
  double bandwidth_fraction = 0.5;  // of the per-coordinate memory spread
};

struct PsoParams {
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
};

struct AlgorithmParams {
  std::size_t population_size = 20;
  GsaParams gsa;
  DeParams de;
  AbcParams abc;
  HsParams hs;
  PsoParams pso;
};

struct OptimizerConfig {
  std::size_t stall_limit = 500;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 1;
  SearchBox bounds;
  Algorithm algorithm = Algorithm::GSA;
  AlgorithmParams params;
  double improvement_tolerance = 1e-12;
  bool record_trace = false;

  void validate() const;
};

struct TracePoint {
  std::size_t iteration = 0;
  double best_value = 0.0;
};

struct OptimizerRun {
  Algorithm algorithm = Algorithm::GSA;
  std::vector<double> best_point;
  double best_value = 0.0;
  std::size_t iterations_used = 0;
  std::size_t evaluations = 0;
  bool converged = false;  // stall rule fired before the iteration cap
  double wall_time = 0.0;  // seconds
  std::vector<TracePoint> trace;
  std::vector<std::vector<double>> start_population;
};

// Start population shared by every algorithm for a given (bounds, seed).
std::vector<std::vector<double>> initial_candidates(const SearchBox& bounds, std::uint64_t seed,
                                                    std::size_t count);

// NaN objective values are treated as +infinity.
OptimizerRun minimize(const Objective& objective, const OptimizerConfig& config);

struct Problem {
  std::string name;
  Objective objective;
  SearchBox bounds;
};

struct Ecdf {
  std::vector<double> x;  // sorted distinct observations
  std::vector<double> F;  // F[k] = fraction of observations <= x[k]

  double operator()(double value) const;
};

Ecdf empirical_cdf(std::span<const double> observations);

struct ComparisonReport {
  std::vector<std::string> problems;
  std::vector<Algorithm> algorithms;
  std::vector<std::vector<double>> values;  // attained objective [problem][algorithm]
  std::vector<std::vector<double>> times;   // seconds
  std::vector<std::vector<double>> errors;  // |x_jk - min_k x_jk|
  std::vector<std::vector<bool>> converged;
  std::vector<Ecdf> ecdf_time;   // per algorithm
  std::vector<Ecdf> ecdf_error;  // per algorithm
};

// Runs every algorithm on every problem with the shared seed, start
// population and stopping rule of `config`; problem bounds replace
// config.bounds.
ComparisonReport compare_optimizers(const std::vector<Problem>& problems, const std::vector<Algorithm>& algorithms,
                                    const OptimizerConfig& config, unsigned threads = 1);

struct PoolSampleSpec {
  std::vector<FrechetParams> laws;
  std::size_t m = 0;
  std::uint64_t seed = 0;
};

// lambda -> sum_i DR_i(p) on one frozen simulated sample. Evaluation is const
// and thread-safe. Degenerate pools evaluate to +infinity.
class PoolObjective {
 public:
  PoolObjective(const PoolSampleSpec& spec, double xi, double p, unsigned threads = 1);

  double operator()(std::span<const double> lambdas) const;
  DrReport report(std::span<const double> lambdas) const;

  std::size_t participants() const noexcept { return laws_.size(); }
  std::size_t degenerate_evaluations() const noexcept { return degenerate_->load(); }

 private:
  std::vector<FrechetParams> laws_;
  double xi_;
  double p_;
  std::shared_ptr<const LossMatrix> losses_;
  std::vector<double> loss_order_stats_;
  std::shared_ptr<std::atomic<std::size_t>> degenerate_;
};

Objective pool_objective(const PoolSampleSpec& spec, const TailModel& model, double p, unsigned threads = 1);

}  // namespace catpool
