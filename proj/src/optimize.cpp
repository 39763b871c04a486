#include "catpool/optimize.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>

#include "catpool/errors.hpp"
#include "catpool/parallel.hpp"
#include "catpool/random.hpp"

namespace catpool {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStartStream = 0;

using Point = std::vector<double>;

std::uint64_t algorithm_stream(Algorithm a) { return 1 + static_cast<std::uint64_t>(a); }

// Evaluation bookkeeping and the shared stopping rule.
class Search {
 public:
  Search(const Objective& objective, const OptimizerConfig& config)
      : objective_(objective), config_(config), box_(config.bounds), dim_(box_.size()) {}

  std::size_t dim() const noexcept { return dim_; }
  const SearchBox& box() const noexcept { return box_; }
  double lower(std::size_t j) const { return box_.lower[j]; }
  double upper(std::size_t j) const { return box_.upper[j]; }
  double range(std::size_t j) const { return box_.upper[j] - box_.lower[j]; }

  double clamp(double v, std::size_t j) const { return std::clamp(v, box_.lower[j], box_.upper[j]); }
  void clamp(Point& x) const {
    for (std::size_t j = 0; j < dim_; ++j) x[j] = clamp(x[j], j);
  }

  Point random_point(Rng& rng) const {
    Point x(dim_);
    for (std::size_t j = 0; j < dim_; ++j) x[j] = clamp(rng.uniform(lower(j), upper(j)), j);
    return x;
  }

  double evaluate(const Point& x) {
    ++run_.evaluations;
    double v = objective_(std::span<const double>(x));
    if (std::isnan(v)) v = kInf;
    if (run_.best_point.empty() || v < run_.best_value) {
      run_.best_value = v;
      run_.best_point = x;
    }
    return v;
  }

  // Closes one iteration; returns true when the run must stop.
  bool end_iteration() {
    ++run_.iterations_used;
    if (run_.best_value < reference_ - config_.improvement_tolerance) {
      reference_ = run_.best_value;
      stall_ = 0;
    } else {
      ++stall_;
    }
    if (config_.record_trace) run_.trace.push_back({run_.iterations_used, run_.best_value});
    if (stall_ >= config_.stall_limit) {
      run_.converged = true;
      return true;
    }
    return run_.iterations_used >= config_.max_iterations;
  }

  void start(std::vector<Point> population) {
    run_.start_population = std::move(population);
    reference_ = kInf;
  }

  const Point& best_point() const noexcept { return run_.best_point; }
  double best_value() const noexcept { return run_.best_value; }
  const std::vector<Point>& start_population() const noexcept { return run_.start_population; }
  OptimizerRun take() { return std::move(run_); }

 private:
  const Objective& objective_;
  const OptimizerConfig& config_;
  const SearchBox& box_;
  std::size_t dim_;
  OptimizerRun run_;
  double reference_ = kInf;
  std::size_t stall_ = 0;
};

std::vector<double> evaluate_all(Search& search, const std::vector<Point>& population) {
  std::vector<double> values;
  values.reserve(population.size());
  for (const auto& x : population) values.push_back(search.evaluate(x));
  return values;
}

std::size_t argmin(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

// ---------------------------------------------------------------- GSA

class TsallisVisit {
 public:
  explicit TsallisVisit(double qv) : qv_(qv) {
    const double factor2 = std::exp((4.0 - qv) * std::log(qv - 1.0));
    const double factor3 = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
    factor4_p_ = std::sqrt(std::numbers::pi) * factor2 / (factor3 * (3.0 - qv));
    const double factor5 = 1.0 / (qv - 1.0) - 0.5;
    const double d1 = 2.0 - factor5;
    factor6_ = std::numbers::pi * (1.0 - factor5) / std::sin(std::numbers::pi * (1.0 - factor5)) /
               std::exp(std::lgamma(d1));
  }

  double draw(double temperature, Rng& rng) const {
    const double x = rng.normal();
    const double y = rng.normal();
    const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
    const double factor4 = factor4_p_ * factor1;
    const double sigmax = std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
    const double den = std::exp((qv_ - 1.0) * std::log(std::fabs(y)) / (3.0 - qv_));
    return x * sigmax / den;
  }

 private:
  double qv_;
  double factor4_p_ = 0.0;
  double factor6_ = 0.0;
};

constexpr double kTailLimit = 1e8;
constexpr double kMinVisitBound = 1e-10;

double wrap_into(const Search& s, double value, std::size_t j, Rng& rng, double visit) {
  if (visit > kTailLimit) visit = kTailLimit * rng.uniform();
  if (visit < -kTailLimit) visit = -kTailLimit * rng.uniform();
  double v = value + visit;
  const double r = s.range(j);
  const double a = v - s.lower(j);
  v = std::fmod(std::fmod(a, r) + r, r) + s.lower(j);
  if (std::fabs(v - s.lower(j)) < kMinVisitBound) v += kMinVisitBound;
  return s.clamp(v, j);
}

// Bounded compass search from (x, fx); returns the improved pair.
void compass_search(Search& s, Point& x, double& fx, std::size_t budget) {
  const std::size_t dim = s.dim();
  Point step(dim);
  for (std::size_t j = 0; j < dim; ++j) step[j] = 0.1 * s.range(j);
  std::size_t used = 0;
  while (used < budget) {
    bool improved = false;
    for (std::size_t j = 0; j < dim && used < budget; ++j) {
      for (double sign : {1.0, -1.0}) {
        Point trial = x;
        trial[j] = s.clamp(x[j] + sign * step[j], j);
        if (trial[j] == x[j]) continue;
        const double ft = s.evaluate(trial);
        ++used;
        if (ft < fx) {
          x = std::move(trial);
          fx = ft;
          improved = true;
          break;
        }
        if (used >= budget) break;
      }
    }
    if (improved) continue;
    bool resolved = true;
    for (std::size_t j = 0; j < dim; ++j) {
      step[j] *= 0.5;
      if (step[j] > 1e-12 * std::max(1.0, s.range(j))) resolved = false;
    }
    if (resolved) break;
  }
}

void run_gsa(Search& s, const OptimizerConfig& config, Rng& rng) {
  const GsaParams& P = config.params.gsa;
  const std::size_t dim = s.dim();
  const TsallisVisit visit(P.visiting);
  const auto& start = s.start_population();
  const auto values = evaluate_all(s, start);
  const std::size_t first = argmin(values);
  Point current = start[first];
  double energy = values[first];

  const double t1 = std::exp((P.visiting - 1.0) * std::log(2.0)) - 1.0;
  const double restart_temperature = P.initial_temperature * P.restart_temperature_ratio;
  const std::size_t ls_budget = P.local_search_budget * dim;
  std::size_t step = 0;

  while (true) {
    double temperature = P.initial_temperature * t1 /
                         (std::exp((P.visiting - 1.0) * std::log(static_cast<double>(step) + 2.0)) - 1.0);
    if (temperature < restart_temperature) {
      step = 0;
      temperature = P.initial_temperature;
      current = s.random_point(rng);
      energy = s.evaluate(current);
    }
    const double acceptance_temperature = temperature / static_cast<double>(step + 1);
    ++step;

    const double best_before = s.best_value();
    for (std::size_t move = 0; move < 2 * dim; ++move) {
      Point candidate = current;
      if (move < dim) {
        for (std::size_t j = 0; j < dim; ++j) candidate[j] = wrap_into(s, current[j], j, rng, visit.draw(temperature, rng));
      } else {
        const std::size_t j = move - dim;
        candidate[j] = wrap_into(s, current[j], j, rng, visit.draw(temperature, rng));
      }
      const double e = s.evaluate(candidate);
      const double u = rng.uniform();
      if (e < energy) {
        current = std::move(candidate);
        energy = e;
        continue;
      }
      if (!std::isfinite(e)) continue;
      const double pqv_temp = 1.0 - (1.0 - P.acceptance) * (e - energy) / acceptance_temperature;
      if (!(pqv_temp > 0.0)) continue;
      const double pqv = std::exp(std::log(pqv_temp) / (1.0 - P.acceptance));
      if (u <= pqv) {
        current = std::move(candidate);
        energy = e;
      }
    }
    if (P.local_search && s.best_value() < best_before) {
      Point x = s.best_point();
      double fx = s.best_value();
      compass_search(s, x, fx, ls_budget);
      current = std::move(x);
      energy = fx;
    }
    if (s.end_iteration()) return;
  }
}

// ---------------------------------------------------------------- DE

void run_de(Search& s, const OptimizerConfig& config, Rng& rng) {
  const DeParams& P = config.params.de;
  const std::size_t dim = s.dim();
  std::vector<Point> pop = s.start_population();
  std::vector<double> values = evaluate_all(s, pop);
  const std::size_t np = pop.size();
  while (true) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = rng.index(np); while (r1 == i);
      do r2 = rng.index(np); while (r2 == i || r2 == r1);
      do r3 = rng.index(np); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = rng.index(dim);
      Point trial = pop[i];
      for (std::size_t j = 0; j < dim; ++j) {
        if (j != forced && rng.uniform() >= P.crossover) continue;
        double v = pop[r1][j] + P.weight * (pop[r2][j] - pop[r3][j]);
        // Bounce back between the base vector and the violated edge.
        if (v < s.lower(j)) v = s.lower(j) + rng.uniform() * (pop[r1][j] - s.lower(j));
        if (v > s.upper(j)) v = s.upper(j) - rng.uniform() * (s.upper(j) - pop[r1][j]);
        trial[j] = s.clamp(v, j);
      }
      const double f = s.evaluate(trial);
      if (f <= values[i]) {
        pop[i] = std::move(trial);
        values[i] = f;
      }
    }
    if (s.end_iteration()) return;
  }
}

// ---------------------------------------------------------------- ABC

double abc_fitness(double f) {
  if (!std::isfinite(f)) return 0.0;
  return f >= 0.0 ? 1.0 / (1.0 + f) : 1.0 + std::fabs(f);
}

void run_abc(Search& s, const OptimizerConfig& config, Rng& rng) {
  const std::size_t dim = s.dim();
  std::vector<Point> food = s.start_population();
  std::vector<double> values = evaluate_all(s, food);
  const std::size_t sn = food.size();
  const std::size_t limit = config.params.abc.limit > 0 ? config.params.abc.limit : sn * dim;
  std::vector<std::size_t> trials(sn, 0);

  auto forage = [&](std::size_t i) {
    std::size_t k;
    do k = rng.index(sn); while (k == i);
    const std::size_t j = rng.index(dim);
    Point v = food[i];
    v[j] = s.clamp(food[i][j] + rng.uniform(-1.0, 1.0) * (food[i][j] - food[k][j]), j);
    const double f = s.evaluate(v);
    if (f < values[i]) {
      food[i] = std::move(v);
      values[i] = f;
      trials[i] = 0;
    } else {
      ++trials[i];
    }
  };

  std::vector<double> cumulative(sn);
  while (true) {
    for (std::size_t i = 0; i < sn; ++i) forage(i);

    double total = 0.0;
    for (std::size_t i = 0; i < sn; ++i) cumulative[i] = (total += abc_fitness(values[i]));
    for (std::size_t t = 0; t < sn; ++t) {
      std::size_t i = rng.index(sn);
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        i = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), target) -
                                     cumulative.begin());
        i = std::min(i, sn - 1);
      }
      forage(i);
    }

    const std::size_t scout = static_cast<std::size_t>(std::max_element(trials.begin(), trials.end()) - trials.begin());
    if (trials[scout] > limit) {
      food[scout] = s.random_point(rng);
      values[scout] = s.evaluate(food[scout]);
      trials[scout] = 0;
    }
    if (s.end_iteration()) return;
  }
}

// ---------------------------------------------------------------- HS

void run_hs(Search& s, const OptimizerConfig& config, Rng& rng) {
  const HsParams& P = config.params.hs;
  const std::size_t dim = s.dim();
  std::vector<Point> memory = s.start_population();
  std::vector<double> values = evaluate_all(s, memory);
  const std::size_t hms = memory.size();
  Point bandwidth(dim);
  while (true) {
    for (std::size_t j = 0; j < dim; ++j) {
      double lo = memory[0][j], hi = memory[0][j];
      for (const auto& h : memory) {
        lo = std::min(lo, h[j]);
        hi = std::max(hi, h[j]);
      }
      bandwidth[j] = P.bandwidth_fraction * (hi - lo);
    }
    Point x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (rng.uniform() < P.memory_rate) {
        x[j] = memory[rng.index(hms)][j];
        if (rng.uniform() < P.pitch_rate) x[j] += bandwidth[j] * rng.uniform(-1.0, 1.0);
      } else {
        x[j] = rng.uniform(s.lower(j), s.upper(j));
      }
      x[j] = s.clamp(x[j], j);
    }
    const double f = s.evaluate(x);
    const std::size_t worst = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    if (f < values[worst]) {
      memory[worst] = std::move(x);
      values[worst] = f;
    }
    if (s.end_iteration()) return;
  }
}

// ---------------------------------------------------------------- PSO

void run_pso(Search& s, const OptimizerConfig& config, Rng& rng) {
  const PsoParams& P = config.params.pso;
  const std::size_t dim = s.dim();
  std::vector<Point> x = s.start_population();
  std::vector<double> values = evaluate_all(s, x);
  const std::size_t swarm = x.size();
  std::vector<Point> personal = x;
  std::vector<double> personal_values = values;
  std::vector<Point> velocity(swarm, Point(dim));
  for (std::size_t i = 0; i < swarm; ++i)
    for (std::size_t j = 0; j < dim; ++j) velocity[i][j] = 0.5 * (rng.uniform(s.lower(j), s.upper(j)) - x[i][j]);
  std::size_t leader = argmin(personal_values);

  while (true) {
    for (std::size_t i = 0; i < swarm; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        double v = P.inertia * velocity[i][j] + P.cognitive * rng.uniform() * (personal[i][j] - x[i][j]) +
                   P.social * rng.uniform() * (personal[leader][j] - x[i][j]);
        v = std::clamp(v, -s.range(j), s.range(j));
        double next = x[i][j] + v;
        if (next < s.lower(j) || next > s.upper(j)) {
          next = s.clamp(next, j);
          v = 0.0;
        }
        velocity[i][j] = v;
        x[i][j] = next;
      }
      const double f = s.evaluate(x[i]);
      if (f < personal_values[i]) {
        personal[i] = x[i];
        personal_values[i] = f;
        if (f < personal_values[leader]) leader = i;
      }
    }
    if (s.end_iteration()) return;
  }
}

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::GSA: return "GSA";
    case Algorithm::DE: return "DE";
    case Algorithm::ABC: return "ABC";
    case Algorithm::HS: return "HS";
    case Algorithm::PSO: return "PSO";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Algorithm a : kAllAlgorithms)
    if (algorithm_name(a) == upper) return a;
  throw DomainError("unknown algorithm '" + std::string(name) + "'");
}

void SearchBox::validate() const {
  if (lower.empty() || lower.size() != upper.size()) throw DomainError("search box dimensions are inconsistent");
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j]))
      throw DomainError("search box coordinate " + std::to_string(j) + " must satisfy finite lower < upper");
  }
}

SearchBox search_box_from_feasible(const FeasibleBox& box, double span) {
  if (!(span > 0.0)) throw DomainError("truncation span must be positive");
  SearchBox out{box.lower, box.upper};
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (std::isinf(out.upper[j])) out.upper[j] = out.lower[j] + span;
  }
  return out;
}

void OptimizerConfig::validate() const {
  bounds.validate();
  if (stall_limit == 0 || max_iterations == 0) throw DomainError("iteration limits must be positive");
  if (!(stall_limit < max_iterations)) throw DomainError("stall_limit must be below max_iterations");
  if (params.population_size < 4) throw DomainError("population_size must be at least 4");
  const GsaParams& g = params.gsa;
  if (!(g.visiting > 1.0 && g.visiting < 3.0)) throw DomainError("GSA visiting parameter must lie in (1, 3)");
  if (!(g.acceptance < 1.0)) throw DomainError("GSA acceptance parameter must be below 1");
  if (!(g.initial_temperature > 0.0)) throw DomainError("GSA initial temperature must be positive");
}

std::vector<std::vector<double>> initial_candidates(const SearchBox& bounds, std::uint64_t seed, std::size_t count) {
  bounds.validate();
  Rng rng(seed, kStartStream);
  std::vector<std::vector<double>> out(count, std::vector<double>(bounds.size()));
  for (auto& x : out)
    for (std::size_t j = 0; j < bounds.size(); ++j)
      x[j] = std::clamp(rng.uniform(bounds.lower[j], bounds.upper[j]), bounds.lower[j], bounds.upper[j]);
  return out;
}

OptimizerRun minimize(const Objective& objective, const OptimizerConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Search search(objective, config);
  search.start(initial_candidates(config.bounds, config.seed, config.params.population_size));
  Rng rng(config.seed, algorithm_stream(config.algorithm));
  switch (config.algorithm) {
    case Algorithm::GSA: run_gsa(search, config, rng); break;
    case Algorithm::DE: run_de(search, config, rng); break;
    case Algorithm::ABC: run_abc(search, config, rng); break;
    case Algorithm::HS: run_hs(search, config, rng); break;
    case Algorithm::PSO: run_pso(search, config, rng); break;
  }
  OptimizerRun run = search.take();
  run.algorithm = config.algorithm;
  run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

double Ecdf::operator()(double value) const {
  const auto it = std::upper_bound(x.begin(), x.end(), value);
  if (it == x.begin()) return 0.0;
  return F[static_cast<std::size_t>(it - x.begin()) - 1];
}

Ecdf empirical_cdf(std::span<const double> observations) {
  std::vector<double> sorted(observations.begin(), observations.end());
  std::sort(sorted.begin(), sorted.end());
  Ecdf out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
    out.x.push_back(sorted[k]);
    out.F.push_back(static_cast<double>(k + 1) / n);
  }
  return out;
}

ComparisonReport compare_optimizers(const std::vector<Problem>& problems, const std::vector<Algorithm>& algorithms,
                                    const OptimizerConfig& config, unsigned threads) {
  if (problems.empty()) throw DomainError("comparison needs at least one problem");
  if (algorithms.size() < 2) throw DomainError("comparison needs at least two algorithms");
  const std::size_t np = problems.size();
  const std::size_t na = algorithms.size();
  std::vector<OptimizerRun> runs(np * na);
  parallel_for(np * na, threads, [&](std::size_t cell) {
    OptimizerConfig c = config;
    c.bounds = problems[cell / na].bounds;
    c.algorithm = algorithms[cell % na];
    runs[cell] = minimize(problems[cell / na].objective, c);
  });

  ComparisonReport report;
  report.algorithms = algorithms;
  for (std::size_t j = 0; j < np; ++j) {
    report.problems.push_back(problems[j].name);
    std::vector<double> values, times;
    std::vector<bool> converged;
    for (std::size_t k = 0; k < na; ++k) {
      values.push_back(runs[j * na + k].best_value);
      times.push_back(runs[j * na + k].wall_time);
      converged.push_back(runs[j * na + k].converged);
    }
    const double best = *std::min_element(values.begin(), values.end());
    std::vector<double> errors;
    for (double v : values) errors.push_back(v == best ? 0.0 : std::fabs(v - best));
    report.values.push_back(std::move(values));
    report.times.push_back(std::move(times));
    report.errors.push_back(std::move(errors));
    report.converged.push_back(std::move(converged));
  }
  for (std::size_t k = 0; k < na; ++k) {
    std::vector<double> t, e;
    for (std::size_t j = 0; j < np; ++j) {
      t.push_back(report.times[j][k]);
      e.push_back(report.errors[j][k]);
    }
    report.ecdf_time.push_back(empirical_cdf(t));
    report.ecdf_error.push_back(empirical_cdf(e));
  }
  return report;
}

PoolObjective::PoolObjective(const PoolSampleSpec& spec, double xi, double p, unsigned threads)
    : laws_(spec.laws), xi_(xi), p_(p), degenerate_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (laws_.empty()) throw DomainError("pool objective needs at least one participant");
  if (!(xi > 0.0)) throw DomainError("xi must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
  losses_ = std::make_shared<const LossMatrix>(simulate_losses(laws_, spec.m, spec.seed, threads));
  loss_order_stats_ = column_order_stats(*losses_, p);
}

DrReport PoolObjective::report(std::span<const double> lambdas) const {
  if (lambdas.size() != laws_.size()) throw DomainError("multiplier vector has the wrong dimension");
  for (double l : lambdas)
    if (!(l >= 1.0) || !std::isfinite(l)) throw DomainError("multipliers must be finite and at least 1");
  const PoolSample pool = build_pool_sample(losses_, simulation_layers(laws_, xi_, p_, lambdas));
  return dr_simulated(pool, laws_, p_, loss_order_stats_);
}

double PoolObjective::operator()(std::span<const double> lambdas) const {
  try {
    const DrReport r = report(lambdas);
    double sum = 0.0;
    for (double v : r.dr) sum += v;
    return sum;
  } catch (const DegeneratePoolError& e) {
    if (degenerate_->fetch_add(1) == 0) std::clog << "pool objective: " << e.what() << "; returning +inf\n";
    return kInf;
  }
}

Objective pool_objective(const PoolSampleSpec& spec, const TailModel& model, double p, unsigned threads) {
  auto shared = std::make_shared<const PoolObjective>(spec, model.xi(), p, threads);
  return [shared](std::span<const double> lambdas) { return (*shared)(lambdas); };
}

}  // namespace catpool
