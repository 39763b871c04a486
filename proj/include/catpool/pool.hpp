#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "catpool/frechet.hpp"
#include "catpool/layer.hpp"

namespace catpool {

// Tail description of an n-participant pool in normalized order: index 0
// carries the heaviest tail (smallest alpha) and theta 1; participants with
// a strictly lighter tail have theta exactly 0.
class TailModel {
 public:
  // Validates the normalized-order invariants; throws DomainError.
  TailModel(std::vector<double> alphas, std::vector<double> thetas, double xi);

  // Builds a model from unordered per-participant tail indices and tail
  // constants c_i (survival ~ c_i * t^-alpha_i). Participants are reordered
  // so the heaviest tail with the largest constant comes first; order()
  // records original indices.
  static TailModel normalized(std::span<const double> alphas, std::span<const double> tail_constants,
                              double xi);

  // Frechet(alpha, s) has tail constant s^alpha.
  static TailModel from_frechet(std::span<const FrechetParams> laws, double xi);

  std::size_t size() const noexcept { return alphas_.size(); }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  const std::vector<double>& thetas() const noexcept { return thetas_; }
  double alpha(std::size_t i) const { return alphas_.at(i); }
  double theta(std::size_t i) const { return thetas_.at(i); }
  double xi() const noexcept { return xi_; }
  // order()[k] is the caller's index of normalized participant k.
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  TailModel with_xi(double xi) const;

 private:
  std::vector<double> alphas_;
  std::vector<double> thetas_;
  double xi_;
  std::vector<std::size_t> order_;
};

// Layer-width multipliers lambda_i = l_i / d_i, each strictly above 1.
class LambdaVector {
 public:
  explicit LambdaVector(std::vector<double> values);
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Axis-aligned set of asymptotically optimal multipliers. Upper bounds are
// +infinity for lighter-tailed participants.
struct FeasibleBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool unbounded(std::size_t i) const { return upper.at(i) == std::numeric_limits<double>::infinity(); }
  bool contains(std::span<const double> point) const;
};

struct AsymptoticDr {
  std::vector<double> values;  // limiting DR_i as p -> 1
  double delta_pool = 0.0;     // pool residual risk term
  std::vector<std::size_t> z_set;
};

// Premium P_i = E[Y_i] / sum E[Y] * VaR_p(S); the loading is VaR/E[S] - 1.
struct PremiumSplit {
  std::vector<double> premiums;
  double loading = 0.0;
};

PremiumSplit premium_shares(std::span<const double> expected_layers, double var_of_pool);

// (lambda^(1 - alpha) - 1) / (1 - alpha), continued by ln(lambda) at alpha = 1.
double layer_growth_factor(double lambda, double alpha) noexcept;

std::vector<std::size_t> z_set(const TailModel& model, const LambdaVector& lambdas);

double pool_delta(const TailModel& model, const LambdaVector& lambdas);

// Coupling weight of participant i on the pool term (reduces to the
// equal-index weight when all tail indices coincide).
double coupling_weight(const TailModel& model, const LambdaVector& lambdas, std::size_t i);

AsymptoticDr asymptotic_dr(const TailModel& model, const LambdaVector& lambdas);

// min over lambda of the limiting DR_i: 1 for xi >= 1, xi^(alpha_1/alpha_i) otherwise.
std::vector<double> minimal_asymptotic_dr(const TailModel& model);

FeasibleBox feasible_box(const TailModel& model);

// Euclidean distance from `point` to the box (distance to the clamped
// projection). Zero iff the point lies in the box.
double distance_to_box(std::span<const double> point, const FeasibleBox& box);

// d_i = xi^(alpha_1/alpha_i) * VaR_p(X_i).
double attachment_from_var(const TailModel& model, std::size_t i, double var_i);

}  // namespace catpool
