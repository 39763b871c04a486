#include "catpool/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace catpool {
namespace {

constexpr double kUnitIndexTolerance = 1e-9;

void check_same_size(const TailModel& model, const LambdaVector& lambdas) {
  if (model.size() != lambdas.size())
    throw DomainError("tail model has " + std::to_string(model.size()) + " participants but " +
                      std::to_string(lambdas.size()) + " multipliers were given");
}

}  // namespace

TailModel::TailModel(std::vector<double> alphas, std::vector<double> thetas, double xi)
    : alphas_(std::move(alphas)), thetas_(std::move(thetas)), xi_(xi) {
  const std::size_t n = alphas_.size();
  if (n == 0) throw DomainError("tail model needs at least one participant");
  if (thetas_.size() != n) throw DomainError("alphas and thetas differ in length");
  if (!(xi_ > 0.0) || !std::isfinite(xi_)) throw DomainError("xi must be positive and finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(alphas_[i] > 0.0) || !std::isfinite(alphas_[i]))
      throw DomainError("tail indices must be positive");
    if (!(thetas_[i] >= 0.0 && thetas_[i] <= 1.0))
      throw DomainError("thetas must lie in [0, 1]");
  }
  const double a1 = alphas_[0];
  if (*std::min_element(alphas_.begin(), alphas_.end()) < a1)
    throw DomainError("participant 1 must carry the heaviest tail");
  if (thetas_[0] != 1.0) throw DomainError("theta of participant 1 must be 1");
  for (std::size_t i = 1; i < n; ++i) {
    if (alphas_[i] > a1 && thetas_[i] != 0.0)
      throw DomainError("lighter-tailed participants must have theta 0");
    if (alphas_[i] == a1 && !(thetas_[i] > 0.0))
      throw DomainError("participants tail-equivalent to participant 1 need theta > 0");
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

TailModel TailModel::normalized(std::span<const double> alphas,
                                std::span<const double> tail_constants, double xi) {
  if (alphas.size() != tail_constants.size())
    throw DomainError("alphas and tail constants differ in length");
  if (alphas.empty()) throw DomainError("tail model needs at least one participant");
  for (double c : tail_constants)
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("tail constants must be positive");

  std::vector<std::size_t> order(alphas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (alphas[a] != alphas[b]) return alphas[a] < alphas[b];
    return tail_constants[a] > tail_constants[b];
  });

  const double a1 = alphas[order[0]];
  const double c1 = tail_constants[order[0]];
  std::vector<double> sorted_alphas, thetas;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    sorted_alphas.push_back(alphas[i]);
    thetas.push_back(k == 0 ? 1.0 : (alphas[i] == a1 ? tail_constants[i] / c1 : 0.0));
  }
  TailModel model(std::move(sorted_alphas), std::move(thetas), xi);
  model.order_ = std::move(order);
  return model;
}

TailModel TailModel::from_frechet(std::span<const FrechetParams> laws, double xi) {
  std::vector<double> alphas, constants;
  for (const auto& law : laws) {
    alphas.push_back(law.alpha);
    constants.push_back(std::pow(law.scale, law.alpha));
  }
  return normalized(alphas, constants, xi);
}

TailModel TailModel::with_xi(double xi) const {
  TailModel copy(alphas_, thetas_, xi);
  copy.order_ = order_;
  return copy;
}

LambdaVector::LambdaVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!(v > 1.0) || !std::isfinite(v))
      throw DomainError("layer multipliers must be finite and strictly greater than 1");
}

bool FeasibleBox::contains(std::span<const double> point) const {
  if (point.size() != size()) throw DomainError("point and box differ in dimension");
  for (std::size_t i = 0; i < size(); ++i)
    if (point[i] < lower[i] || point[i] > upper[i]) return false;
  return true;
}

PremiumSplit premium_shares(std::span<const double> expected_layers, double var_of_pool) {
  double total = 0.0;
  for (double e : expected_layers) {
    if (!(e >= 0.0)) throw DomainError("expected layer losses must be nonnegative");
    total += e;
  }
  if (!(total > 0.0))
    throw DegeneratePoolError("every expected layer loss is zero; premium shares are undefined");
  PremiumSplit split;
  split.premiums.reserve(expected_layers.size());
  for (double e : expected_layers) split.premiums.push_back(e / total * var_of_pool);
  split.loading = var_of_pool / total - 1.0;
  return split;
}

double layer_growth_factor(double lambda, double alpha) noexcept {
  const double log_lambda = std::log(lambda);
  const double beta = 1.0 - alpha;
  if (std::abs(beta) < kUnitIndexTolerance) return log_lambda;
  return std::expm1(beta * log_lambda) / beta;
}

std::vector<std::size_t> z_set(const TailModel& model, const LambdaVector& lambdas) {
  check_same_size(model, lambdas);
  const double a1 = model.alpha(0);
  std::vector<std::size_t> z;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double theta = model.theta(j);
    if (theta == 0.0) continue;
    const double threshold = std::pow(theta, -1.0 / a1) / (lambdas[j] - 1.0);
    if (model.xi() > threshold) z.push_back(j);
  }
  return z;
}

double pool_delta(const TailModel& model, const LambdaVector& lambdas) {
  const auto z = z_set(model, lambdas);
  if (z.empty()) return 0.0;
  const double a1 = model.alpha(0);
  double sum = 0.0;
  for (std::size_t j : z) sum += std::pow(std::pow(model.theta(j), -1.0 / a1) + model.xi(), -a1);
  return std::pow(sum, 1.0 / a1);
}

double coupling_weight(const TailModel& model, const LambdaVector& lambdas, std::size_t i) {
  check_same_size(model, lambdas);
  const double a1 = model.alpha(0);
  double denominator = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (model.theta(j) == 0.0) continue;
    denominator += layer_growth_factor(lambdas[j], a1) * std::pow(model.theta(j), 1.0 / a1);
  }
  const double ai = model.alpha(i);
  return layer_growth_factor(lambdas[i], ai) * std::pow(model.xi(), a1 / ai - 1.0) / denominator;
}

AsymptoticDr asymptotic_dr(const TailModel& model, const LambdaVector& lambdas) {
  check_same_size(model, lambdas);
  AsymptoticDr out;
  out.z_set = z_set(model, lambdas);
  out.delta_pool = pool_delta(model, lambdas);
  const double a1 = model.alpha(0);
  const double xi = model.xi();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double r = std::pow(xi, a1 / model.alpha(i));
    double retained;
    if (xi >= 1.0)
      retained = 1.0;
    else if (1.0 / lambdas[i] <= r)
      retained = r;
    else
      retained = 1.0 - (lambdas[i] - 1.0) * r;
    const double coupling = out.delta_pool == 0.0 ? 0.0 : coupling_weight(model, lambdas, i) * out.delta_pool;
    out.values.push_back(retained + coupling);
  }
  return out;
}

std::vector<double> minimal_asymptotic_dr(const TailModel& model) {
  std::vector<double> out;
  const double a1 = model.alpha(0);
  for (std::size_t i = 0; i < model.size(); ++i)
    out.push_back(model.xi() >= 1.0 ? 1.0 : std::pow(model.xi(), a1 / model.alpha(i)));
  return out;
}

FeasibleBox feasible_box(const TailModel& model) {
  FeasibleBox box;
  const double a1 = model.alpha(0);
  const double xi = model.xi();
  for (std::size_t i = 0; i < model.size(); ++i) {
    box.lower.push_back(std::max(std::pow(xi, -a1 / model.alpha(i)), 1.0));
    const double theta = model.theta(i);
    box.upper.push_back(theta == 0.0 ? std::numeric_limits<double>::infinity()
                                     : 1.0 + std::pow(theta, -1.0 / a1) / xi);
  }
  return box;
}

double distance_to_box(std::span<const double> point, const FeasibleBox& box) {
  if (point.size() != box.size()) throw DomainError("point and box differ in dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    double gap = 0.0;
    if (point[i] < box.lower[i])
      gap = box.lower[i] - point[i];
    else if (point[i] > box.upper[i])
      gap = point[i] - box.upper[i];
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

double attachment_from_var(const TailModel& model, std::size_t i, double var_i) {
  if (!(var_i > 0.0)) throw DomainError("VaR must be positive");
  return std::pow(model.xi(), model.alpha(0) / model.alpha(i)) * var_i;
}

}  // namespace catpool
