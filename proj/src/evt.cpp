#include "catpool/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "catpool/errors.hpp"

namespace catpool {

std::vector<double> order_statistics(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("order statistics of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return sorted;
}

double order_statistic(std::span<const double> sample, std::size_t rank) {
  if (rank < 1 || rank > sample.size())
    throw DomainError("order statistic rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(sample.size()) + "]");
  std::vector<double> work(sample.begin(), sample.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

std::size_t floor_rank(double p, std::size_t m) {
  const double x = p * static_cast<double>(m);
  return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

HillEstimate hill_estimate_sorted(std::span<const double> sorted, std::size_t k) {
  const std::size_t m = sorted.size();
  if (k < 1 || k >= m)
    throw DomainError("Hill estimator needs 1 <= k < m (k=" + std::to_string(k) +
                      ", m=" + std::to_string(m) + ")");
  const double threshold = sorted[m - k - 1];  // X_(m-k)
  if (!(threshold > 0.0)) throw DomainError("Hill estimator threshold X_(m-k) must be positive");
  const double log_threshold = std::log(threshold);
  double sum = 0.0;
  for (std::size_t j = 1; j <= k; ++j) sum += std::log(sorted[m - j]) - log_threshold;
  const double gamma = sum / static_cast<double>(k);
  if (!(gamma > 0.0))
    throw DegenerateDataError("top order statistics are tied; the tail index is infinite");
  return {gamma, 1.0 / gamma, k, m};
}

HillEstimate hill_estimate(std::span<const double> sample, std::size_t k) {
  if (sample.empty()) throw DomainError("Hill estimator on an empty sample");
  return hill_estimate_sorted(order_statistics(sample), k);
}

std::vector<HillEstimate> hill_sweep(std::span<const double> sample, std::span<const std::size_t> ks) {
  const auto sorted = order_statistics(sample);
  std::vector<HillEstimate> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) out.push_back(hill_estimate_sorted(sorted, k));
  return out;
}

PositivePart positive_part(std::span<const double> sample) {
  PositivePart out;
  for (double x : sample) {
    if (x > 0.0)
      out.values.push_back(x);
    else
      ++out.excluded;
  }
  return out;
}

PooledTailEstimate pooled_tail_estimate(std::span<const HillEstimate> estimates) {
  if (estimates.size() < 2) throw DomainError("pooled tail estimator needs at least two estimates");
  PooledTailEstimate out;
  double total = 0.0;
  for (const auto& e : estimates) {
    if (!(e.gamma > 0.0)) throw DomainError("pooled tail estimator needs positive gammas");
    const double precision = static_cast<double>(e.k) / (e.gamma * e.gamma);
    out.weights.push_back(precision);
    total += precision;
  }
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    out.weights[i] /= total;
    out.gamma_pool += out.weights[i] * estimates[i].gamma;
  }
  out.alpha_pool = 1.0 / out.gamma_pool;
  return out;
}

double scale_estimate(std::span<const double> sample, std::span<const double> reference,
                      std::size_t h) {
  const std::size_t m = reference.size();
  if (sample.size() != m) throw DomainError("scale estimator needs samples of equal length");
  if (h >= m) throw DomainError("scale estimator needs h < m");
  const double threshold = order_statistic(reference, m - h);
  const auto exceed = [threshold](std::span<const double> xs) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x >= threshold; }));
  };
  const double denominator = exceed(reference);
  if (denominator == 0.0) throw DegenerateDataError("no reference exceedances");
  return exceed(sample) / denominator;
}

std::vector<double> scale_sweep(std::span<const double> sample, std::span<const double> reference,
                                std::span<const std::size_t> hs) {
  const std::size_t m = reference.size();
  if (sample.size() != m) throw DomainError("scale estimator needs samples of equal length");
  const auto sorted_ref = order_statistics(reference);
  const auto sorted_sample = order_statistics(sample);
  const auto exceed = [](const std::vector<double>& sorted, double threshold) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), threshold);
    return static_cast<double>(std::distance(it, sorted.end()));
  };
  std::vector<double> out;
  out.reserve(hs.size());
  for (std::size_t h : hs) {
    if (h >= m) throw DomainError("scale estimator needs h < m");
    const double threshold = sorted_ref[m - h - 1];
    const double denominator = exceed(sorted_ref, threshold);
    if (denominator == 0.0) throw DegenerateDataError("no reference exceedances");
    out.push_back(exceed(sorted_sample, threshold) / denominator);
  }
  return out;
}

double evt_var(std::span<const double> sample, double alpha_hat, double p) {
  if (!(p > 0.8 && p < 1.0)) throw DomainError("EVT quantile extrapolation needs 0.8 < p < 1");
  if (!(alpha_hat > 0.0)) throw DomainError("EVT quantile extrapolation needs alpha_hat > 0");
  const std::size_t rank = floor_rank(0.8, sample.size());
  if (rank < 1) throw DomainError("sample too small for the 0.8 anchor order statistic");
  const double anchor = order_statistic(sample, rank);
  return anchor * std::pow(0.2 / (1.0 - p), 1.0 / alpha_hat);
}

std::size_t default_tail_count(std::size_t m) {
  return std::max<std::size_t>(1, m / 10);
}

}  // namespace catpool
