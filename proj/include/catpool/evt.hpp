#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace catpool {

// Order statistics use 1-based ranks as in the textbook formulas:
// X_(j) = sorted[j - 1], X_(1) the minimum and X_(m) the maximum.

// Nondecreasing copy of the sample; ties keep their input order.
std::vector<double> order_statistics(std::span<const double> sample);

// X_(rank) without a full sort. 1 <= rank <= size.
double order_statistic(std::span<const double> sample, std::size_t rank);

// floor(p * m) guarded against p * m landing a rounding error below an
// integer (p grids are built by repeated addition).
std::size_t floor_rank(double p, std::size_t m);

struct HillEstimate {
  double gamma = 0.0;  // inverse tail index
  double alpha = 0.0;  // 1 / gamma
  std::size_t k = 0;   // number of top order statistics
  std::size_t m = 0;   // sample size
};

// Hill estimator from the k largest observations above X_(m-k).
HillEstimate hill_estimate(std::span<const double> sample, std::size_t k);

// Same, on an already sorted (nondecreasing) sample.
HillEstimate hill_estimate_sorted(std::span<const double> sorted, std::size_t k);

// Hill estimates for every k in `ks`, sorting the sample once.
std::vector<HillEstimate> hill_sweep(std::span<const double> sample, std::span<const std::size_t> ks);

struct PositivePart {
  std::vector<double> values;
  std::size_t excluded = 0;
};

// Drops observations <= 0 (log undefined) and reports how many were dropped.
PositivePart positive_part(std::span<const double> sample);

struct PooledTailEstimate {
  double gamma_pool = 0.0;
  double alpha_pool = 0.0;
  std::vector<double> weights;
};

// Inverse-variance weighting of Hill estimates with variances gamma_i^2 / k_i.
PooledTailEstimate pooled_tail_estimate(std::span<const HillEstimate> estimates);

// Ratio of exceedance counts of `sample` and `reference` over the reference
// order statistic X_(m-h): an estimate of the asymptotic survival ratio.
double scale_estimate(std::span<const double> sample, std::span<const double> reference,
                      std::size_t h);

// scale_estimate for every h in `hs`, sorting both samples once.
std::vector<double> scale_sweep(std::span<const double> sample, std::span<const double> reference,
                                std::span<const std::size_t> hs);

// X_(floor(0.8 m)) * (0.2 / (1 - p))^(1 / alpha_hat), for 0.8 < p < 1.
double evt_var(std::span<const double> sample, double alpha_hat, double p);

// 10% of the sample size, at least 1.
std::size_t default_tail_count(std::size_t m);

}  // namespace catpool
