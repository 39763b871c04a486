#pragma once

#include <cstdint>
#include <vector>

#include "catpool/layer.hpp"

namespace catpool {

// Frechet law F(x) = exp(-(x/scale)^-alpha), x > 0. Regularly varying with
// tail index alpha; the ground truth for every simulation in the library.
struct FrechetParams {
  double alpha = 1.0;
  double scale = 1.0;
};

FrechetParams make_frechet(double alpha, double scale);

// CDF; 0 for x <= 0 so zero-loss observations pass through.
double frechet_cdf(const FrechetParams& params, double x);

// 1 - F(x), computed without cancellation in the far tail.
double frechet_survival(const FrechetParams& params, double x);

// scale * (-ln p)^(-1/alpha). Throws DomainError unless 0 < p < 1.
double frechet_quantile(const FrechetParams& params, double p);

// `count` i.i.d. draws by inverse transform. Identical (params, count, seed)
// give identical output.
std::vector<double> frechet_sample(const FrechetParams& params, std::size_t count,
                                   std::uint64_t seed);

// Same as above but draws from substream `stream` of `seed`.
std::vector<double> frechet_sample(const FrechetParams& params, std::size_t count,
                                   std::uint64_t seed, std::uint64_t stream);

// E[layer_loss(X)] = integral of the survival function over [d, l], by
// adaptive Gauss-Kronrod quadrature. Result lies in [0, l - d].
double frechet_layer_expectation(const FrechetParams& params, const LayerSpec& layer);

}  // namespace catpool
