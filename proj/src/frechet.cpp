#include "catpool/frechet.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "catpool/random.hpp"

namespace catpool {

FrechetParams make_frechet(double alpha, double scale) {
  if (!(alpha > 0.0) || !(scale > 0.0) || !std::isfinite(alpha) || !std::isfinite(scale))
    throw DomainError("Frechet parameters require alpha > 0 and scale > 0");
  return {alpha, scale};
}

double frechet_cdf(const FrechetParams& params, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp(-std::pow(x / params.scale, -params.alpha));
}

double frechet_survival(const FrechetParams& params, double x) {
  if (x <= 0.0) return 1.0;
  return -std::expm1(-std::pow(x / params.scale, -params.alpha));
}

double frechet_quantile(const FrechetParams& params, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("frechet_quantile requires 0 < p < 1");
  return params.scale * std::pow(-std::log(p), -1.0 / params.alpha);
}

std::vector<double> frechet_sample(const FrechetParams& params, std::size_t count,
                                   std::uint64_t seed) {
  return frechet_sample(params, count, seed, 0);
}

std::vector<double> frechet_sample(const FrechetParams& params, std::size_t count,
                                   std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  std::vector<double> out(count);
  const double inv_alpha = -1.0 / params.alpha;
  for (auto& x : out) x = params.scale * std::pow(-std::log(rng.uniform()), inv_alpha);
  return out;
}

double frechet_layer_expectation(const FrechetParams& params, const LayerSpec& layer) {
  if (!(layer.attachment <= layer.limit))
    throw DomainError("layer expectation requires attachment <= limit");
  if (layer.attachment < 0.0) throw DomainError("layer expectation requires attachment >= 0");
  if (layer.attachment == layer.limit) return 0.0;

  using boost::math::quadrature::gauss_kronrod;
  // Tolerance is relative to the estimate, which bounds the absolute error
  // by 1e-10 * (l - d) since the integrand never exceeds 1.
  const double value = gauss_kronrod<double, 31>::integrate(
      [&](double x) { return frechet_survival(params, x); }, layer.attachment, layer.limit, 20,
      1e-10);
  return std::clamp(value, 0.0, layer.width());
}

}  // namespace catpool
