#include "catpool/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "catpool/errors.hpp"
#include "catpool/evt.hpp"
#include "catpool/parallel.hpp"

namespace catpool {
namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
}

std::size_t checked_rank(double p, std::size_t m) {
  const std::size_t rank = floor_rank(p, m);
  if (rank < 1) throw DomainError("floor(p m) must be at least 1");
  return rank;
}

DrReport assemble_report(std::span<const double> retained, std::span<const double> expected,
                         double pool_var, std::span<const double> loss_order_stats,
                         std::vector<LayerSpec> layers, double p) {
  double total = 0.0;
  for (double e : expected) total += e;
  if (!(total > 0.0))
    throw DegeneratePoolError("every expected layer loss is zero; premium shares are undefined");
  DrReport report;
  report.p = p;
  report.layers = std::move(layers);
  for (std::size_t i = 0; i < retained.size(); ++i) {
    const double share = expected[i] / total * pool_var / loss_order_stats[i];
    report.retained_ratio.push_back(retained[i]);
    report.share_ratio.push_back(share);
    report.dr.push_back(retained[i] + share);
  }
  return report;
}

}  // namespace

LossMatrix LossMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return {};
  const std::size_t rows = columns.front().size();
  LossMatrix out(rows, columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].size() != rows) throw DomainError("columns differ in length");
    std::copy(columns[i].begin(), columns[i].end(), out.column(i).begin());
  }
  return out;
}

LossMatrix simulate_losses(std::span<const FrechetParams> laws, std::size_t m, std::uint64_t seed,
                           unsigned threads) {
  LossMatrix out(m, laws.size());
  parallel_for(laws.size(), threads, [&](std::size_t i) {
    const auto draws = frechet_sample(laws[i], m, seed, i);
    std::copy(draws.begin(), draws.end(), out.column(i).begin());
  });
  return out;
}

PoolSample build_pool_sample(std::shared_ptr<const LossMatrix> losses,
                             std::vector<LayerSpec> layer_specs) {
  if (!losses) throw DomainError("no loss matrix");
  const std::size_t m = losses->rows();
  const std::size_t n = losses->cols();
  if (layer_specs.size() != n)
    throw DomainError("loss matrix has " + std::to_string(n) + " columns but " +
                      std::to_string(layer_specs.size()) + " layers were given");
  PoolSample pool;
  pool.layers = LossMatrix(m, n);
  pool.aggregate.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = losses->column(i);
    auto y = pool.layers.column(i);
    const LayerSpec& layer = layer_specs[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (x[j] < 0.0) throw DomainError("losses must be nonnegative");
      y[j] = layer_loss(x[j], layer);
      pool.aggregate[j] += y[j];
    }
  }
  pool.losses = std::move(losses);
  pool.layer_specs = std::move(layer_specs);
  return pool;
}

PoolSample build_pool_sample(LossMatrix losses, std::vector<LayerSpec> layer_specs) {
  return build_pool_sample(std::make_shared<const LossMatrix>(std::move(losses)), std::move(layer_specs));
}

std::vector<LayerSpec> simulation_layers(std::span<const FrechetParams> laws, double xi, double p,
                                         std::span<const double> lambdas) {
  if (laws.size() != lambdas.size()) throw DomainError("laws and multipliers differ in length");
  if (laws.empty()) throw DomainError("pool needs at least one participant");
  if (!(xi > 0.0)) throw DomainError("xi must be positive");
  double a1 = laws[0].alpha;
  for (const auto& law : laws) a1 = std::min(a1, law.alpha);
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const double d = std::pow(xi, a1 / laws[i].alpha) * frechet_quantile(laws[i], p);
    layers.push_back(make_layer(d, lambdas[i] * d));
  }
  return layers;
}

double retained_ratio_closed_form(double var, const LayerSpec& layer) {
  if (var <= layer.attachment) return 1.0;
  if (var <= layer.limit) return layer.attachment / var;
  return 1.0 - layer.width() / var;
}

std::vector<double> column_order_stats(const LossMatrix& losses, double p) {
  check_probability(p);
  const std::size_t rank = checked_rank(p, losses.rows());
  std::vector<double> out;
  for (std::size_t i = 0; i < losses.cols(); ++i) out.push_back(order_statistic(losses.column(i), rank));
  return out;
}

DrReport dr_simulated(const PoolSample& pool, std::span<const FrechetParams> laws, double p) {
  return dr_simulated(pool, laws, p, column_order_stats(*pool.losses, p));
}

DrReport dr_simulated(const PoolSample& pool, std::span<const FrechetParams> laws, double p,
                      std::span<const double> loss_order_stats) {
  check_probability(p);
  const std::size_t n = pool.participants();
  if (laws.size() != n || loss_order_stats.size() != n)
    throw DomainError("pool, laws and order statistics differ in participant count");
  const std::size_t rank = checked_rank(p, pool.size());

  std::vector<double> retained, expected;
  for (std::size_t i = 0; i < n; ++i) {
    retained.push_back(retained_ratio_closed_form(frechet_quantile(laws[i], p), pool.layer_specs[i]));
    expected.push_back(frechet_layer_expectation(laws[i], pool.layer_specs[i]));
  }
  double total = 0.0;
  for (double e : expected) total += e;
  if (!(total > 0.0))
    throw DegeneratePoolError("every expected layer loss is zero; premium shares are undefined");
  const double pool_var = order_statistic(pool.aggregate, rank);
  return assemble_report(retained, expected, pool_var, loss_order_stats, pool.layer_specs, p);
}

DrReport dr_empirical(const LossMatrix& data, std::span<const double> alphas, double xi,
                      const LambdaVector& lambdas, double p) {
  if (!(p > 0.8 && p < 1.0)) throw DomainError("empirical DR needs 0.8 < p < 1");
  const std::size_t m = data.rows();
  const std::size_t n = data.cols();
  if (m < 5) throw DomainError("empirical DR needs at least 5 observations");
  if (alphas.size() != n || lambdas.size() != n)
    throw DomainError("data, tail indices and multipliers differ in participant count");
  if (!(xi > 0.0)) throw DomainError("xi must be positive");
  const std::size_t rank = checked_rank(p, m);

  std::vector<LayerSpec> layers;
  std::vector<double> var_hat;
  for (std::size_t i = 0; i < n; ++i) {
    const double var = evt_var(data.column(i), alphas[i], p);
    const double d = std::pow(xi, alphas[0] / alphas[i]) * var;
    var_hat.push_back(var);
    layers.push_back(make_layer(d, lambdas[i] * d));
  }

  const PoolSample pool = build_pool_sample(std::make_shared<const LossMatrix>(data), layers);
  std::vector<double> retained, expected, loss_order;
  std::vector<double> residual(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.column(i);
    const auto y = pool.layers.column(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      residual[j] = x[j] - y[j];
      sum += y[j];
    }
    retained.push_back(order_statistic(residual, rank) / var_hat[i]);
    expected.push_back(sum / static_cast<double>(m));
    loss_order.push_back(order_statistic(x, rank));
  }
  double total = 0.0;
  for (double e : expected) total += e;
  if (!(total > 0.0))
    throw DegeneratePoolError("no observation reaches its attachment; premium shares are undefined");
  const double pool_var = order_statistic(pool.aggregate, rank);
  return assemble_report(retained, expected, pool_var, loss_order, std::move(layers), p);
}

}  // namespace catpool
