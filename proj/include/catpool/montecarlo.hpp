#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "catpool/frechet.hpp"
#include "catpool/layer.hpp"
#include "catpool/pool.hpp"

namespace catpool {

// Column-major m x n matrix of per-participant observations; column i holds
// participant i so per-participant order statistics work on contiguous data.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static LossMatrix from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> column(std::size_t i) { return {data_.data() + i * rows_, rows_}; }
  std::span<const double> column(std::size_t i) const { return {data_.data() + i * rows_, rows_}; }

  double operator()(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  double& operator()(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// m joint draws of independent Frechet losses; column i comes from substream
// i of `seed`, so columns are reproducible independently of `threads`.
LossMatrix simulate_losses(std::span<const FrechetParams> laws, std::size_t m, std::uint64_t seed,
                           unsigned threads = 1);

struct PoolSample {
  std::shared_ptr<const LossMatrix> losses;  // X_{j,i}
  LossMatrix layers;                         // Y_{j,i}
  std::vector<double> aggregate;             // S_j = sum_i Y_{j,i}
  std::vector<LayerSpec> layer_specs;

  std::size_t size() const noexcept { return aggregate.size(); }
  std::size_t participants() const noexcept { return layer_specs.size(); }
};

PoolSample build_pool_sample(std::shared_ptr<const LossMatrix> losses, std::vector<LayerSpec> layer_specs);
PoolSample build_pool_sample(LossMatrix losses, std::vector<LayerSpec> layer_specs);

struct DrReport {
  std::vector<double> retained_ratio;  // VaR_p(X_i - Y_i) / VaR_p(X_i)
  std::vector<double> share_ratio;     // premium share over VaR_p(X_i)
  std::vector<double> dr;              // retained + share
  std::vector<LayerSpec> layers;
  double p = 0.0;
};

// Layers d_i = xi^(alpha_1/alpha_i) * F_i^{-1}(p), l_i = lambda_i * d_i, with
// alpha_1 the smallest tail index among `laws`.
std::vector<LayerSpec> simulation_layers(std::span<const FrechetParams> laws, double xi, double p,
                                         std::span<const double> lambdas);

// Retained ratio from the exact quantile `var` against the layer:
// 1 if var <= d, d/var if d < var <= l, 1 - (l - d)/var above the limit.
double retained_ratio_closed_form(double var, const LayerSpec& layer);

// Simulation estimator of DR_i(p): closed-form retained ratio with the exact
// Frechet quantile; quadrature E[Y_i]; share term from the floor(p m)-th
// order statistics of S and X_i.
DrReport dr_simulated(const PoolSample& pool, std::span<const FrechetParams> laws, double p);

// Same, with X_(floor(p m)),i supplied by the caller (frozen samples).
DrReport dr_simulated(const PoolSample& pool, std::span<const FrechetParams> laws, double p,
                      std::span<const double> loss_order_stats);

// X_(floor(p m)),i for every column.
std::vector<double> column_order_stats(const LossMatrix& losses, double p);

// Empirical estimator on observed data: EVT-extrapolated VaR_p(X_i) anchors
// the attachments d_i = xi^(alpha_1/alpha_i) * VaR_p(X_i), l_i = lambda_i d_i;
// retained risk R_(floor(p m)),i with R = X - Y; E[Y_i] by the sample mean.
// alphas[0] plays the role of alpha_1. Requires p > 0.8 and m >= 5.
DrReport dr_empirical(const LossMatrix& data, std::span<const double> alphas, double xi,
                      const LambdaVector& lambdas, double p);

}  // namespace catpool
