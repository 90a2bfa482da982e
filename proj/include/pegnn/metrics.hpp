#pragma once

#include <span>
#include <string>
#include <vector>

namespace pegnn {

/// Regression scores on the log scale. MAPE divides by |true| and skips
/// exact-zero true values; the skipped count is reported.
struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  double mape = 0.0;
  int n = 0;
  int mape_excluded = 0;
};

Metrics compute_metrics(std::span<const double> y_hat,
                        std::span<const double> y_true);

/// Cell means of a value field over the coordinate bounding box. Empty
/// cells carry count 0 and a NaN mean.
struct VarianceGrid {
  int grid_n = 0;
  std::vector<double> mean;  // grid_n×grid_n row-major, NaN where empty
  std::vector<int> count;
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;

  // Population variance of non-empty cell means (the smoothing diagnostic).
  double cell_variance() const;
};

VarianceGrid spatial_variance_grid(std::span<const double> coords, int n,
                                   std::span<const double> values, int grid_n);

void save_grid_csv(const VarianceGrid& grid, const std::string& path,
                   const std::string& header_comment);

}  // namespace pegnn
