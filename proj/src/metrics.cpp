#include "pegnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pegnn/errors.hpp"
#include "pegnn/io_util.hpp"

namespace pegnn {

Metrics compute_metrics(std::span<const double> y_hat,
                        std::span<const double> y_true) {
  if (y_hat.size() != y_true.size()) {
    throw ContractError("compute_metrics: " + std::to_string(y_hat.size()) +
                        " predictions for " + std::to_string(y_true.size()) +
                        " truths");
  }
  if (y_hat.empty()) {
    throw ContractError("compute_metrics: empty input");
  }
  Metrics m;
  m.n = static_cast<int>(y_hat.size());
  double ape_sum = 0.0;
  int ape_n = 0;
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    const double err = y_hat[i] - y_true[i];
    m.mse += err * err;
    m.mae += std::abs(err);
    if (y_true[i] != 0.0) {
      ape_sum += std::abs(err) / std::abs(y_true[i]);
      ++ape_n;
    }
  }
  m.mse /= m.n;
  m.mae /= m.n;
  m.mape_excluded = m.n - ape_n;
  m.mape = ape_n > 0 ? ape_sum / ape_n : 0.0;
  return m;
}

double VarianceGrid::cell_variance() const {
  double sum = 0.0;
  int k = 0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (count[i] > 0) {
      sum += mean[i];
      ++k;
    }
  }
  if (k == 0) return 0.0;
  const double mu = sum / k;
  double var = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (count[i] > 0) {
      const double d = mean[i] - mu;
      var += d * d;
    }
  }
  return var / k;
}

VarianceGrid spatial_variance_grid(std::span<const double> coords, int n,
                                   std::span<const double> values, int grid_n) {
  if (grid_n < 2) {
    throw ContractError("spatial_variance_grid: grid_n must be >= 2, got " +
                        std::to_string(grid_n));
  }
  if (coords.size() != static_cast<std::size_t>(n) * 2 ||
      values.size() != static_cast<std::size_t>(n) || n < 1) {
    throw DimensionError("spatial_variance_grid: inconsistent input sizes");
  }
  VarianceGrid grid;
  grid.grid_n = grid_n;
  grid.min_x = grid.max_x = coords[0];
  grid.min_y = grid.max_y = coords[1];
  for (int i = 0; i < n; ++i) {
    grid.min_x = std::min(grid.min_x, coords[2 * i]);
    grid.max_x = std::max(grid.max_x, coords[2 * i]);
    grid.min_y = std::min(grid.min_y, coords[2 * i + 1]);
    grid.max_y = std::max(grid.max_y, coords[2 * i + 1]);
  }
  grid.mean.assign(static_cast<std::size_t>(grid_n) * grid_n, 0.0);
  grid.count.assign(static_cast<std::size_t>(grid_n) * grid_n, 0);

  const double wx = grid.max_x - grid.min_x;
  const double wy = grid.max_y - grid.min_y;
  for (int i = 0; i < n; ++i) {
    int cx = wx > 0.0 ? static_cast<int>((coords[2 * i] - grid.min_x) / wx * grid_n)
                      : 0;
    int cy = wy > 0.0
                 ? static_cast<int>((coords[2 * i + 1] - grid.min_y) / wy * grid_n)
                 : 0;
    cx = std::min(cx, grid_n - 1);
    cy = std::min(cy, grid_n - 1);
    const std::size_t cell = static_cast<std::size_t>(cy) * grid_n + cx;
    grid.mean[cell] += values[i];
    ++grid.count[cell];
  }
  for (std::size_t c = 0; c < grid.mean.size(); ++c) {
    if (grid.count[c] > 0) {
      grid.mean[c] /= grid.count[c];
    } else {
      grid.mean[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return grid;
}

void save_grid_csv(const VarianceGrid& grid, const std::string& path,
                   const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write grid file '" + path + "'");
  }
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "row,col,value,count\n";
  for (int r = 0; r < grid.grid_n; ++r) {
    for (int c = 0; c < grid.grid_n; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * grid.grid_n + c;
      out << r << "," << c << ",";
      if (grid.count[cell] > 0) {
        out << fmt_double(grid.mean[cell]);
      } else {
        out << "nan";
      }
      out << "," << grid.count[cell] << "\n";
    }
  }
  if (!out) {
    throw DataError("write failed for grid file '" + path + "'");
  }
}

}  // namespace pegnn
