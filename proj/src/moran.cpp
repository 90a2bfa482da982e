#include "pegnn/moran.hpp"

#include <string>

#include "pegnn/errors.hpp"

namespace pegnn {

LocalMoran local_moran(std::span<const double> y, const SpatialGraph& g) {
  const int n = g.n_nodes;
  if (static_cast<int>(y.size()) != n) {
    throw DimensionError("local_moran: " + std::to_string(y.size()) +
                         " values for " + std::to_string(n) + " nodes");
  }
  if (n < 2) {
    throw ContractError("local_moran: need at least 2 nodes");
  }

  bool constant = true;
  for (double v : y) {
    if (v != y[0]) {
      constant = false;
      break;
    }
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  std::vector<double> z(static_cast<std::size_t>(n));
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    z[i] = y[i] - mean;
    m2 += z[i] * z[i];
  }
  m2 /= n;
  if (constant || m2 == 0.0) {
    throw ContractError("local_moran: constant field (zero variance)");
  }

  const std::vector<double> w = row_standardized_weights(g);
  LocalMoran out;
  out.values.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out.values[g.edges[e].tgt] += w[e] * z[g.edges[e].src];
  }
  for (int i = 0; i < n; ++i) out.values[i] *= z[i] / m2;
  return out;
}

std::vector<double> moran_target_for_batch(std::span<const double> y_batch,
                                           const SpatialGraph& g_batch,
                                           bool* fell_back) {
  if (fell_back) *fell_back = false;
  // Only the constant-batch case falls back; every other error propagates.
  bool constant = true;
  for (double v : y_batch) {
    if (v != y_batch[0]) {
      constant = false;
      break;
    }
  }
  if (constant) {
    if (fell_back) *fell_back = true;
    return std::vector<double>(y_batch.size(), 0.0);
  }
  return local_moran(y_batch, g_batch).values;
}

}  // namespace pegnn
