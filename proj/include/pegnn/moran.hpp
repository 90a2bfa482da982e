#pragma once

#include <span>
#include <string>
#include <vector>

#include "pegnn/graph.hpp"

namespace pegnn {

/// Per-node local Moran's I of a value field over a graph.
struct LocalMoran {
  std::vector<double> values;
  std::string weight_scheme = "row-standardized knn";
};

/// Anselin's local indicator: with z_i = y_i - mean(y) and
/// m2 = mean(z^2), I_i = (z_i / m2) * sum_j w_ij z_j over row-standardized
/// in-neighbour weights. Requires n >= 2 and nonzero variance.
LocalMoran local_moran(std::span<const double> y, const SpatialGraph& g);

/// Auxiliary-task targets for one minibatch: local Moran's I on the batch
/// subgraph only. Randomized minibatching makes the per-point value vary
/// across epochs. A constant batch falls back to zero targets; `fell_back`
/// (when given) reports that so callers can count the warnings.
std::vector<double> moran_target_for_batch(std::span<const double> y_batch,
                                           const SpatialGraph& g_batch,
                                           bool* fell_back = nullptr);

}  // namespace pegnn
