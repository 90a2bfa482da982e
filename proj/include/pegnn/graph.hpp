#pragma once

#include <span>
#include <vector>

namespace pegnn {

struct Edge {
  int src = 0;  // j, the neighbour being aggregated
  int tgt = 0;  // i, the node receiving the message
};

/// Directed edge list over a batch of points. Edges run from each node's k
/// nearest neighbours towards it; no self-loops are stored (operators add
/// their own self term where their equation has one). The list is sorted by
/// (tgt, src) so two builds from identical inputs are byte-identical.
struct SpatialGraph {
  int n_nodes = 0;
  std::vector<Edge> edges;
  std::vector<double> edge_weight;  // e_{j,i}; empty means unit weights
  std::vector<double> coords;       // n×2 row-major (x, y)

  double x(int i) const { return coords[2 * static_cast<std::size_t>(i)]; }
  double y(int i) const { return coords[2 * static_cast<std::size_t>(i) + 1]; }

  std::vector<int> in_degree() const;
  std::vector<int> source_ids() const;
  std::vector<int> target_ids() const;
};

/// Exact k-nearest-neighbour graph over planar coordinates (euclidean
/// metric). Each node receives edges from its k nearest distinct nodes, or
/// from all others when n <= k; distance ties break towards the smaller
/// node index.
SpatialGraph knn_graph(std::span<const double> coords, int n, int k);

/// Per-edge weight 1/deg_in(tgt); each node's incoming weights sum to 1.
std::vector<double> row_standardized_weights(const SpatialGraph& g);

}  // namespace pegnn
