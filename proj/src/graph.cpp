#include "pegnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pegnn/errors.hpp"

namespace pegnn {

std::vector<int> SpatialGraph::in_degree() const {
  std::vector<int> deg(static_cast<std::size_t>(n_nodes), 0);
  for (const Edge& e : edges) ++deg[e.tgt];
  return deg;
}

std::vector<int> SpatialGraph::source_ids() const {
  std::vector<int> ids;
  ids.reserve(edges.size());
  for (const Edge& e : edges) ids.push_back(e.src);
  return ids;
}

std::vector<int> SpatialGraph::target_ids() const {
  std::vector<int> ids;
  ids.reserve(edges.size());
  for (const Edge& e : edges) ids.push_back(e.tgt);
  return ids;
}

SpatialGraph knn_graph(std::span<const double> coords, int n, int k) {
  if (n < 2) {
    throw ContractError("knn_graph: need at least 2 nodes, got " +
                        std::to_string(n));
  }
  if (k < 1) {
    throw ContractError("knn_graph: k must be >= 1, got " + std::to_string(k));
  }
  if (coords.size() != static_cast<std::size_t>(n) * 2) {
    throw DimensionError("knn_graph: expected " + std::to_string(2 * n) +
                         " coordinate values, got " +
                         std::to_string(coords.size()));
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(coords[2 * i]) || !std::isfinite(coords[2 * i + 1])) {
      throw DataError("knn_graph: non-finite coordinate at row " +
                      std::to_string(i));
    }
  }

  const int kk = std::min(k, n - 1);
  SpatialGraph g;
  g.n_nodes = n;
  g.coords.assign(coords.begin(), coords.end());
  g.edges.reserve(static_cast<std::size_t>(n) * kk);

  // O(n^2) scan per target; squared distances preserve the ordering and the
  // (distance, index) pair makes the selection a strict total order.
  std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) {
    const double xi = coords[2 * i], yi = coords[2 * i + 1];
    std::size_t c = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = coords[2 * j] - xi;
      const double dy = coords[2 * j + 1] - yi;
      cand[c++] = {dx * dx + dy * dy, j};
    }
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
    // partial_sort on pairs already breaks ties by the smaller index.
    std::vector<int> nb(static_cast<std::size_t>(kk));
    for (int t = 0; t < kk; ++t) nb[t] = cand[t].second;
    std::sort(nb.begin(), nb.end());  // canonical (tgt, src) order
    for (int j : nb) g.edges.push_back({j, i});
  }
  return g;
}

std::vector<double> row_standardized_weights(const SpatialGraph& g) {
  const std::vector<int> deg = g.in_degree();
  for (int i = 0; i < g.n_nodes; ++i) {
    if (deg[i] == 0) {
      throw ContractError("row_standardized_weights: node " + std::to_string(i) +
                          " has no incoming edges");
    }
  }
  std::vector<double> w;
  w.reserve(g.edges.size());
  for (const Edge& e : g.edges) w.push_back(1.0 / deg[e.tgt]);
  return w;
}

}  // namespace pegnn
