#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "pegnn/errors.hpp"
#include "pegnn/graph.hpp"
#include "pegnn/rng.hpp"

using namespace pegnn;
using testing::brute_force_knn;

namespace {

bool same_edges(const std::vector<Edge>& a, const std::vector<Edge>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].src != b[i].src || a[i].tgt != b[i].tgt) return false;
  return true;
}

std::vector<double> random_coords(int n, Rng& rng) {
  std::vector<double> c(2 * static_cast<std::size_t>(n));
  for (double& v : c) v = rng.uniform();
  return c;
}

}  // namespace

TEST_CASE("knn_graph: collinear points, k=1") {
  const std::vector<double> coords = {0, 0, 1, 0, 3, 0};
  SpatialGraph g = knn_graph(coords, 3, 1);
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[0].src == 1);
  CHECK(g.edges[0].tgt == 0);
  CHECK(g.edges[1].src == 0);
  CHECK(g.edges[1].tgt == 1);
  CHECK(g.edges[2].src == 1);
  CHECK(g.edges[2].tgt == 2);
}

TEST_CASE("knn_graph: k >= n-1 gives the complete directed graph") {
  Rng rng(1);
  const std::vector<double> coords = random_coords(4, rng);
  SpatialGraph g = knn_graph(coords, 4, 3);
  CHECK(g.edges.size() == 12);
  for (const Edge& e : g.edges) CHECK(e.src != e.tgt);
  for (int d : g.in_degree()) CHECK(d == 3);
}

TEST_CASE("knn_graph: matches brute force on 200 random points, k=5") {
  Rng rng(77);
  const std::vector<double> coords = random_coords(200, rng);
  SpatialGraph g = knn_graph(coords, 200, 5);
  CHECK(same_edges(g.edges, brute_force_knn(coords, 200, 5)));
}

TEST_CASE("knn_graph: distance ties break towards the smaller index") {
  // Node 0 at the origin, nodes 1..4 at square corners, all equidistant.
  const std::vector<double> coords = {0, 0, 1, 1, -1, 1, 1, -1, -1, -1};
  SpatialGraph g = knn_graph(coords, 5, 2);
  std::vector<int> nb;
  for (const Edge& e : g.edges)
    if (e.tgt == 0) nb.push_back(e.src);
  CHECK(nb == std::vector<int>{1, 2});
}

TEST_CASE("knn_graph: contract and data errors") {
  const std::vector<double> one = {0, 0};
  CHECK_THROWS_AS(knn_graph(one, 1, 1), ContractError);
  const std::vector<double> two = {0, 0, 1, 1};
  CHECK_THROWS_AS(knn_graph(two, 2, 0), ContractError);
  const std::vector<double> bad = {0, 0, 1,
                                   std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_WITH_AS(knn_graph(bad, 2, 1),
                       "knn_graph: non-finite coordinate at row 1", DataError);
}

TEST_CASE("knn_graph: invariant under translation and uniform scaling") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 60;
    const std::vector<double> coords = random_coords(n, rng);
    SpatialGraph base = knn_graph(coords, n, 4);
    std::vector<double> moved(coords);
    for (std::size_t i = 0; i < moved.size(); i += 2) {
      moved[i] = moved[i] * 2.0 + 10.0;
      moved[i + 1] = moved[i + 1] * 2.0 - 3.0;
    }
    SpatialGraph scaled = knn_graph(moved, n, 4);
    CHECK(same_edges(base.edges, scaled.edges));
  }
}

TEST_CASE("knn_graph: in-degree is min(k, n-1) and edges are canonical") {
  Rng rng(21);
  for (int k : {1, 3, 7, 40}) {
    const int n = 30;
    const std::vector<double> coords = random_coords(n, rng);
    SpatialGraph g = knn_graph(coords, n, k);
    for (int d : g.in_degree()) CHECK(d == std::min(k, n - 1));
    for (std::size_t e = 1; e < g.edges.size(); ++e) {
      const bool ordered =
          g.edges[e - 1].tgt < g.edges[e].tgt ||
          (g.edges[e - 1].tgt == g.edges[e].tgt &&
           g.edges[e - 1].src < g.edges[e].src);
      CHECK(ordered);
    }
    SpatialGraph again = knn_graph(coords, n, k);
    CHECK(same_edges(g.edges, again.edges));
  }
}

TEST_CASE("row_standardized_weights: hand cases and sums") {
  SUBCASE("five in-edges give 0.2 each") {
    SpatialGraph g;
    g.n_nodes = 6;
    for (int j = 1; j <= 5; ++j) g.edges.push_back({j, 0});
    for (int j = 1; j <= 5; ++j) g.edges.push_back({0, j});
    const std::vector<double> w = row_standardized_weights(g);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (g.edges[e].tgt == 0) CHECK(w[e] == 0.2);
    }
  }
  SUBCASE("k=1 graph gives unit weights") {
    Rng rng(3);
    const std::vector<double> coords = random_coords(20, rng);
    SpatialGraph g = knn_graph(coords, 20, 1);
    for (double w : row_standardized_weights(g)) CHECK(w == 1.0);
  }
  SUBCASE("incoming weights sum to 1") {
    Rng rng(9);
    const std::vector<double> coords = random_coords(50, rng);
    SpatialGraph g = knn_graph(coords, 50, 6);
    const std::vector<double> w = row_standardized_weights(g);
    std::vector<double> sums(50, 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) sums[g.edges[e].tgt] += w[e];
    for (double s : sums) CHECK(std::abs(s - 1.0) < 1e-12);
  }
  SUBCASE("isolated node is a contract error") {
    SpatialGraph g;
    g.n_nodes = 2;
    g.edges.push_back({0, 1});
    CHECK_THROWS_AS(row_standardized_weights(g), ContractError);
  }
}
