#include "pegnn/layers.hpp"

#include <cmath>

#include "pegnn/errors.hpp"
#include "pegnn/init.hpp"

namespace pegnn {

namespace {

void check_kind(const OperatorLayer& layer, Operator expected, const char* fn) {
  if (layer.kind != expected) {
    throw ContractError(std::string(fn) + ": layer kind is " +
                        to_string(layer.kind));
  }
}

void check_input(const OperatorLayer& layer, const Tensor& x,
                 const SpatialGraph& g, const char* fn) {
  if (x.rows() != g.n_nodes) {
    throw DimensionError(std::string(fn) + ": " + std::to_string(x.rows()) +
                         " feature rows for " + std::to_string(g.n_nodes) +
                         " graph nodes");
  }
  if (x.cols() != layer.in_dim) {
    throw DimensionError(std::string(fn) + ": input width " +
                         std::to_string(x.cols()) + ", layer expects " +
                         std::to_string(layer.in_dim));
  }
}

void require_in_neighbors(const SpatialGraph& g, const char* fn) {
  const std::vector<int> deg = g.in_degree();
  for (int i = 0; i < g.n_nodes; ++i) {
    if (deg[i] == 0) {
      throw ContractError(std::string(fn) + ": node " + std::to_string(i) +
                          " has no in-neighbours (aggregation undefined)");
    }
  }
}

}  // namespace

Operator operator_from_string(const std::string& name) {
  if (name == "gcn") return Operator::gcn;
  if (name == "sage") return Operator::sage;
  if (name == "transformer") return Operator::transformer;
  if (name == "gat") return Operator::gat;
  throw ConfigError("unknown operator '" + name +
                    "' (expected gcn|sage|transformer|gat)");
}

std::string to_string(Operator op) {
  switch (op) {
    case Operator::gcn: return "gcn";
    case Operator::sage: return "sage";
    case Operator::transformer: return "transformer";
    case Operator::gat: return "gat";
  }
  return "?";
}

OperatorLayer OperatorLayer::init(Operator kind, int in_dim, int out_dim,
                                  Rng& rng) {
  OperatorLayer l;
  l.kind = kind;
  l.in_dim = in_dim;
  l.out_dim = out_dim;
  switch (kind) {
    case Operator::gcn:
      l.theta = init_uniform(in_dim, out_dim, rng);
      break;
    case Operator::sage:
      l.w1 = init_uniform(in_dim, out_dim, rng);
      l.w2 = init_uniform(in_dim, out_dim, rng);
      break;
    case Operator::transformer:
      l.w1 = init_uniform(in_dim, out_dim, rng);
      l.w2 = init_uniform(in_dim, out_dim, rng);
      l.w3 = init_uniform(in_dim, out_dim, rng);
      l.w4 = init_uniform(in_dim, out_dim, rng);
      break;
    case Operator::gat:
      l.theta = init_uniform(in_dim, out_dim, rng);
      l.attn = init_uniform(2 * out_dim, 1, rng);
      break;
  }
  return l;
}

std::vector<Tensor> OperatorLayer::parameters() const {
  switch (kind) {
    case Operator::gcn: return {theta};
    case Operator::sage: return {w1, w2};
    case Operator::transformer: return {w1, w2, w3, w4};
    case Operator::gat: return {theta, attn};
  }
  return {};
}

Tensor gcn_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                   const SpatialGraph& g) {
  check_kind(layer, Operator::gcn, "gcn_forward");
  check_input(layer, x, g, "gcn_forward");
  const int n = g.n_nodes;
  const std::size_t ne = g.edges.size();

  // d̂_i = 1 + sum of incoming edge weights (unit when absent).
  std::vector<double> dhat(static_cast<std::size_t>(n), 1.0);
  for (std::size_t e = 0; e < ne; ++e) {
    dhat[g.edges[e].tgt] += g.edge_weight.empty() ? 1.0 : g.edge_weight[e];
  }

  std::vector<double> edge_coef(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const double w = g.edge_weight.empty() ? 1.0 : g.edge_weight[e];
    edge_coef[e] = w / std::sqrt(dhat[g.edges[e].src] * dhat[g.edges[e].tgt]);
  }
  std::vector<double> self_coef(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) self_coef[i] = 1.0 / dhat[i];

  const std::vector<int> src = g.source_ids();
  const std::vector<int> tgt = g.target_ids();
  Tensor msgs = tape.mul(tape.gather_rows(x, src), Tensor::column(edge_coef));
  Tensor agg = tape.segment_reduce(Reduce::sum, msgs, tgt, n);
  Tensor self = tape.mul(x, Tensor::column(self_coef));
  return tape.matmul(tape.add(agg, self), layer.theta);
}

Tensor sage_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                    const SpatialGraph& g) {
  check_kind(layer, Operator::sage, "sage_forward");
  check_input(layer, x, g, "sage_forward");
  require_in_neighbors(g, "sage_forward");
  const std::vector<int> src = g.source_ids();
  const std::vector<int> tgt = g.target_ids();
  Tensor mean_agg = tape.segment_reduce(Reduce::mean, tape.gather_rows(x, src),
                                        tgt, g.n_nodes);
  return tape.add(tape.matmul(x, layer.w1), tape.matmul(mean_agg, layer.w2));
}

Tensor transformer_forward(Tape& tape, const OperatorLayer& layer,
                           const Tensor& x, const SpatialGraph& g,
                           Tensor* alpha_out) {
  check_kind(layer, Operator::transformer, "transformer_forward");
  check_input(layer, x, g, "transformer_forward");
  require_in_neighbors(g, "transformer_forward");
  const int n = g.n_nodes;
  const std::vector<int> src = g.source_ids();
  const std::vector<int> tgt = g.target_ids();

  Tensor query = tape.gather_rows(tape.matmul(x, layer.w3), tgt);
  Tensor key = tape.gather_rows(tape.matmul(x, layer.w4), src);
  Tensor ones = Tensor::full(layer.out_dim, 1, 1.0);
  Tensor scores = tape.scale(tape.matmul(tape.mul(query, key), ones),
                             1.0 / std::sqrt(static_cast<double>(layer.out_dim)));
  Tensor alpha = tape.segment_softmax(scores, tgt, n);
  if (alpha_out) *alpha_out = alpha;

  Tensor vals = tape.gather_rows(tape.matmul(x, layer.w2), src);
  Tensor agg = tape.segment_reduce(Reduce::sum, tape.mul(vals, alpha), tgt, n);
  return tape.add(tape.matmul(x, layer.w1), agg);
}

Tensor gat_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                   const SpatialGraph& g, Tensor* alpha_out) {
  check_kind(layer, Operator::gat, "gat_forward");
  check_input(layer, x, g, "gat_forward");
  const int n = g.n_nodes;

  // Attention pairs: every edge (j -> i) plus a self pair (i -> i).
  std::vector<int> src = g.source_ids();
  std::vector<int> tgt = g.target_ids();
  src.reserve(src.size() + n);
  tgt.reserve(tgt.size() + n);
  for (int i = 0; i < n; ++i) {
    src.push_back(i);
    tgt.push_back(i);
  }

  Tensor h = tape.matmul(x, layer.theta);
  Tensor pair_feats =
      tape.concat_cols(tape.gather_rows(h, tgt), tape.gather_rows(h, src));
  Tensor logits =
      tape.leaky_relu(tape.matmul(pair_feats, layer.attn), layer.leaky_slope);
  Tensor alpha = tape.segment_softmax(logits, tgt, n);
  if (alpha_out) *alpha_out = alpha;
  Tensor msgs = tape.mul(tape.gather_rows(h, src), alpha);
  return tape.segment_reduce(Reduce::sum, msgs, tgt, n);
}

Tensor operator_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                        const SpatialGraph& g) {
  switch (layer.kind) {
    case Operator::gcn: return gcn_forward(tape, layer, x, g);
    case Operator::sage: return sage_forward(tape, layer, x, g);
    case Operator::transformer: return transformer_forward(tape, layer, x, g);
    case Operator::gat: return gat_forward(tape, layer, x, g);
  }
  throw ContractError("operator_forward: unknown kind");
}

}  // namespace pegnn
