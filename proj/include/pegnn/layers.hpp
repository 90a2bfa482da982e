#pragma once

#include <string>
#include <vector>

#include "pegnn/graph.hpp"
#include "pegnn/rng.hpp"
#include "pegnn/tape.hpp"
#include "pegnn/tensor.hpp"

namespace pegnn {

enum class Operator { gcn, sage, transformer, gat };

Operator operator_from_string(const std::string& name);
std::string to_string(Operator op);

/// One message-passing layer. Parameters are stored input_dim×output_dim and
/// applied on the right of row-major feature matrices; attention kinds run
/// with a single head. No bias terms.
struct OperatorLayer {
  Operator kind = Operator::sage;
  int in_dim = 0;
  int out_dim = 0;
  Tensor theta;             // gcn, gat
  Tensor w1, w2;            // sage, transformer
  Tensor w3, w4;            // transformer query/key maps (width = out_dim)
  Tensor attn;              // gat: 2*out_dim × 1
  double leaky_slope = 0.2;

  static OperatorLayer init(Operator kind, int in_dim, int out_dim, Rng& rng);
  std::vector<Tensor> parameters() const;
};

// x'_i = Θᵀ Σ_{j∈N(i)∪{i}} e_{j,i}/sqrt(d̂_j d̂_i) x_j, with e_{i,i} = 1 and
// d̂_i = 1 + Σ_{j∈N(i)} e_{j,i}. Unit edge weights unless the graph carries
// its own.
Tensor gcn_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                   const SpatialGraph& g);

// x'_i = W₁x_i + W₂·mean_{j∈N(i)} x_j. Every node needs an in-neighbour.
Tensor sage_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                    const SpatialGraph& g);

// x'_i = W₁x_i + Σ_{j∈N(i)} α_{i,j} W₂x_j with α softmaxed over N(i) from
// (W₃x_i)ᵀ(W₄x_j)/sqrt(d), d = out_dim. The softmax excludes the self node.
// `alpha_out`, when given, receives the per-edge attention column.
Tensor transformer_forward(Tape& tape, const OperatorLayer& layer,
                           const Tensor& x, const SpatialGraph& g,
                           Tensor* alpha_out = nullptr);

// x'_i = Σ_{j∈N(i)∪{i}} α_{i,j} Θx_j with α softmaxed over N(i)∪{i} from
// LeakyReLU(aᵀ[Θx_i ‖ Θx_j]). `alpha_out`, when given, receives the
// attention column over the edge list followed by the n self pairs.
Tensor gat_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                   const SpatialGraph& g, Tensor* alpha_out = nullptr);

Tensor operator_forward(Tape& tape, const OperatorLayer& layer, const Tensor& x,
                        const SpatialGraph& g);

}  // namespace pegnn
