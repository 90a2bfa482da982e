#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pegnn/layers.hpp"
#include "pegnn/posenc.hpp"

namespace pegnn {

/// Positional-encoder GNN: coordinate embedding concatenated to node
/// features, two shared operator layers (ReLU after each), and two linear
/// prediction heads — the main regression target and the batch-local
/// Moran's I auxiliary.
struct PeGnnModel {
  PosEncoderParams posenc;
  OperatorLayer layer1, layer2;
  Tensor head_main_w, head_main_b;    // hidden → 1
  Tensor head_moran_w, head_moran_b;  // hidden → 1
  double lambda = 0.5;
  Operator kind = Operator::sage;
  int feature_dim = 0;
  bool ablate_pe = false;  // replace the embedding with zeros (diagnostic)

  static PeGnnModel init(Operator kind, int feature_dim, int embed_dim,
                         int hidden_dim, int n_scales, double sigma_min,
                         double sigma_max, double lambda, Rng& rng);

  std::vector<Tensor> parameters() const;
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

struct ForwardResult {
  Tensor y_hat;  // n×1 main prediction
  Tensor i_hat;  // n×1 auxiliary Moran prediction
};

/// Full forward pass over one batch graph. Both heads read the same trunk.
ForwardResult model_forward(Tape& tape, const PeGnnModel& model,
                            const Tensor& features,
                            std::span<const double> coords,
                            const SpatialGraph& g);

/// L = MSE(y_hat, y_true) + λ·MSE(i_hat, i_true), both mean-reduced.
Tensor composite_loss(Tape& tape, const Tensor& y_hat, const Tensor& y_true,
                      const Tensor& i_hat, const Tensor& i_true, double lambda);

/// Adam with bias correction; one moment pair per parameter entry. Updates
/// are applied in parameter order, sequentially, so steps are reproducible.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void zero_grad();
  void step();

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

struct Batch {
  int n = 0;
  Tensor features;               // n×F, constant (no grad)
  std::vector<double> coords;    // n×2, normalized
  std::vector<double> y_log;     // n log-scale targets
};

/// One optimization step: batch kNN graph, Moran targets on the batch
/// subgraph, forward, composite loss, backward, Adam update. Returns the
/// batch loss. `moran_fallbacks` counts constant-batch target fallbacks.
double train_step(PeGnnModel& model, const Batch& batch, Adam& opt, int k,
                  int* moran_fallbacks = nullptr);

}  // namespace pegnn
