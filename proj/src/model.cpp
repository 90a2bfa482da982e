#include "pegnn/model.hpp"

#include <cmath>

#include "pegnn/errors.hpp"
#include "pegnn/init.hpp"
#include "pegnn/moran.hpp"

namespace pegnn {

PeGnnModel PeGnnModel::init(Operator kind, int feature_dim, int embed_dim,
                            int hidden_dim, int n_scales, double sigma_min,
                            double sigma_max, double lambda, Rng& rng) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ContractError("model: lambda must lie in [0, 1], got " +
                        std::to_string(lambda));
  }
  PeGnnModel m;
  m.kind = kind;
  m.lambda = lambda;
  m.feature_dim = feature_dim;
  m.posenc = PosEncoderParams::init(n_scales, sigma_min, sigma_max, embed_dim, rng);
  m.layer1 = OperatorLayer::init(kind, feature_dim + embed_dim, hidden_dim, rng);
  m.layer2 = OperatorLayer::init(kind, hidden_dim, hidden_dim, rng);
  m.head_main_w = init_uniform(hidden_dim, 1, rng);
  m.head_main_b = init_uniform_bias(hidden_dim, 1, rng);
  m.head_moran_w = init_uniform(hidden_dim, 1, rng);
  m.head_moran_b = init_uniform_bias(hidden_dim, 1, rng);
  return m;
}

std::vector<Tensor> PeGnnModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::vector<std::pair<std::string, Tensor>> PeGnnModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < 4; ++i) {
    static const char* pe_names[] = {"posenc.w1", "posenc.b1", "posenc.w2",
                                     "posenc.b2"};
    out.emplace_back(pe_names[i], posenc.parameters()[i]);
  }
  auto layer_names = [](Operator kind) -> std::vector<std::string> {
    switch (kind) {
      case Operator::gcn: return {"theta"};
      case Operator::sage: return {"w1", "w2"};
      case Operator::transformer: return {"w1", "w2", "w3", "w4"};
      case Operator::gat: return {"theta", "attn"};
    }
    return {};
  };
  const std::vector<std::string> names = layer_names(kind);
  const std::vector<Tensor> p1 = layer1.parameters();
  const std::vector<Tensor> p2 = layer2.parameters();
  for (std::size_t i = 0; i < names.size(); ++i)
    out.emplace_back("layer1." + names[i], p1[i]);
  for (std::size_t i = 0; i < names.size(); ++i)
    out.emplace_back("layer2." + names[i], p2[i]);
  out.emplace_back("head_main.w", head_main_w);
  out.emplace_back("head_main.b", head_main_b);
  out.emplace_back("head_moran.w", head_moran_w);
  out.emplace_back("head_moran.b", head_moran_b);
  return out;
}

ForwardResult model_forward(Tape& tape, const PeGnnModel& model,
                            const Tensor& features,
                            std::span<const double> coords,
                            const SpatialGraph& g) {
  if (features.rows() != g.n_nodes) {
    throw DimensionError("model_forward: " + std::to_string(features.rows()) +
                         " feature rows for " + std::to_string(g.n_nodes) +
                         " graph nodes");
  }
  if (features.cols() != model.feature_dim) {
    throw DimensionError("model_forward: feature width " +
                         std::to_string(features.cols()) + ", model expects " +
                         std::to_string(model.feature_dim));
  }
  Tensor embedding =
      model.ablate_pe
          ? Tensor::zeros(g.n_nodes, model.posenc.embed_dim)
          : encode(tape, coords, g.n_nodes, model.posenc);
  Tensor trunk_in = tape.concat_cols(features, embedding);
  Tensor h1 = tape.relu(operator_forward(tape, model.layer1, trunk_in, g));
  Tensor h2 = tape.relu(operator_forward(tape, model.layer2, h1, g));
  ForwardResult out;
  out.y_hat = tape.add(tape.matmul(h2, model.head_main_w), model.head_main_b);
  out.i_hat = tape.add(tape.matmul(h2, model.head_moran_w), model.head_moran_b);
  return out;
}

namespace {

Tensor mean_squared_error(Tape& tape, const Tensor& pred, const Tensor& truth) {
  Tensor diff = tape.sub(pred, truth);
  return tape.scale(tape.sum_all(tape.mul(diff, diff)),
                    1.0 / static_cast<double>(pred.rows()));
}

}  // namespace

Tensor composite_loss(Tape& tape, const Tensor& y_hat, const Tensor& y_true,
                      const Tensor& i_hat, const Tensor& i_true, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ContractError("loss: lambda must lie in [0, 1], got " +
                        std::to_string(lambda));
  }
  if (y_hat.rows() != y_true.rows() || i_hat.rows() != i_true.rows() ||
      y_hat.rows() != i_hat.rows() || y_hat.rows() == 0) {
    throw ContractError("loss: prediction/target lengths disagree (" +
                        std::to_string(y_hat.rows()) + ", " +
                        std::to_string(y_true.rows()) + ", " +
                        std::to_string(i_hat.rows()) + ", " +
                        std::to_string(i_true.rows()) + ")");
  }
  Tensor main_mse = mean_squared_error(tape, y_hat, y_true);
  Tensor moran_mse = mean_squared_error(tape, i_hat, i_true);
  return tape.add(main_mse, tape.scale(moran_mse, lambda));
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    const bool has_grad = p.has_grad();
    for (std::size_t e = 0; e < p.size(); ++e) {
      const double g = has_grad ? p.grad()[e] : 0.0;
      m_[i][e] = beta1_ * m_[i][e] + (1.0 - beta1_) * g;
      v_[i][e] = beta2_ * v_[i][e] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i][e] / bc1;
      const double vhat = v_[i][e] / bc2;
      p.values()[e] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double train_step(PeGnnModel& model, const Batch& batch, Adam& opt, int k,
                  int* moran_fallbacks) {
  SpatialGraph g = knn_graph(batch.coords, batch.n, k);
  bool fell_back = false;
  std::vector<double> moran_true =
      moran_target_for_batch(batch.y_log, g, &fell_back);
  if (fell_back && moran_fallbacks) ++*moran_fallbacks;

  Tape tape;
  ForwardResult fwd = model_forward(tape, model, batch.features, batch.coords, g);
  Tensor loss =
      composite_loss(tape, fwd.y_hat, Tensor::column(batch.y_log), fwd.i_hat,
                     Tensor::column(std::move(moran_true)), model.lambda);
  opt.zero_grad();
  tape.backward(loss);
  opt.step();

  const double value = loss.at(0, 0);
  if (!std::isfinite(value)) {
    throw NumericError("train_step: non-finite loss");
  }
  return value;
}

}  // namespace pegnn
