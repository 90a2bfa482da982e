#pragma once

#include <span>
#include <vector>

#include "pegnn/rng.hpp"
#include "pegnn/tape.hpp"
#include "pegnn/tensor.hpp"

namespace pegnn {

/// Multi-scale sinusoidal featurization of 2-D coordinates followed by a
/// trainable two-layer MLP. Coordinates are expected min-max normalized to
/// [0,1]^2 with training-split extents (see TransformRecord).
struct PosEncoderParams {
  int n_scales = 16;       // G
  double sigma_min = 0.01;
  double sigma_max = 1.0;
  int embed_dim = 64;
  Tensor w1;  // 4G × embed_dim
  Tensor b1;  // 1 × embed_dim
  Tensor w2;  // embed_dim × embed_dim
  Tensor b2;  // 1 × embed_dim

  static PosEncoderParams init(int n_scales, double sigma_min, double sigma_max,
                               int embed_dim, Rng& rng);
  std::vector<Tensor> parameters() const { return {w1, b1, w2, b2}; }
  void validate() const;
};

/// Wavelength of scale g, geometrically interpolated from sigma_min to
/// sigma_max (sigma_min when G == 1).
double scale_sigma(const PosEncoderParams& p, int g);

/// Deterministic n×4G feature matrix: per scale g,
/// [sin(x/σ_g), cos(x/σ_g), sin(y/σ_g), cos(y/σ_g)].
std::vector<double> sinusoidal_features(std::span<const double> coords, int n,
                                        const PosEncoderParams& p);

/// Trainable embedding: MLP(sinusoidal_features), one hidden ReLU layer.
/// The result participates in the tape; MLP weights receive gradients.
Tensor encode(Tape& tape, std::span<const double> coords, int n,
              const PosEncoderParams& p);

}  // namespace pegnn
