#include "pegnn/posenc.hpp"

#include <cmath>
#include <string>

#include "pegnn/errors.hpp"
#include "pegnn/init.hpp"

namespace pegnn {

void PosEncoderParams::validate() const {
  if (n_scales < 1) {
    throw ContractError("posenc: n_scales must be >= 1, got " +
                        std::to_string(n_scales));
  }
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max)) {
    throw ContractError("posenc: need 0 < sigma_min < sigma_max, got [" +
                        std::to_string(sigma_min) + ", " +
                        std::to_string(sigma_max) + "]");
  }
}

PosEncoderParams PosEncoderParams::init(int n_scales, double sigma_min,
                                        double sigma_max, int embed_dim,
                                        Rng& rng) {
  PosEncoderParams p;
  p.n_scales = n_scales;
  p.sigma_min = sigma_min;
  p.sigma_max = sigma_max;
  p.embed_dim = embed_dim;
  p.validate();
  p.w1 = init_uniform(4 * n_scales, embed_dim, rng);
  p.b1 = init_uniform_bias(4 * n_scales, embed_dim, rng);
  p.w2 = init_uniform(embed_dim, embed_dim, rng);
  p.b2 = init_uniform_bias(embed_dim, embed_dim, rng);
  return p;
}

double scale_sigma(const PosEncoderParams& p, int g) {
  if (p.n_scales == 1) return p.sigma_min;
  const double t = static_cast<double>(g) / (p.n_scales - 1);
  return p.sigma_min * std::pow(p.sigma_max / p.sigma_min, t);
}

std::vector<double> sinusoidal_features(std::span<const double> coords, int n,
                                        const PosEncoderParams& p) {
  p.validate();
  if (coords.size() != static_cast<std::size_t>(n) * 2) {
    throw DimensionError("sinusoidal_features: expected " +
                         std::to_string(2 * n) + " coordinate values, got " +
                         std::to_string(coords.size()));
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw DataError("sinusoidal_features: non-finite coordinate at row " +
                      std::to_string(i / 2));
    }
  }
  const int width = 4 * p.n_scales;
  std::vector<double> feats(static_cast<std::size_t>(n) * width);
  std::vector<double> inv_sigma(static_cast<std::size_t>(p.n_scales));
  for (int g = 0; g < p.n_scales; ++g) inv_sigma[g] = 1.0 / scale_sigma(p, g);
  for (int i = 0; i < n; ++i) {
    const double cx = coords[2 * i], cy = coords[2 * i + 1];
    double* row = feats.data() + static_cast<std::size_t>(i) * width;
    for (int g = 0; g < p.n_scales; ++g) {
      row[4 * g + 0] = std::sin(cx * inv_sigma[g]);
      row[4 * g + 1] = std::cos(cx * inv_sigma[g]);
      row[4 * g + 2] = std::sin(cy * inv_sigma[g]);
      row[4 * g + 3] = std::cos(cy * inv_sigma[g]);
    }
  }
  return feats;
}

Tensor encode(Tape& tape, std::span<const double> coords, int n,
              const PosEncoderParams& p) {
  std::vector<double> feats = sinusoidal_features(coords, n, p);
  Tensor f = Tensor::from_vector(std::move(feats), n, 4 * p.n_scales);
  Tensor h = tape.relu(tape.add(tape.matmul(f, p.w1), p.b1));
  return tape.add(tape.matmul(h, p.w2), p.b2);
}

}  // namespace pegnn
