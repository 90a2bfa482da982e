#pragma once

#include <cstdint>
#include <string>

#include "pegnn/layers.hpp"

namespace pegnn {

/// Everything a training run depends on. Mirrored one-to-one by CLI flags;
/// validated before any work starts.
struct TrainConfig {
  Operator op = Operator::sage;
  double lambda = 0.5;
  int k = 5;
  int n_scales = 16;
  double sigma_min = 0.01;
  double sigma_max = 1.0;
  int embed_dim = 64;
  int hidden_dim = 64;
  int batch_size = 512;
  int epochs = 200;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double train_frac = 0.70;
  double test_frac = 0.15;
  double eval_frac = 0.15;
  int patience = 20;
  bool ablate_pe = false;

  void validate() const;  // throws ConfigError naming the offending field
  std::string canonical_string() const;
  // FNV-1a of the canonical string; stamped into output-file headers.
  std::string hash() const;
};

// "pegnn <version> config=<hash> seed=<seed>" header comment for outputs.
std::string file_header(const TrainConfig& cfg);

}  // namespace pegnn
