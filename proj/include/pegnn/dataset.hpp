#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pegnn {

/// Coordinates, features and a strictly positive regression target for a
/// set of points. `preprocessed` flips once the log/z-score/min-max
/// transforms have been applied.
struct PointSet {
  int n = 0;
  int f = 0;
  std::vector<double> coords;    // n×2 (lon, lat)
  std::vector<double> features;  // n×F row-major
  std::vector<double> target;    // n
  std::vector<std::string> names;
  bool preprocessed = false;

  PointSet subset(std::span<const int> indices) const;
};

/// CSV with header `lon,lat,<features...>,target`; `#` lines are comments.
PointSet load_csv(const std::string& path);
void save_csv(const PointSet& ps, const std::string& path,
              const std::string& header_comment);

/// Seeded synthetic dataset: coordinates uniform on [0,1]^2, five spatially
/// smooth features (low-frequency sinusoid mixtures plus small noise), and a
/// log-normal target driven by the clean fields plus a coordinate-only
/// smooth term. Strictly positive, heavy right tail.
PointSet synth_dataset(int n, std::uint64_t seed, double noise_sd = 0.1);

struct SplitSpec {
  double train_frac = 0.70;
  double test_frac = 0.15;
  double eval_frac = 0.15;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<int> train, test, eval;
};

/// Seeded shuffle, then disjoint exhaustive segments; test/eval sizes are
/// rounded to nearest and the remainder goes to train.
SplitIndices split(const PointSet& ps, const SplitSpec& spec);
SplitIndices split_n(int n, const SplitSpec& spec);

/// Fitted preprocessing: target → ln(target), features z-scored with
/// train-split statistics (zero-variance columns dropped), coordinates
/// min-max normalized with train-split extents. Stored in checkpoints so
/// evaluation reuses the exact same transform.
struct TransformRecord {
  std::vector<double> feat_mean, feat_sd;  // per kept feature
  std::vector<int> kept;                   // original column indices
  std::vector<std::string> kept_names;
  std::vector<std::string> dropped_names;  // zero-variance columns
  double coord_min[2] = {0.0, 0.0};
  double coord_max[2] = {1.0, 1.0};

  void apply(PointSet& ps) const;  // errors if ps.preprocessed already
  double invert_target(double y_log) const;
  std::vector<double> normalize_coords(std::span<const double> coords) const;
};

/// Fit a TransformRecord on the training rows of `ps`.
TransformRecord fit_transform(const PointSet& ps, std::span<const int> train_idx);

/// fit_transform + apply in place; returns the record.
TransformRecord preprocess(PointSet& ps, std::span<const int> train_idx);

}  // namespace pegnn
