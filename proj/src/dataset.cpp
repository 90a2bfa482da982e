#include "pegnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pegnn/errors.hpp"
#include "pegnn/io_util.hpp"
#include "pegnn/rng.hpp"

namespace pegnn {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw DataError("non-numeric cell '" + cell + "' at data row " +
                    std::to_string(row) + ", column " + col);
  }
  if (!std::isfinite(v)) {
    throw DataError("non-finite value at data row " + std::to_string(row) +
                    ", column " + col);
  }
  return v;
}

}  // namespace

PointSet PointSet::subset(std::span<const int> indices) const {
  PointSet out;
  out.n = static_cast<int>(indices.size());
  out.f = f;
  out.names = names;
  out.preprocessed = preprocessed;
  out.coords.reserve(out.n * 2);
  out.features.reserve(static_cast<std::size_t>(out.n) * f);
  out.target.reserve(out.n);
  for (int i : indices) {
    if (i < 0 || i >= n) {
      throw IndexError("subset: index " + std::to_string(i) + " outside [0, " +
                       std::to_string(n) + ")");
    }
    out.coords.push_back(coords[2 * static_cast<std::size_t>(i)]);
    out.coords.push_back(coords[2 * static_cast<std::size_t>(i) + 1]);
    for (int j = 0; j < f; ++j)
      out.features.push_back(features[static_cast<std::size_t>(i) * f + j]);
    out.target.push_back(target[i]);
  }
  return out;
}

PointSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open dataset file '" + path + "'");
  }
  std::string line;
  // Header (skipping comment lines).
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split_line(line);
    break;
  }
  if (header.size() < 3 || header.front() != "lon" || header[1] != "lat" ||
      header.back() != "target") {
    throw DataError("dataset '" + path +
                    "': header must be lon,lat,<features...>,target");
  }
  PointSet ps;
  ps.f = static_cast<int>(header.size()) - 3;
  ps.names.assign(header.begin() + 2, header.end() - 1);

  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("dataset '" + path + "': data row " + std::to_string(row) +
                      " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    ps.coords.push_back(parse_cell(cells[0], row, "lon"));
    ps.coords.push_back(parse_cell(cells[1], row, "lat"));
    for (int j = 0; j < ps.f; ++j)
      ps.features.push_back(parse_cell(cells[2 + j], row, ps.names[j]));
    const double t = parse_cell(cells.back(), row, "target");
    if (!(t > 0.0)) {
      throw DataError("dataset '" + path + "': non-positive target " +
                      fmt_double(t) + " at data row " + std::to_string(row) +
                      " (log transform requires target > 0)");
    }
    ps.target.push_back(t);
    ++row;
  }
  ps.n = row;
  return ps;
}

void save_csv(const PointSet& ps, const std::string& path,
              const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write dataset file '" + path + "'");
  }
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "lon,lat";
  for (const std::string& name : ps.names) out << "," << name;
  out << ",target\n";
  for (int i = 0; i < ps.n; ++i) {
    out << fmt_double(ps.coords[2 * i]) << "," << fmt_double(ps.coords[2 * i + 1]);
    for (int j = 0; j < ps.f; ++j)
      out << "," << fmt_double(ps.features[static_cast<std::size_t>(i) * ps.f + j]);
    out << "," << fmt_double(ps.target[i]) << "\n";
  }
  if (!out) {
    throw DataError("write failed for dataset file '" + path + "'");
  }
}

PointSet synth_dataset(int n, std::uint64_t seed, double noise_sd) {
  if (n < 50) {
    throw ContractError("synth_dataset: need n >= 50, got " + std::to_string(n));
  }
  if (noise_sd < 0.0) {
    throw ContractError("synth_dataset: noise_sd must be >= 0");
  }
  constexpr int kFeatures = 5;
  constexpr int kComponents = 3;
  Rng rng(seed);

  // Smooth random fields: mixtures of low-frequency plane sinusoids.
  struct Component {
    double u, v, phase, amp;
  };
  std::vector<Component> comp(kFeatures * kComponents);
  for (int k = 0; k < kFeatures; ++k) {
    for (int m = 0; m < kComponents; ++m) {
      Component& c = comp[k * kComponents + m];
      c.u = static_cast<double>(rng.below(2) + 1);
      c.v = static_cast<double>(rng.below(2) + 1);
      c.phase = rng.uniform(0.0, kTwoPi);
      c.amp = rng.uniform(0.6, 1.0) / (m + 1);
    }
  }
  std::vector<double> beta(kFeatures);
  for (int k = 0; k < kFeatures; ++k) {
    const double magnitude = rng.uniform(0.25, 0.5);
    beta[k] = rng.uniform() < 0.5 ? -magnitude : magnitude;
  }

  auto clean_field = [&](int k, double x, double y) {
    double s = 0.0;
    for (int m = 0; m < kComponents; ++m) {
      const Component& c = comp[k * kComponents + m];
      s += c.amp * std::sin(kTwoPi * (c.u * x + c.v * y) + c.phase);
    }
    return s;
  };
  // Coordinate-only structure, deliberately absent from the features: the
  // positional encoder is what can explain this part of the target.
  auto coord_term = [](double x, double y) {
    return std::sin(kTwoPi * x) * std::cos(kTwoPi * y) +
           0.5 * std::sin(2.0 * kTwoPi * x + kTwoPi * y);
  };

  PointSet ps;
  ps.n = n;
  ps.f = kFeatures;
  for (int k = 0; k < kFeatures; ++k) ps.names.push_back("f" + std::to_string(k));
  ps.coords.reserve(2 * n);
  ps.features.reserve(static_cast<std::size_t>(n) * kFeatures);
  ps.target.reserve(n);

  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    ps.coords.push_back(x);
    ps.coords.push_back(y);
    double g = 0.8 + 1.2 * coord_term(x, y);
    for (int k = 0; k < kFeatures; ++k) {
      const double clean = clean_field(k, x, y);
      g += beta[k] * clean;
      ps.features.push_back(clean + 0.1 * rng.normal());
    }
    ps.target.push_back(std::exp(g + noise_sd * rng.normal()));
  }
  return ps;
}

SplitIndices split_n(int n, const SplitSpec& spec) {
  if (!(spec.train_frac > 0.0) || !(spec.test_frac > 0.0) ||
      !(spec.eval_frac > 0.0)) {
    throw ContractError("split: fractions must be positive");
  }
  const double sum = spec.train_frac + spec.test_frac + spec.eval_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractError("split: fractions must sum to 1, got " +
                        fmt_double(sum));
  }
  const int n_test = static_cast<int>(std::lround(n * spec.test_frac));
  const int n_eval = static_cast<int>(std::lround(n * spec.eval_frac));
  const int n_train = n - n_test - n_eval;
  if (n_train <= 0 || n_test <= 0 || n_eval <= 0) {
    throw ContractError("split: some split is empty for n = " +
                        std::to_string(n));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  SplitIndices idx;
  idx.train.assign(order.begin(), order.begin() + n_train);
  idx.test.assign(order.begin() + n_train, order.begin() + n_train + n_test);
  idx.eval.assign(order.begin() + n_train + n_test, order.end());
  std::sort(idx.train.begin(), idx.train.end());
  std::sort(idx.test.begin(), idx.test.end());
  std::sort(idx.eval.begin(), idx.eval.end());
  return idx;
}

SplitIndices split(const PointSet& ps, const SplitSpec& spec) {
  return split_n(ps.n, spec);
}

void TransformRecord::apply(PointSet& ps) const {
  if (ps.preprocessed) {
    throw ContractError("preprocess: point set is already preprocessed");
  }
  if (ps.f != static_cast<int>(kept.size()) + static_cast<int>(dropped_names.size())) {
    throw DataError("preprocess: transform was fitted on " +
                    std::to_string(kept.size() + dropped_names.size()) +
                    " features, point set has " + std::to_string(ps.f));
  }
  const int fk = static_cast<int>(kept.size());
  std::vector<double> new_features;
  new_features.reserve(static_cast<std::size_t>(ps.n) * fk);
  for (int i = 0; i < ps.n; ++i) {
    for (int c = 0; c < fk; ++c) {
      const double v = ps.features[static_cast<std::size_t>(i) * ps.f + kept[c]];
      new_features.push_back((v - feat_mean[c]) / feat_sd[c]);
    }
  }
  ps.features = std::move(new_features);
  ps.f = fk;
  ps.names = kept_names;

  for (int i = 0; i < ps.n; ++i) {
    if (!(ps.target[i] > 0.0)) {
      throw DataError("preprocess: non-positive target at row " +
                      std::to_string(i));
    }
    ps.target[i] = std::log(ps.target[i]);
  }
  for (int i = 0; i < ps.n; ++i) {
    for (int a = 0; a < 2; ++a) {
      const double range = coord_max[a] - coord_min[a];
      double& c = ps.coords[2 * static_cast<std::size_t>(i) + a];
      c = range > 0.0 ? (c - coord_min[a]) / range : 0.5;
    }
  }
  ps.preprocessed = true;
}

double TransformRecord::invert_target(double y_log) const {
  return std::exp(y_log);
}

std::vector<double> TransformRecord::normalize_coords(
    std::span<const double> coords) const {
  std::vector<double> out(coords.begin(), coords.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int a = static_cast<int>(i % 2);
    const double range = coord_max[a] - coord_min[a];
    out[i] = range > 0.0 ? (out[i] - coord_min[a]) / range : 0.5;
  }
  return out;
}

TransformRecord fit_transform(const PointSet& ps, std::span<const int> train_idx) {
  if (ps.preprocessed) {
    throw ContractError("fit_transform: point set is already preprocessed");
  }
  if (train_idx.empty()) {
    throw ContractError("fit_transform: empty training index set");
  }
  const int nt = static_cast<int>(train_idx.size());
  TransformRecord rec;
  for (int j = 0; j < ps.f; ++j) {
    double mean = 0.0;
    for (int i : train_idx)
      mean += ps.features[static_cast<std::size_t>(i) * ps.f + j];
    mean /= nt;
    double var = 0.0;
    for (int i : train_idx) {
      const double d = ps.features[static_cast<std::size_t>(i) * ps.f + j] - mean;
      var += d * d;
    }
    var /= nt;
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      rec.dropped_names.push_back(ps.names[j]);
      continue;
    }
    rec.kept.push_back(j);
    rec.kept_names.push_back(ps.names[j]);
    rec.feat_mean.push_back(mean);
    rec.feat_sd.push_back(sd);
  }
  for (int a = 0; a < 2; ++a) {
    rec.coord_min[a] = ps.coords[2 * static_cast<std::size_t>(train_idx[0]) + a];
    rec.coord_max[a] = rec.coord_min[a];
  }
  for (int i : train_idx) {
    for (int a = 0; a < 2; ++a) {
      const double c = ps.coords[2 * static_cast<std::size_t>(i) + a];
      rec.coord_min[a] = std::min(rec.coord_min[a], c);
      rec.coord_max[a] = std::max(rec.coord_max[a], c);
    }
  }
  return rec;
}

TransformRecord preprocess(PointSet& ps, std::span<const int> train_idx) {
  TransformRecord rec = fit_transform(ps, train_idx);
  rec.apply(ps);
  return rec;
}

}  // namespace pegnn
