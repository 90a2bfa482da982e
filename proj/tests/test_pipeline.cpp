#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pegnn/dataset.hpp"
#include "pegnn/errors.hpp"
#include "pegnn/metrics.hpp"
#include "pegnn/moran.hpp"
#include "pegnn/rng.hpp"

using namespace pegnn;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path p = fs::temp_directory_path() / "pegnn_unit_tests";
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("load_csv: three-row fixture") {
  const fs::path p = tmp_dir() / "fixture.csv";
  write_file(p,
             "# comment line\n"
             "lon,lat,elev,ndvi,target\n"
             "1.5,2.5,10,0.3,4.2\n"
             "2.5,3.5,20,0.4,1.0\n"
             "3.5,4.5,30,0.5,0.25\n");
  PointSet ps = load_csv(p.string());
  CHECK(ps.n == 3);
  CHECK(ps.f == 2);
  CHECK(ps.names == std::vector<std::string>{"elev", "ndvi"});
  CHECK(ps.coords[0] == 1.5);
  CHECK(ps.features[2] == 20.0);
  CHECK(ps.target[2] == 0.25);
}

TEST_CASE("load_csv: error cases name row and column") {
  const fs::path zero = tmp_dir() / "zero_target.csv";
  write_file(zero, "lon,lat,f0,target\n0,0,1,2\n0,1,1,0\n");
  CHECK_THROWS_AS(load_csv(zero.string()), DataError);
  try {
    load_csv(zero.string());
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }

  const fs::path garbled = tmp_dir() / "garbled.csv";
  write_file(garbled, "lon,lat,f0,target\n0,0,abc,2\n");
  CHECK_THROWS_AS(load_csv(garbled.string()), DataError);

  const fs::path missing = tmp_dir() / "missing_cols.csv";
  write_file(missing, "lon,lat\n0,0\n");
  CHECK_THROWS_AS(load_csv(missing.string()), DataError);

  CHECK_THROWS_AS(load_csv((tmp_dir() / "no_such_file.csv").string()), DataError);
}

TEST_CASE("save_csv then load_csv is value-identical") {
  Rng rng(17);
  PointSet ps = synth_dataset(120, 3, 0.15);
  const fs::path p = tmp_dir() / "roundtrip.csv";
  save_csv(ps, p.string(), "roundtrip check");
  PointSet back = load_csv(p.string());
  REQUIRE(back.n == ps.n);
  REQUIRE(back.f == ps.f);
  CHECK(back.names == ps.names);
  for (std::size_t i = 0; i < ps.coords.size(); ++i)
    CHECK(back.coords[i] == ps.coords[i]);
  for (std::size_t i = 0; i < ps.features.size(); ++i)
    CHECK(back.features[i] == ps.features[i]);
  for (std::size_t i = 0; i < ps.target.size(); ++i)
    CHECK(back.target[i] == ps.target[i]);
}

TEST_CASE("synth_dataset: deterministic, positive, spatially smooth") {
  PointSet a = synth_dataset(400, 7);
  PointSet b = synth_dataset(400, 7);
  CHECK(a.coords == b.coords);
  CHECK(a.features == b.features);
  CHECK(a.target == b.target);

  PointSet big = synth_dataset(100000, 123);
  double tmin = big.target[0];
  for (double t : big.target) tmin = std::min(tmin, t);
  CHECK(tmin > 0.0);

  // Smooth field: positive mean local Moran's I of the log target.
  PointSet mid = synth_dataset(600, 11);
  std::vector<double> logy(mid.target.size());
  for (std::size_t i = 0; i < logy.size(); ++i) logy[i] = std::log(mid.target[i]);
  SpatialGraph g = knn_graph(mid.coords, mid.n, 5);
  double mean_i = 0.0;
  for (double v : local_moran(logy, g).values) mean_i += v;
  CHECK(mean_i / mid.n > 0.0);

  CHECK_THROWS_AS(synth_dataset(10, 1), ContractError);
}

TEST_CASE("preprocess: log transform, z-scores, coordinate extents") {
  PointSet ps;
  ps.n = 3;
  ps.f = 2;
  ps.names = {"a", "b"};
  const double e = std::exp(1.0);
  ps.coords = {0.0, 10.0, 5.0, 20.0, 10.0, 40.0};
  ps.features = {1.0, 7.0, 2.0, 7.5, 4.0, 8.0};
  ps.target = {1.0, e, e * e};
  const std::vector<int> train_idx = {0, 1, 2};
  TransformRecord rec = preprocess(ps, train_idx);

  CHECK(ps.target[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ps.target[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ps.target[2] == doctest::Approx(2.0).epsilon(1e-15));

  for (int j = 0; j < 2; ++j) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 3; ++i) mean += ps.features[i * 2 + j];
    mean /= 3;
    for (int i = 0; i < 3; ++i) {
      const double d = ps.features[i * 2 + j] - mean;
      var += d * d;
    }
    var /= 3;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
  }

  CHECK(ps.coords[0] == 0.0);
  CHECK(ps.coords[1] == 0.0);
  CHECK(ps.coords[4] == 1.0);
  CHECK(ps.coords[5] == 1.0);
  CHECK(ps.coords[2] == doctest::Approx(0.5));

  // Single-application guard.
  CHECK_THROWS_AS(rec.apply(ps), ContractError);

  // Inversion recovers the raw scale.
  CHECK(std::abs(rec.invert_target(ps.target[2]) - e * e) / (e * e) < 1e-10);
}

TEST_CASE("preprocess: zero-variance feature is dropped and recorded") {
  PointSet ps;
  ps.n = 4;
  ps.f = 2;
  ps.names = {"flat", "ok"};
  ps.coords = {0, 0, 1, 0, 0, 1, 1, 1};
  ps.features = {3.0, 1.0, 3.0, 2.0, 3.0, 3.0, 3.0, 4.0};
  ps.target = {1, 2, 3, 4};
  const std::vector<int> train_idx = {0, 1, 2, 3};
  TransformRecord rec = preprocess(ps, train_idx);
  CHECK(ps.f == 1);
  CHECK(ps.names == std::vector<std::string>{"ok"});
  CHECK(rec.dropped_names == std::vector<std::string>{"flat"});
  CHECK(rec.kept == std::vector<int>{1});
}

TEST_CASE("split: default fractions on n=100 give 70/15/15") {
  SplitIndices idx = split_n(100, SplitSpec{});
  CHECK(idx.train.size() == 70);
  CHECK(idx.test.size() == 15);
  CHECK(idx.eval.size() == 15);
}

TEST_CASE("split: partition properties over random n (property test)") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(990));
    SplitSpec spec;
    spec.seed = rng.below(1000);
    SplitIndices idx = split_n(n, spec);
    std::vector<int> seen(n, 0);
    for (int i : idx.train) ++seen[i];
    for (int i : idx.test) ++seen[i];
    for (int i : idx.eval) ++seen[i];
    for (int c : seen) CHECK(c == 1);  // exhaustive and disjoint

    SplitIndices again = split_n(n, spec);
    CHECK(idx.train == again.train);
    CHECK(idx.test == again.test);
    CHECK(idx.eval == again.eval);
  }
}

TEST_CASE("split: degenerate inputs") {
  CHECK_THROWS_AS(split_n(4, SplitSpec{0.99, 0.005, 0.005, 0}), ContractError);
  CHECK_THROWS_AS(split_n(100, SplitSpec{0.5, 0.2, 0.2, 0}), ContractError);
  CHECK_THROWS_AS(split_n(100, SplitSpec{-0.2, 0.6, 0.6, 0}), ContractError);
}

TEST_CASE("compute_metrics: hand cases and the recompute oracle") {
  SUBCASE("perfect predictions") {
    const std::vector<double> y = {1, 2, 3};
    Metrics m = compute_metrics(y, y);
    CHECK(m.mse == 0.0);
    CHECK(m.mae == 0.0);
    CHECK(m.mape == 0.0);
  }
  SUBCASE("constant half error at y=2") {
    const std::vector<double> yt = {2, 2, 2, 2};
    const std::vector<double> yh = {2.5, 2.5, 2.5, 2.5};
    Metrics m = compute_metrics(yh, yt);
    CHECK(m.mse == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.mae == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.mape == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("ten-row fixture vs spreadsheet-style recomputation") {
    Rng rng(41);
    std::vector<double> yt(10), yh(10);
    for (int i = 0; i < 10; ++i) {
      yt[i] = rng.uniform(0.5, 3.0);
      yh[i] = yt[i] + rng.uniform(-0.4, 0.4);
    }
    Metrics m = compute_metrics(yh, yt);
    double mse = 0, mae = 0, mape = 0;
    for (int i = 0; i < 10; ++i) {
      mse += (yh[i] - yt[i]) * (yh[i] - yt[i]);
      mae += std::abs(yh[i] - yt[i]);
      mape += std::abs(yh[i] - yt[i]) / std::abs(yt[i]);
    }
    CHECK(std::abs(m.mse - mse / 10) < 1e-12);
    CHECK(std::abs(m.mae - mae / 10) < 1e-12);
    CHECK(std::abs(m.mape - mape / 10) < 1e-12);
  }
  SUBCASE("zero true values are excluded from MAPE with a count") {
    const std::vector<double> yt = {0.0, 2.0};
    const std::vector<double> yh = {1.0, 3.0};
    Metrics m = compute_metrics(yh, yt);
    CHECK(m.mape_excluded == 1);
    CHECK(m.mape == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("permutation invariance of paired metrics") {
    Rng rng(43);
    std::vector<double> yt(20), yh(20);
    for (int i = 0; i < 20; ++i) {
      yt[i] = rng.uniform(1.0, 2.0);
      yh[i] = rng.uniform(1.0, 2.0);
    }
    Metrics base = compute_metrics(yh, yt);
    std::vector<int> perm(20);
    for (int i = 0; i < 20; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> pt(20), ph(20);
    for (int i = 0; i < 20; ++i) {
      pt[i] = yt[perm[i]];
      ph[i] = yh[perm[i]];
    }
    Metrics p = compute_metrics(ph, pt);
    CHECK(std::abs(base.mse - p.mse) < 1e-14);
    CHECK(std::abs(base.mae - p.mae) < 1e-14);
    CHECK(std::abs(base.mape - p.mape) < 1e-14);
  }
  SUBCASE("empty input is a contract error") {
    const std::vector<double> none;
    CHECK_THROWS_AS(compute_metrics(none, none), ContractError);
  }
}

TEST_CASE("spatial_variance_grid: hand cases and recompute oracle") {
  SUBCASE("constant values give a constant grid") {
    Rng rng(51);
    const int n = 100;
    std::vector<double> coords(2 * n);
    for (double& c : coords) c = rng.uniform();
    std::vector<double> vals(n, 3.25);
    VarianceGrid g = spatial_variance_grid(coords, n, vals, 4);
    for (std::size_t c = 0; c < g.mean.size(); ++c)
      if (g.count[c] > 0) CHECK(g.mean[c] == 3.25);
    CHECK(g.cell_variance() == 0.0);
  }
  SUBCASE("single point occupies exactly one cell") {
    const std::vector<double> coords = {0.4, 0.6};
    const std::vector<double> vals = {5.0};
    VarianceGrid g = spatial_variance_grid(coords, 1, vals, 3);
    int nonmissing = 0;
    for (int c : g.count) nonmissing += c > 0 ? 1 : 0;
    CHECK(nonmissing == 1);
  }
  SUBCASE("cell means match a direct per-cell recomputation") {
    Rng rng(53);
    const int n = 200, gn = 5;
    std::vector<double> coords(2 * n);
    std::vector<double> vals(n);
    for (double& c : coords) c = rng.uniform();
    for (double& v : vals) v = rng.uniform(-3.0, 3.0);
    VarianceGrid g = spatial_variance_grid(coords, n, vals, gn);

    double minx = coords[0], maxx = coords[0], miny = coords[1], maxy = coords[1];
    for (int i = 0; i < n; ++i) {
      minx = std::min(minx, coords[2 * i]);
      maxx = std::max(maxx, coords[2 * i]);
      miny = std::min(miny, coords[2 * i + 1]);
      maxy = std::max(maxy, coords[2 * i + 1]);
    }
    for (int cy = 0; cy < gn; ++cy) {
      for (int cx = 0; cx < gn; ++cx) {
        double acc = 0.0;
        int cnt = 0;
        for (int i = 0; i < n; ++i) {
          int ix = std::min(
              gn - 1, static_cast<int>((coords[2 * i] - minx) / (maxx - minx) * gn));
          int iy = std::min(
              gn - 1,
              static_cast<int>((coords[2 * i + 1] - miny) / (maxy - miny) * gn));
          if (ix == cx && iy == cy) {
            acc += vals[i];
            ++cnt;
          }
        }
        const std::size_t cell = static_cast<std::size_t>(cy) * gn + cx;
        CHECK(g.count[cell] == cnt);
        if (cnt > 0) CHECK(std::abs(g.mean[cell] - acc / cnt) < 1e-12);
      }
    }
  }
}

TEST_CASE("grid csv: grid_n^2 rows, nan markers for empty cells") {
  const std::vector<double> coords = {0.1, 0.1, 0.9, 0.9};
  const std::vector<double> vals = {1.0, 2.0};
  VarianceGrid g = spatial_variance_grid(coords, 2, vals, 3);
  const fs::path p = tmp_dir() / "grid.csv";
  save_grid_csv(g, p.string(), "unit");
  std::ifstream in(p);
  std::string line;
  int rows = 0, nans = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
    ++rows;
    if (line.find("nan") != std::string::npos) ++nans;
  }
  CHECK(rows == 9);
  CHECK(nans == 7);
}
