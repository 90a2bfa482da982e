// Python bindings for the core operations: synthetic data, kNN graphs,
// local Moran's I, sinusoidal coordinate features, splits, metrics, the
// spatial-variance grid, and a whole training run on in-memory arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstring>

#include "pegnn/moran.hpp"
#include "pegnn/trainer.hpp"
#include "pegnn/version.hpp"

namespace py = pybind11;
using namespace pegnn;

namespace {

std::vector<double> coords_vector(const py::array_t<double>& coords) {
  if (coords.ndim() != 2 || coords.shape(1) != 2) {
    throw py::value_error("coords must have shape (n, 2)");
  }
  const auto r = coords.unchecked<2>();
  std::vector<double> out(static_cast<std::size_t>(r.shape(0)) * 2);
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    out[2 * i] = r(i, 0);
    out[2 * i + 1] = r(i, 1);
  }
  return out;
}

std::vector<double> values_vector(const py::array_t<double>& values) {
  if (values.ndim() != 1) {
    throw py::value_error("values must be one-dimensional");
  }
  const auto r = values.unchecked<1>();
  std::vector<double> out(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out[i] = r(i);
  return out;
}

py::array_t<double> to_array_2d(const std::vector<double>& data, int rows,
                                int cols) {
  py::array_t<double> out({rows, cols});
  std::memcpy(out.mutable_data(), data.data(), data.size() * sizeof(double));
  return out;
}

py::array_t<double> to_array_1d(const std::vector<double>& data) {
  py::array_t<double> out(
      std::vector<py::ssize_t>{static_cast<py::ssize_t>(data.size())});
  std::memcpy(out.mutable_data(), data.data(), data.size() * sizeof(double));
  return out;
}

py::array_t<int> to_array_1d_int(const std::vector<int>& data) {
  py::array_t<int> out(
      std::vector<py::ssize_t>{static_cast<py::ssize_t>(data.size())});
  std::memcpy(out.mutable_data(), data.data(), data.size() * sizeof(int));
  return out;
}

PointSet pointset_from_arrays(const py::array_t<double>& coords,
                              const py::array_t<double>& features,
                              const py::array_t<double>& target) {
  PointSet ps;
  ps.coords = coords_vector(coords);
  ps.n = static_cast<int>(ps.coords.size() / 2);
  if (features.ndim() != 2 || features.shape(0) != ps.n) {
    throw py::value_error("features must have shape (n, F)");
  }
  ps.f = static_cast<int>(features.shape(1));
  const auto fr = features.unchecked<2>();
  ps.features.reserve(static_cast<std::size_t>(ps.n) * ps.f);
  for (int i = 0; i < ps.n; ++i)
    for (int j = 0; j < ps.f; ++j) ps.features.push_back(fr(i, j));
  ps.target = values_vector(target);
  if (static_cast<int>(ps.target.size()) != ps.n) {
    throw py::value_error("target length must equal the number of points");
  }
  for (int j = 0; j < ps.f; ++j) ps.names.push_back("f" + std::to_string(j));
  return ps;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["mse"] = m.mse;
  d["mae"] = m.mae;
  d["mape"] = m.mape;
  d["n"] = m.n;
  d["mape_excluded"] = m.mape_excluded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Positional-encoder GNN toolkit: core operations";
  m.attr("__version__") = kVersion;

  m.def(
      "synth_dataset",
      [](int n, std::uint64_t seed, double noise_sd) {
        PointSet ps = synth_dataset(n, seed, noise_sd);
        py::dict d;
        d["coords"] = to_array_2d(ps.coords, ps.n, 2);
        d["features"] = to_array_2d(ps.features, ps.n, ps.f);
        d["target"] = to_array_1d(ps.target);
        return d;
      },
      py::arg("n"), py::arg("seed"), py::arg("noise_sd") = 0.1,
      "Seeded synthetic dataset (coords, features, positive target)");

  m.def(
      "knn_edges",
      [](const py::array_t<double>& coords, int k) {
        const std::vector<double> c = coords_vector(coords);
        SpatialGraph g = knn_graph(c, static_cast<int>(c.size() / 2), k);
        py::array_t<int> edges({static_cast<int>(g.edges.size()), 2});
        auto w = edges.mutable_unchecked<2>();
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          w(e, 0) = g.edges[e].src;
          w(e, 1) = g.edges[e].tgt;
        }
        return edges;
      },
      py::arg("coords"), py::arg("k"),
      "Exact kNN edge list (src, tgt), sorted by (tgt, src)");

  m.def(
      "local_moran",
      [](const py::array_t<double>& y, const py::array_t<double>& coords, int k) {
        const std::vector<double> c = coords_vector(coords);
        SpatialGraph g = knn_graph(c, static_cast<int>(c.size() / 2), k);
        return to_array_1d(local_moran(values_vector(y), g).values);
      },
      py::arg("y"), py::arg("coords"), py::arg("k") = 5,
      "Per-node local Moran's I over a kNN graph (row-standardized weights)");

  m.def(
      "sinusoidal_features",
      [](const py::array_t<double>& coords, int n_scales, double sigma_min,
         double sigma_max) {
        PosEncoderParams p;
        p.n_scales = n_scales;
        p.sigma_min = sigma_min;
        p.sigma_max = sigma_max;
        const std::vector<double> c = coords_vector(coords);
        const int n = static_cast<int>(c.size() / 2);
        return to_array_2d(sinusoidal_features(c, n, p), n, 4 * n_scales);
      },
      py::arg("coords"), py::arg("n_scales") = 16, py::arg("sigma_min") = 0.01,
      py::arg("sigma_max") = 1.0,
      "Multi-scale sin/cos featurization of 2-D coordinates");

  m.def(
      "split_indices",
      [](int n, std::uint64_t seed, double train_frac, double test_frac,
         double eval_frac) {
        SplitIndices idx = split_n(n, {train_frac, test_frac, eval_frac, seed});
        return py::make_tuple(to_array_1d_int(idx.train),
                              to_array_1d_int(idx.test),
                              to_array_1d_int(idx.eval));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("train_frac") = 0.70,
      py::arg("test_frac") = 0.15, py::arg("eval_frac") = 0.15,
      "Seeded disjoint train/test/eval index arrays");

  m.def(
      "metrics",
      [](const py::array_t<double>& y_hat, const py::array_t<double>& y_true) {
        return metrics_dict(
            compute_metrics(values_vector(y_hat), values_vector(y_true)));
      },
      py::arg("y_hat"), py::arg("y_true"),
      "MSE/MAE/MAPE of log-scale predictions");

  m.def(
      "spatial_variance_grid",
      [](const py::array_t<double>& coords, const py::array_t<double>& values,
         int grid_n) {
        const std::vector<double> c = coords_vector(coords);
        VarianceGrid g = spatial_variance_grid(
            c, static_cast<int>(c.size() / 2), values_vector(values), grid_n);
        py::array_t<int> counts({grid_n, grid_n});
        std::memcpy(counts.mutable_data(), g.count.data(),
                    g.count.size() * sizeof(int));
        return py::make_tuple(to_array_2d(g.mean, grid_n, grid_n), counts);
      },
      py::arg("coords"), py::arg("values"), py::arg("grid_n") = 16,
      "Cell means (NaN where empty) and counts over the bounding box");

  m.def(
      "train",
      [](const py::array_t<double>& coords, const py::array_t<double>& features,
         const py::array_t<double>& target, const std::string& operator_name,
         double lam, int k, int embed_dim, int hidden_dim, int n_scales,
         double sigma_min, double sigma_max, int batch_size, int epochs,
         double lr, std::uint64_t seed, double train_frac, double test_frac,
         double eval_frac, int patience, bool ablate_pe) {
        TrainConfig cfg;
        cfg.op = operator_from_string(operator_name);
        cfg.lambda = lam;
        cfg.k = k;
        cfg.embed_dim = embed_dim;
        cfg.hidden_dim = hidden_dim;
        cfg.n_scales = n_scales;
        cfg.sigma_min = sigma_min;
        cfg.sigma_max = sigma_max;
        cfg.batch_size = batch_size;
        cfg.epochs = epochs;
        cfg.lr = lr;
        cfg.seed = seed;
        cfg.train_frac = train_frac;
        cfg.test_frac = test_frac;
        cfg.eval_frac = eval_frac;
        cfg.patience = patience;
        cfg.ablate_pe = ablate_pe;
        PointSet ps = pointset_from_arrays(coords, features, target);
        TrainResult res = train_model(ps, cfg);
        py::dict d;
        d["eval"] = metrics_dict(res.eval_metrics);
        d["best_epoch"] = res.best_epoch;
        d["epochs_run"] = res.epochs_run;
        d["moran_fallbacks"] = res.moran_fallbacks;
        py::list curve;
        for (const EpochLog& e : res.log) {
          py::dict row;
          row["epoch"] = e.epoch;
          row["train_loss"] = e.train_loss;
          row["test_mse"] = e.test.mse;
          row["test_mae"] = e.test.mae;
          row["test_mape"] = e.test.mape;
          curve.append(row);
        }
        d["log"] = curve;
        return d;
      },
      py::arg("coords"), py::arg("features"), py::arg("target"),
      py::arg("operator") = "sage", py::arg("lam") = 0.5, py::arg("k") = 5,
      py::arg("embed_dim") = 64, py::arg("hidden_dim") = 64,
      py::arg("n_scales") = 16, py::arg("sigma_min") = 0.01,
      py::arg("sigma_max") = 1.0, py::arg("batch_size") = 512,
      py::arg("epochs") = 200, py::arg("lr") = 1e-3, py::arg("seed") = 0,
      py::arg("train_frac") = 0.70, py::arg("test_frac") = 0.15,
      py::arg("eval_frac") = 0.15, py::arg("patience") = 20,
      py::arg("ablate_pe") = false,
      "Train a PE-GNN on in-memory arrays; returns eval metrics and the "
      "per-epoch test curve");
}
