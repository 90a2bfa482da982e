#include "pegnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include "pegnn/errors.hpp"
#include "pegnn/io_util.hpp"
#include "pegnn/moran.hpp"

namespace pegnn {

namespace {

Tensor features_tensor(const PointSet& ps) {
  return Tensor::from_vector(ps.features, ps.n, ps.f);
}

std::vector<std::vector<double>> snapshot_params(const PeGnnModel& model) {
  std::vector<std::vector<double>> snap;
  for (const Tensor& p : model.parameters()) snap.push_back(p.values());
  return snap;
}

void restore_params(PeGnnModel& model, const std::vector<std::vector<double>>& snap) {
  std::vector<Tensor> params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i].values() = snap[i];
}

}  // namespace

SplitPrediction predict(const PeGnnModel& model, const PointSet& prepared, int k) {
  SpatialGraph g = knn_graph(prepared.coords, prepared.n, k);
  Tape tape;
  ForwardResult fwd =
      model_forward(tape, model, features_tensor(prepared), prepared.coords, g);
  SplitPrediction out;
  out.y_pred_log.reserve(prepared.n);
  out.moran_pred.reserve(prepared.n);
  for (int i = 0; i < prepared.n; ++i) {
    out.y_pred_log.push_back(fwd.y_hat.at(i, 0));
    out.moran_pred.push_back(fwd.i_hat.at(i, 0));
  }
  return out;
}

TrainResult train_model(const PointSet& raw, const TrainConfig& cfg) {
  cfg.validate();
  if (raw.preprocessed) {
    throw ContractError("train_model: expected a raw (untransformed) dataset");
  }

  TrainResult res;
  res.splits = split_n(raw.n, {cfg.train_frac, cfg.test_frac, cfg.eval_frac,
                               cfg.seed});
  PointSet prepared = raw;
  res.transform = preprocess(prepared, res.splits.train);

  PointSet train_ps = prepared.subset(res.splits.train);
  PointSet test_ps = prepared.subset(res.splits.test);
  PointSet eval_ps = prepared.subset(res.splits.eval);
  if (train_ps.n < 2) {
    throw ContractError("train_model: training split has fewer than 2 points");
  }

  Rng rng(cfg.seed);
  res.model = PeGnnModel::init(cfg.op, prepared.f, cfg.embed_dim, cfg.hidden_dim,
                               cfg.n_scales, cfg.sigma_min, cfg.sigma_max,
                               cfg.lambda, rng);
  res.model.ablate_pe = cfg.ablate_pe;
  Adam opt(res.model.parameters(), cfg.lr);

  const Tensor train_feats = features_tensor(train_ps);

  double best_mae = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params = snapshot_params(res.model);
  int since_best = 0;

  std::vector<int> order(static_cast<std::size_t>(train_ps.n));
  for (int i = 0; i < train_ps.n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);

    double loss_sum = 0.0;
    int n_batches = 0;
    int pos = 0;
    while (pos < train_ps.n) {
      int take = std::min(cfg.batch_size, train_ps.n - pos);
      // A singleton remainder cannot form a graph; fold it into this batch.
      if (train_ps.n - pos - take == 1) take += 1;

      Batch batch;
      batch.n = take;
      batch.coords.reserve(2 * take);
      batch.y_log.reserve(take);
      std::vector<double> fvals;
      fvals.reserve(static_cast<std::size_t>(take) * train_ps.f);
      for (int b = 0; b < take; ++b) {
        const int i = order[pos + b];
        batch.coords.push_back(train_ps.coords[2 * static_cast<std::size_t>(i)]);
        batch.coords.push_back(train_ps.coords[2 * static_cast<std::size_t>(i) + 1]);
        batch.y_log.push_back(train_ps.target[i]);
        for (int j = 0; j < train_ps.f; ++j)
          fvals.push_back(train_feats.at(i, j));
      }
      batch.features = Tensor::from_vector(std::move(fvals), take, train_ps.f);

      loss_sum += train_step(res.model, batch, opt, cfg.k, &res.moran_fallbacks);
      ++n_batches;
      pos += take;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / n_batches;
    SplitPrediction test_pred = predict(res.model, test_ps, cfg.k);
    entry.test = compute_metrics(test_pred.y_pred_log, test_ps.target);
    res.log.push_back(entry);
    res.epochs_run = epoch + 1;

    SplitPrediction eval_pred = predict(res.model, eval_ps, cfg.k);
    const Metrics eval_now = compute_metrics(eval_pred.y_pred_log, eval_ps.target);
    if (eval_now.mae < best_mae) {
      best_mae = eval_now.mae;
      best_params = snapshot_params(res.model);
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  restore_params(res.model, best_params);
  SplitPrediction eval_pred = predict(res.model, eval_ps, cfg.k);
  res.eval_metrics = compute_metrics(eval_pred.y_pred_log, eval_ps.target);

  if (res.moran_fallbacks > 0) {
    std::cerr << "warning: Moran targets fell back to zero on "
              << res.moran_fallbacks << " constant batch(es)\n";
  }
  return res;
}

std::vector<SweepCell> run_sweep(const PointSet& raw, const TrainConfig& base,
                                 const std::vector<Operator>& operators,
                                 const std::vector<double>& lambdas, int n_seeds,
                                 int threads) {
  if (operators.empty() || lambdas.empty() || n_seeds < 1) {
    throw ContractError("run_sweep: empty operator/lambda/seed grid");
  }
  std::vector<SweepCell> cells;
  for (Operator op : operators)
    for (double lambda : lambdas)
      for (int s = 0; s < n_seeds; ++s) {
        SweepCell c;
        c.op = op;
        c.lambda = lambda;
        c.seed = base.seed + static_cast<std::uint64_t>(s);
        cells.push_back(c);
      }

  auto run_cell = [&](SweepCell& cell) {
    TrainConfig cfg = base;
    cfg.op = cell.op;
    cfg.lambda = cell.lambda;
    cfg.seed = cell.seed;
    try {
      cell.eval = train_model(raw, cfg).eval_metrics;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  if (n_workers == 1) {
    for (SweepCell& cell : cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++)
          run_cell(cells[i]);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return cells;
}

std::vector<SweepRow> summarize_sweep(const std::vector<SweepCell>& cells) {
  std::vector<SweepRow> rows;
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
  };
  // Preserve grid order: cells are laid out operator-major, then lambda.
  for (std::size_t i = 0; i < cells.size();) {
    const Operator op = cells[i].op;
    const double lambda = cells[i].lambda;
    SweepRow row;
    row.op = op;
    row.lambda = lambda;
    std::vector<double> mse, mae, mape;
    while (i < cells.size() && cells[i].op == op && cells[i].lambda == lambda) {
      if (cells[i].ok) {
        mse.push_back(cells[i].eval.mse);
        mae.push_back(cells[i].eval.mae);
        mape.push_back(cells[i].eval.mape);
        ++row.n_ok;
      } else {
        ++row.n_failed;
      }
      ++i;
    }
    if (row.n_ok > 0) {
      mean_std(mse, row.mse_mean, row.mse_std);
      mean_std(mae, row.mae_mean, row.mae_std);
      mean_std(mape, row.mape_mean, row.mape_std);
    }
    rows.push_back(row);
  }
  return rows;
}

void save_epoch_log(const std::vector<EpochLog>& log, const std::string& path,
                    const TrainConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write epoch log '" + path + "'");
  out << "# " << file_header(cfg) << "\n";
  out << "epoch,train_loss,test_mse,test_mae,test_mape\n";
  for (const EpochLog& e : log) {
    out << e.epoch << "," << fmt_double(e.train_loss) << ","
        << fmt_double(e.test.mse) << "," << fmt_double(e.test.mae) << ","
        << fmt_double(e.test.mape) << "\n";
  }
}

void save_predictions_csv(const EvalArtifacts& a, const std::string& path,
                          bool raw_scale, const TrainConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write predictions '" + path + "'");
  out << "# " << file_header(cfg) << "\n";
  out << "# scale=" << (raw_scale ? "raw" : "log") << "\n";
  out << "lon,lat,y_true,y_pred,moran_pred\n";
  for (std::size_t i = 0; i < a.lon.size(); ++i) {
    const double yt = raw_scale ? a.y_true_raw[i] : a.y_true_log[i];
    const double yp = raw_scale ? a.y_pred_raw[i] : a.y_pred_log[i];
    out << fmt_double(a.lon[i]) << "," << fmt_double(a.lat[i]) << ","
        << fmt_double(yt) << "," << fmt_double(yp) << ","
        << fmt_double(a.moran_pred[i]) << "\n";
  }
}

void save_scatter_csv(const EvalArtifacts& a, const std::string& path,
                      const TrainConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scatter data '" + path + "'");
  out << "# " << file_header(cfg) << "\n";
  out << "y_true,y_pred\n";
  for (std::size_t i = 0; i < a.y_true_log.size(); ++i) {
    out << fmt_double(a.y_true_log[i]) << "," << fmt_double(a.y_pred_log[i])
        << "\n";
  }
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path,
                    const TrainConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep summary '" + path + "'");
  out << "# " << file_header(cfg) << "\n";
  out << "method,lambda,n_ok,n_failed,mse_mean,mse_std,mae_mean,mae_std,"
         "mape_mean,mape_std\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.op) << "," << fmt_double(r.lambda) << "," << r.n_ok << ","
        << r.n_failed << "," << fmt_double(r.mse_mean) << ","
        << fmt_double(r.mse_std) << "," << fmt_double(r.mae_mean) << ","
        << fmt_double(r.mae_std) << "," << fmt_double(r.mape_mean) << ","
        << fmt_double(r.mape_std) << "\n";
  }
}

std::string sweep_table_text(const std::vector<SweepRow>& rows) {
  std::string s;
  s += "method        lambda  MSE              MAE              MAPE\n";
  for (const SweepRow& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%-13s %-7g %.4f+/-%.4f  %.4f+/-%.4f  %.4f+/-%.4f%s\n",
                  to_string(r.op).c_str(), r.lambda, r.mse_mean, r.mse_std,
                  r.mae_mean, r.mae_std, r.mape_mean, r.mape_std,
                  r.n_failed > 0 ? "  [failures]" : "");
    s += line;
  }
  return s;
}

}  // namespace pegnn
