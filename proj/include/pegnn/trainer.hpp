#pragma once

#include <string>
#include <vector>

#include "pegnn/checkpoint.hpp"
#include "pegnn/config.hpp"
#include "pegnn/dataset.hpp"
#include "pegnn/metrics.hpp"
#include "pegnn/model.hpp"

namespace pegnn {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  Metrics test;  // log scale
};

struct TrainResult {
  PeGnnModel model;  // parameters from the best eval-MAE epoch
  TransformRecord transform;
  SplitIndices splits;
  std::vector<EpochLog> log;
  Metrics eval_metrics;  // log scale, best parameters
  int best_epoch = 0;
  int epochs_run = 0;
  int moran_fallbacks = 0;
};

/// The full training protocol on one dataset: split, preprocess, per-epoch
/// shuffled minibatches with per-batch graphs and Moran targets, per-epoch
/// test metrics, early stop on eval MAE.
TrainResult train_model(const PointSet& raw, const TrainConfig& cfg);

struct SplitPrediction {
  std::vector<double> y_pred_log;
  std::vector<double> moran_pred;
};

/// Forward over a prepared (preprocessed) point set as one batch graph.
SplitPrediction predict(const PeGnnModel& model, const PointSet& prepared, int k);

// --- sweep ---

struct SweepCell {
  Operator op = Operator::sage;
  double lambda = 0.5;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Metrics eval;
};

struct SweepRow {
  Operator op = Operator::sage;
  double lambda = 0.5;
  int n_ok = 0;
  int n_failed = 0;
  double mse_mean = 0.0, mse_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
  double mape_mean = 0.0, mape_std = 0.0;
};

/// Runs the operator × λ × seed grid; each cell is an independent
/// train_model call with seed = base.seed + seed_index. Cell failures are
/// recorded and the sweep continues. `threads` caps the worker pool.
std::vector<SweepCell> run_sweep(const PointSet& raw, const TrainConfig& base,
                                 const std::vector<Operator>& operators,
                                 const std::vector<double>& lambdas,
                                 int n_seeds, int threads);

/// One row per (operator, λ): mean ± sample std over succeeded seeds.
std::vector<SweepRow> summarize_sweep(const std::vector<SweepCell>& cells);

// --- artifact writers (External Interfaces) ---

void save_epoch_log(const std::vector<EpochLog>& log, const std::string& path,
                    const TrainConfig& cfg);

struct EvalArtifacts {
  std::vector<double> lon, lat;
  std::vector<double> y_true_log, y_pred_log;
  std::vector<double> y_true_raw, y_pred_raw;
  std::vector<double> moran_pred;
};

void save_predictions_csv(const EvalArtifacts& a, const std::string& path,
                          bool raw_scale, const TrainConfig& cfg);
void save_scatter_csv(const EvalArtifacts& a, const std::string& path,
                      const TrainConfig& cfg);
void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path,
                    const TrainConfig& cfg);
std::string sweep_table_text(const std::vector<SweepRow>& rows);

}  // namespace pegnn
