#pragma once

#include <string>

#include "pegnn/config.hpp"
#include "pegnn/dataset.hpp"
#include "pegnn/metrics.hpp"
#include "pegnn/model.hpp"

namespace pegnn {

/// Self-describing JSON container: config echo, fitted transform, and every
/// parameter matrix with a shape header. Doubles use shortest round-trip
/// form, so save → load is bit-exact.
void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     const TransformRecord& transform, const PeGnnModel& model,
                     int best_epoch);

struct LoadedCheckpoint {
  TrainConfig config;
  TransformRecord transform;
  PeGnnModel model;
  int best_epoch = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Flat key=value and JSON metric files (the machine-readable pair).
void save_metrics_files(const Metrics& m, const std::string& txt_path,
                        const std::string& json_path, const TrainConfig& cfg,
                        const std::string& scale_note);

}  // namespace pegnn
