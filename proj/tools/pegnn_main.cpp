// pegnn: spatial graph-regression toolkit.
//
// Subcommands: synth, train, sweep, eval. Exit codes: 0 success,
// 2 usage/config error, 3 data error, 4 runtime numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pegnn/checkpoint.hpp"
#include "pegnn/errors.hpp"
#include "pegnn/io_util.hpp"
#include "pegnn/trainer.hpp"
#include "pegnn/version.hpp"

namespace fs = std::filesystem;
using namespace pegnn;

namespace {

void add_config_flags(CLI::App* cmd, TrainConfig& cfg, std::string& op_name) {
  cmd->add_option("--operator", op_name, "Message-passing operator")
      ->check(CLI::IsMember({"gcn", "sage", "transformer", "gat"}))
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "Auxiliary Moran loss weight in [0,1]")
      ->capture_default_str();
  cmd->add_option("--k", cfg.k, "kNN neighbours per node")->capture_default_str();
  cmd->add_option("--n-scales", cfg.n_scales, "Sinusoidal scales (G)")
      ->capture_default_str();
  cmd->add_option("--sigma-min", cfg.sigma_min, "Smallest wavelength")
      ->capture_default_str();
  cmd->add_option("--sigma-max", cfg.sigma_max, "Largest wavelength")
      ->capture_default_str();
  cmd->add_option("--embed-dim", cfg.embed_dim, "Positional embedding width")
      ->capture_default_str();
  cmd->add_option("--hidden-dim", cfg.hidden_dim, "Operator layer width")
      ->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "Minibatch size")
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "Training epochs")
      ->capture_default_str();
  cmd->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
  cmd->add_option("--train-frac", cfg.train_frac, "Training fraction")
      ->capture_default_str();
  cmd->add_option("--test-frac", cfg.test_frac, "Test fraction")
      ->capture_default_str();
  cmd->add_option("--eval-frac", cfg.eval_frac, "Evaluation fraction")
      ->capture_default_str();
  cmd->add_option("--patience", cfg.patience, "Early-stop patience (eval MAE)")
      ->capture_default_str();
  cmd->add_flag("--ablate-pe", cfg.ablate_pe,
                "Replace the positional embedding with zeros (diagnostic)");
  cmd->add_option("--config", "Flat key=value config file; flags win")
      ->expected(1);
}

// Expands `--config <file>` into the equivalent flags, inserted right after
// the subcommand token. Keys already present on the command line are left
// to the flags (flags win); unknown keys are rejected by name.
std::vector<std::string> expand_config_file(const CLI::App& app,
                                            std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const CLI::App* s : app.get_subcommands(nullptr)) {
    if (s->get_name() == args[0]) sub = s;
  }
  if (sub == nullptr) return args;  // parse will report the usage error

  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  auto flag_given = [&](const std::string& name) {
    for (const std::string& a : args)
      if (a == name || a.rfind(name + "=", 0) == 0) return true;
    return false;
  };

  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file '" + path + "' line " +
                        std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t") + 1);
    if (key == "config") {
      throw ConfigError("config file '" + path + "': nested config is not allowed");
    }
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) {
      throw ConfigError("config file '" + path + "' line " +
                        std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (flag_given(flag)) continue;  // command line takes precedence
    if (opt->get_expected_max() == 0) {  // boolean flag
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        injected.push_back(flag);
      } else if (value != "false" && value != "0" && value != "no" &&
                 value != "off") {
        throw ConfigError("config file '" + path + "' line " +
                          std::to_string(line_no) + ": '" + key +
                          "' expects a boolean");
      }
      continue;
    }
    injected.push_back(flag);
    injected.push_back(value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw DataError("cannot create output directory '" + dir + "': " +
                    ec.message());
  }
}

void print_metrics(const char* label, const Metrics& m) {
  std::cout << label << ": mse=" << fmt_fixed(m.mse) << " mae=" << fmt_fixed(m.mae)
            << " mape=" << fmt_fixed(m.mape) << " (n=" << m.n;
  if (m.mape_excluded > 0)
    std::cout << ", mape excluded " << m.mape_excluded << " zero targets";
  std::cout << ")\n";
}

int cmd_synth(int n, std::uint64_t seed, double noise_sd, const std::string& out) {
  if (n < 50) {
    throw ConfigError("synth: --n must be >= 50, got " + std::to_string(n));
  }
  if (noise_sd < 0.0) {
    throw ConfigError("synth: --noise-sd must be >= 0");
  }
  PointSet ps = synth_dataset(n, seed, noise_sd);
  save_csv(ps, out, std::string("pegnn ") + kVersion + " synth seed=" +
                        std::to_string(seed) + " n=" + std::to_string(n) +
                        " noise_sd=" + fmt_double(noise_sd));
  double tmin = ps.target[0], tmax = ps.target[0], tsum = 0.0;
  for (double t : ps.target) {
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    tsum += t;
  }
  std::cout << "wrote " << out << ": n=" << ps.n << " features=" << ps.f
            << " target min/mean/max=" << fmt_fixed(tmin, 3) << "/"
            << fmt_fixed(tsum / ps.n, 3) << "/" << fmt_fixed(tmax, 3) << "\n";
  return 0;
}

int cmd_train(const TrainConfig& cfg, const std::string& data,
              const std::string& out_dir) {
  cfg.validate();
  ensure_out_dir(out_dir);
  PointSet ps = load_csv(data);
  TrainResult res = train_model(ps, cfg);

  save_checkpoint(out_dir + "/checkpoint.json", cfg, res.transform, res.model,
                  res.best_epoch);
  save_epoch_log(res.log, out_dir + "/epoch_log.csv", cfg);
  save_metrics_files(res.eval_metrics, out_dir + "/metrics.txt",
                     out_dir + "/metrics.json", cfg, "log");

  std::cout << "trained " << to_string(cfg.op) << " lambda=" << cfg.lambda
            << " for " << res.epochs_run << " epoch(s), best epoch "
            << res.best_epoch << "\n";
  print_metrics("eval (log scale)", res.eval_metrics);
  return 0;
}

int cmd_sweep(const TrainConfig& base, const std::string& data,
              const std::string& out_dir,
              const std::vector<std::string>& operator_names,
              const std::vector<double>& lambdas, int n_seeds, int threads) {
  base.validate();
  if (n_seeds < 1) throw ConfigError("sweep: --seeds must be >= 1");
  if (threads < 1) throw ConfigError("sweep: --threads must be >= 1");
  std::vector<Operator> ops;
  for (const std::string& name : operator_names)
    ops.push_back(operator_from_string(name));
  for (double l : lambdas) {
    if (l < 0.0 || l > 1.0)
      throw ConfigError("sweep: lambda " + fmt_double(l) + " outside [0, 1]");
  }
  ensure_out_dir(out_dir);
  PointSet ps = load_csv(data);

  std::vector<SweepCell> cells = run_sweep(ps, base, ops, lambdas, n_seeds, threads);
  std::vector<SweepRow> rows = summarize_sweep(cells);
  save_sweep_csv(rows, out_dir + "/sweep_summary.csv", base);

  // Per-cell record, failures included.
  {
    std::ofstream out(out_dir + "/sweep_cells.csv");
    if (!out) throw DataError("cannot write sweep cell file");
    out << "# " << file_header(base) << "\n";
    out << "method,lambda,seed,status,mse,mae,mape,error\n";
    for (const SweepCell& c : cells) {
      out << to_string(c.op) << "," << fmt_double(c.lambda) << "," << c.seed
          << "," << (c.ok ? "ok" : "failed") << ",";
      if (c.ok) {
        out << fmt_double(c.eval.mse) << "," << fmt_double(c.eval.mae) << ","
            << fmt_double(c.eval.mape) << ",";
      } else {
        out << ",,,\"" << c.error << "\"";
      }
      out << "\n";
    }
  }
  std::cout << sweep_table_text(rows);
  int failed = 0;
  for (const SweepCell& c : cells)
    if (!c.ok) ++failed;
  if (failed > 0)
    std::cout << failed << " cell(s) failed; see sweep_cells.csv\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data,
             const std::string& out_dir, int grid_n) {
  if (grid_n < 2) throw ConfigError("eval: --grid-n must be >= 2");
  ensure_out_dir(out_dir);
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  PointSet raw = load_csv(data);

  const int expected_f = static_cast<int>(ck.transform.kept.size() +
                                          ck.transform.dropped_names.size());
  if (raw.f != expected_f) {
    throw DataError("checkpoint/dataset feature mismatch: checkpoint was "
                    "fitted on " +
                    std::to_string(expected_f) + " feature column(s) (" +
                    std::to_string(ck.transform.kept.size()) + " kept), dataset '" +
                    data + "' has " + std::to_string(raw.f));
  }
  for (std::size_t c = 0; c < ck.transform.kept.size(); ++c) {
    const std::string& want = ck.transform.kept_names[c];
    const std::string& got = raw.names[ck.transform.kept[c]];
    if (want != got) {
      throw DataError("checkpoint/dataset feature mismatch: column " +
                      std::to_string(ck.transform.kept[c]) + " is '" + got +
                      "', checkpoint expects '" + want + "'");
    }
  }

  EvalArtifacts art;
  for (int i = 0; i < raw.n; ++i) {
    art.lon.push_back(raw.coords[2 * static_cast<std::size_t>(i)]);
    art.lat.push_back(raw.coords[2 * static_cast<std::size_t>(i) + 1]);
    art.y_true_raw.push_back(raw.target[i]);
  }

  PointSet prepared = raw;
  ck.transform.apply(prepared);
  SplitPrediction pred = predict(ck.model, prepared, ck.config.k);

  art.y_true_log = prepared.target;
  art.y_pred_log = pred.y_pred_log;
  art.moran_pred = pred.moran_pred;
  for (double y : pred.y_pred_log)
    art.y_pred_raw.push_back(ck.transform.invert_target(y));

  save_predictions_csv(art, out_dir + "/predictions_log.csv", false, ck.config);
  save_predictions_csv(art, out_dir + "/predictions_raw.csv", true, ck.config);
  save_scatter_csv(art, out_dir + "/scatter.csv", ck.config);

  VarianceGrid grid_true =
      spatial_variance_grid(raw.coords, raw.n, art.y_true_log, grid_n);
  VarianceGrid grid_pred =
      spatial_variance_grid(raw.coords, raw.n, art.y_pred_log, grid_n);
  save_grid_csv(grid_true, out_dir + "/grid_true.csv", file_header(ck.config));
  save_grid_csv(grid_pred, out_dir + "/grid_pred.csv", file_header(ck.config));

  Metrics m = compute_metrics(art.y_pred_log, art.y_true_log);
  save_metrics_files(m, out_dir + "/metrics.txt", out_dir + "/metrics.json",
                     ck.config, "log");
  print_metrics("metrics (log scale)", m);
  std::cout << "grid cell variance: true=" << fmt_fixed(grid_true.cell_variance())
            << " pred=" << fmt_fixed(grid_pred.cell_variance()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("pegnn ") + kVersion +
               " - positional-encoder GNN toolkit for geographic regression"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
  int synth_n = 2000;
  std::uint64_t synth_seed = 0;
  double synth_noise = 0.1;
  std::string synth_out;
  synth->add_option("--n", synth_n, "Number of points (>= 50)")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--noise-sd", synth_noise, "Log-scale noise sd")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--config", "Flat key=value config file; flags win")
      ->expected(1);

  // train
  auto* train = app.add_subcommand("train", "Train one model");
  TrainConfig train_cfg;
  std::string train_op = "sage";
  std::string train_data, train_out_dir;
  train->add_option("--data", train_data, "Dataset CSV")->required();
  train->add_option("--out-dir", train_out_dir, "Output directory")->required();
  add_config_flags(train, train_cfg, train_op);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Operator x lambda x seed grid");
  TrainConfig sweep_cfg;
  std::string sweep_op = "sage";  // ignored; grid comes from --operators
  std::string sweep_data, sweep_out_dir;
  std::vector<std::string> sweep_ops = {"gcn", "sage", "transformer", "gat"};
  std::vector<double> sweep_lambdas = {0.25, 0.5, 0.75};
  int sweep_seeds = 3;
  int sweep_threads = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--data", sweep_data, "Dataset CSV")->required();
  sweep->add_option("--out-dir", sweep_out_dir, "Output directory")->required();
  sweep->add_option("--operators", sweep_ops, "Operators to sweep")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--lambdas", sweep_lambdas, "Lambda values to sweep")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--seeds", sweep_seeds, "Seeds per cell (base --seed + i)")
      ->capture_default_str();
  sweep->add_option("--threads", sweep_threads, "Worker threads")
      ->capture_default_str();
  add_config_flags(sweep, sweep_cfg, sweep_op);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string eval_ckpt, eval_data, eval_out_dir;
  int eval_grid_n = 16;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint.json path")->required();
  eval->add_option("--data", eval_data, "Dataset CSV")->required();
  eval->add_option("--out-dir", eval_out_dir, "Output directory")->required();
  eval->add_option("--grid-n", eval_grid_n, "Spatial variance grid resolution")
      ->capture_default_str();
  eval->add_option("--config", "Flat key=value config file; flags win")
      ->expected(1);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config_file(app, args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(synth_n, synth_seed, synth_noise, synth_out);
    if (*train) {
      train_cfg.op = operator_from_string(train_op);
      return cmd_train(train_cfg, train_data, train_out_dir);
    }
    if (*sweep) {
      sweep_cfg.op = operator_from_string(sweep_op);
      return cmd_sweep(sweep_cfg, sweep_data, sweep_out_dir, sweep_ops,
                       sweep_lambdas, sweep_seeds, sweep_threads);
    }
    if (*eval) return cmd_eval(eval_ckpt, eval_data, eval_out_dir, eval_grid_n);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
