#include "pegnn/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pegnn/errors.hpp"
#include "pegnn/io_util.hpp"
#include "pegnn/version.hpp"

namespace pegnn {

using nlohmann::json;

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config: " + field + " " + why);
  };
  if (lambda < 0.0 || lambda > 1.0) fail("lambda", "must lie in [0, 1]");
  if (k < 1) fail("k", "must be >= 1");
  if (n_scales < 1) fail("n_scales", "must be >= 1");
  if (!(sigma_min > 0.0)) fail("sigma_min", "must be > 0");
  if (!(sigma_min < sigma_max)) fail("sigma_max", "must exceed sigma_min");
  if (embed_dim < 1) fail("embed_dim", "must be >= 1");
  if (hidden_dim < 1) fail("hidden_dim", "must be >= 1");
  if (batch_size < 2) fail("batch_size", "must be >= 2");
  if (epochs < 1) fail("epochs", "must be >= 1");
  if (!(lr > 0.0)) fail("lr", "must be > 0");
  if (!(train_frac > 0.0)) fail("train_frac", "must be > 0");
  if (!(test_frac > 0.0)) fail("test_frac", "must be > 0");
  if (!(eval_frac > 0.0)) fail("eval_frac", "must be > 0");
  if (std::abs(train_frac + test_frac + eval_frac - 1.0) > 1e-9) {
    fail("split fractions", "must sum to 1");
  }
  if (patience < 1) fail("patience", "must be >= 1");
}

std::string TrainConfig::canonical_string() const {
  std::string s;
  s += "operator=" + to_string(op);
  s += ";lambda=" + fmt_double(lambda);
  s += ";k=" + std::to_string(k);
  s += ";n_scales=" + std::to_string(n_scales);
  s += ";sigma_min=" + fmt_double(sigma_min);
  s += ";sigma_max=" + fmt_double(sigma_max);
  s += ";embed_dim=" + std::to_string(embed_dim);
  s += ";hidden_dim=" + std::to_string(hidden_dim);
  s += ";batch_size=" + std::to_string(batch_size);
  s += ";epochs=" + std::to_string(epochs);
  s += ";lr=" + fmt_double(lr);
  s += ";seed=" + std::to_string(seed);
  s += ";train_frac=" + fmt_double(train_frac);
  s += ";test_frac=" + fmt_double(test_frac);
  s += ";eval_frac=" + fmt_double(eval_frac);
  s += ";patience=" + std::to_string(patience);
  s += ";ablate_pe=" + std::to_string(ablate_pe ? 1 : 0);
  return s;
}

std::string TrainConfig::hash() const {
  // FNV-1a, 64-bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_string()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string file_header(const TrainConfig& cfg) {
  return std::string("pegnn ") + kVersion + " config=" + cfg.hash() +
         " seed=" + std::to_string(cfg.seed);
}

namespace {

json config_to_json(const TrainConfig& c) {
  return json{{"operator", to_string(c.op)},
              {"lambda", c.lambda},
              {"k", c.k},
              {"n_scales", c.n_scales},
              {"sigma_min", c.sigma_min},
              {"sigma_max", c.sigma_max},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"seed", c.seed},
              {"train_frac", c.train_frac},
              {"test_frac", c.test_frac},
              {"eval_frac", c.eval_frac},
              {"patience", c.patience},
              {"ablate_pe", c.ablate_pe}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.op = operator_from_string(j.at("operator").get<std::string>());
  c.lambda = j.at("lambda").get<double>();
  c.k = j.at("k").get<int>();
  c.n_scales = j.at("n_scales").get<int>();
  c.sigma_min = j.at("sigma_min").get<double>();
  c.sigma_max = j.at("sigma_max").get<double>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.lr = j.at("lr").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.train_frac = j.at("train_frac").get<double>();
  c.test_frac = j.at("test_frac").get<double>();
  c.eval_frac = j.at("eval_frac").get<double>();
  c.patience = j.at("patience").get<int>();
  c.ablate_pe = j.at("ablate_pe").get<bool>();
  return c;
}

json transform_to_json(const TransformRecord& t) {
  return json{{"feat_mean", t.feat_mean},
              {"feat_sd", t.feat_sd},
              {"kept", t.kept},
              {"kept_names", t.kept_names},
              {"dropped_names", t.dropped_names},
              {"coord_min", {t.coord_min[0], t.coord_min[1]}},
              {"coord_max", {t.coord_max[0], t.coord_max[1]}}};
}

TransformRecord transform_from_json(const json& j) {
  TransformRecord t;
  t.feat_mean = j.at("feat_mean").get<std::vector<double>>();
  t.feat_sd = j.at("feat_sd").get<std::vector<double>>();
  t.kept = j.at("kept").get<std::vector<int>>();
  t.kept_names = j.at("kept_names").get<std::vector<std::string>>();
  t.dropped_names = j.at("dropped_names").get<std::vector<std::string>>();
  t.coord_min[0] = j.at("coord_min")[0].get<double>();
  t.coord_min[1] = j.at("coord_min")[1].get<double>();
  t.coord_max[0] = j.at("coord_max")[0].get<double>();
  t.coord_max[1] = j.at("coord_max")[1].get<double>();
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     const TransformRecord& transform, const PeGnnModel& model,
                     int best_epoch) {
  json params = json::object();
  for (const auto& [name, tensor] : model.named_parameters()) {
    params[name] = json{{"rows", tensor.rows()},
                        {"cols", tensor.cols()},
                        {"data", tensor.values()}};
  }
  json j{{"format", "pegnn-checkpoint"},
         {"version", kVersion},
         {"best_epoch", best_epoch},
         {"config", config_to_json(cfg)},
         {"config_hash", cfg.hash()},
         {"transform", transform_to_json(transform)},
         {"params", params}};
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write checkpoint '" + path + "'");
  }
  out << j.dump(1) << "\n";
  if (!out) {
    throw DataError("write failed for checkpoint '" + path + "'");
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open checkpoint '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "pegnn-checkpoint") {
      throw DataError("checkpoint '" + path + "' has unknown format tag");
    }
    LoadedCheckpoint ck;
    ck.config = config_from_json(j.at("config"));
    ck.transform = transform_from_json(j.at("transform"));
    ck.best_epoch = j.at("best_epoch").get<int>();

    const int feature_dim = static_cast<int>(ck.transform.kept.size());
    Rng rng(ck.config.seed);
    ck.model = PeGnnModel::init(ck.config.op, feature_dim, ck.config.embed_dim,
                                ck.config.hidden_dim, ck.config.n_scales,
                                ck.config.sigma_min, ck.config.sigma_max,
                                ck.config.lambda, rng);
    ck.model.ablate_pe = ck.config.ablate_pe;

    const json& params = j.at("params");
    for (auto& [name, tensor] : ck.model.named_parameters()) {
      if (!params.contains(name)) {
        throw DataError("checkpoint '" + path + "' is missing parameter '" +
                        name + "'");
      }
      const json& p = params.at(name);
      if (p.at("rows").get<int>() != tensor.rows() ||
          p.at("cols").get<int>() != tensor.cols()) {
        throw DataError("checkpoint '" + path + "': parameter '" + name +
                        "' has shape " + std::to_string(p.at("rows").get<int>()) +
                        "x" + std::to_string(p.at("cols").get<int>()) +
                        ", model expects " + std::to_string(tensor.rows()) + "x" +
                        std::to_string(tensor.cols()));
      }
      Tensor t = tensor;  // shared handle; writes reach the model
      t.values() = p.at("data").get<std::vector<double>>();
    }
    return ck;
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path + "' is malformed: " + e.what());
  }
}

void save_metrics_files(const Metrics& m, const std::string& txt_path,
                        const std::string& json_path, const TrainConfig& cfg,
                        const std::string& scale_note) {
  {
    std::ofstream out(txt_path);
    if (!out) throw DataError("cannot write metrics file '" + txt_path + "'");
    out << "# " << file_header(cfg) << "\n";
    out << "scale=" << scale_note << "\n";
    out << "mse=" << fmt_double(m.mse) << "\n";
    out << "mae=" << fmt_double(m.mae) << "\n";
    out << "mape=" << fmt_double(m.mape) << "\n";
    out << "n=" << m.n << "\n";
    out << "mape_excluded=" << m.mape_excluded << "\n";
  }
  {
    json j{{"scale", scale_note},  {"mse", m.mse},
           {"mae", m.mae},         {"mape", m.mape},
           {"n", m.n},             {"mape_excluded", m.mape_excluded},
           {"config_hash", cfg.hash()}, {"seed", cfg.seed},
           {"version", kVersion}};
    std::ofstream out(json_path);
    if (!out) throw DataError("cannot write metrics file '" + json_path + "'");
    out << j.dump(1) << "\n";
  }
}

}  // namespace pegnn
