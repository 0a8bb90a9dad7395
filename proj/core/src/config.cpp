#include "catwalk/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace catwalk {

using nlohmann::json;

RunConfig::RunConfig() {
  model.time_scale = 0.0;  // derive from data
  model.hidden = 64;
  model.time_dim = 16;
  model.head_hidden = 64;
}

namespace {

struct Key {
  std::string help;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as(const json& v, std::string_view key) {
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw std::invalid_argument("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::invalid_argument("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + std::string(key) + "' has the wrong type: " +
                                v.dump());
  }
}

#define CW_FIELD(name, type, member, help)                                   \
  {                                                                          \
    name, Key {                                                              \
      help, [](const RunConfig& c) { return json(c.member); },               \
          [](RunConfig& c, const json& v) { c.member = as<type>(v, name); } \
    }                                                                        \
  }

#define CW_ENUM(name, member, parse, help)                                            \
  {                                                                                   \
    name, Key {                                                                       \
      help, [](const RunConfig& c) { return json(std::string(to_string(c.member))); }, \
          [](RunConfig& c, const json& v) { c.member = parse(as<std::string>(v, name)); } \
    }                                                                                 \
  }

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      CW_FIELD("alpha", double, sampler.alpha, "temporal bias per raw time unit (used when alpha_relative < 0)"),
      CW_FIELD("alpha_relative", double, alpha_relative, "alpha times the dataset time span; < 0 disables"),
      CW_FIELD("walks_per_node", std::size_t, sampler.walks_per_node, "M, walks per seed node"),
      CW_FIELD("walk_length", std::size_t, sampler.walk_length, "m, hyperedges per walk"),
      CW_FIELD("max_edge_size", std::size_t, sampler.max_edge_size, "r, largest hyperedge a walk may visit; 0 = unbounded"),
      CW_ENUM("gamma", sampler.gamma, parse_gamma_mode, "node weight in the structural bias: unit | inverse_degree"),
      CW_FIELD("candidate_window", std::size_t, sampler.candidate_window, "most recent events per node scanned per step; 0 = all"),
      CW_ENUM("step_sampling", sampler.method, parse_step_sampling, "categorical | sequential"),
      CW_FIELD("hidden", std::size_t, model.hidden, "identity width and mixer hidden width"),
      CW_FIELD("time_dim", std::size_t, model.time_dim, "time encoding width (>= 2)"),
      CW_FIELD("head_hidden", std::size_t, model.head_hidden, "hidden width of the prediction head"),
      CW_ENUM("identity_pool", model.identity_pool, parse_pool_kind, "hyperedge identity pooling: setmixer | mean"),
      CW_ENUM("final_pool", model.final_pool, parse_pool_kind, "seed hyperedge pooling: setmixer | mean"),
      CW_FIELD("time_encoding", bool, model.time_encoding, "use the learned time encoding"),
      CW_FIELD("time_scale", double, model.time_scale, "divisor of walk time offsets; 0 = mean per-node event gap"),
      CW_FIELD("batch_size", std::size_t, train.batch_size, "positives per batch"),
      CW_FIELD("learning_rate", double, train.learning_rate, "optimizer step size"),
      CW_FIELD("max_epochs", std::size_t, train.max_epochs, "epoch limit"),
      CW_FIELD("patience", std::size_t, train.patience, "epochs without validation AUC gain before stopping"),
      CW_FIELD("dropout", double, train.dropout, "dropout rate during training"),
      CW_FIELD("negative_fraction", double, train.negative_fraction, "share of members replaced in a negative"),
      CW_ENUM("optimizer", train.optimizer, parse_optimizer, "adam | sgd"),
      CW_FIELD("eval_seed", std::uint64_t, train.eval_seed, "seed of evaluation negatives and walks"),
      CW_FIELD("max_train_events", std::size_t, train.max_train_events, "training positives per epoch; 0 = all"),
      CW_FIELD("timing", bool, train.timing, "include wall-times in outputs"),
      CW_ENUM("split_mode", split.mode, parse_split_mode, "transductive | weakly_inductive | strongly_inductive"),
      CW_ENUM("split_boundary", split.boundary, parse_split_boundary, "timestamp | event_quantile"),
      CW_FIELD("train_fraction", double, split.train_fraction, "training share of the time axis"),
      CW_FIELD("mask_fraction", double, split.mask_fraction, "share of nodes hidden in inductive modes"),
      CW_ENUM("ablation", ablation, parse_ablation_mode, "full | r2_walk | no_time_encoding | mean_pool | alpha_zero"),
      CW_FIELD("seed", std::uint64_t, seed, "global seed (split, init, sampling)"),
      CW_FIELD("threads", std::size_t, threads, "worker threads; results do not depend on it"),
  };
  return table;
}

#undef CW_FIELD
#undef CW_ENUM

void apply_object(RunConfig& config, const json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (auto it = obj.find("preset"); it != obj.end()) {
    config = preset_config(as<std::string>(*it, "preset"));
  }
  const auto& table = keys();
  for (const auto& [key, value] : obj.items()) {
    if (key == "preset") continue;
    auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second.set(config, value);
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"default", "contact-primary-school", "contact-high-school", "email-enron", "email-eu",
          "ndc-classes", "ndc-substances", "congress-bills", "tags-ask-ubuntu", "tags-math-sx",
          "threads-ask-ubuntu", "tiny"};
}

RunConfig preset_config(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  if (name == "default") return c;
  if (name == "tiny") {
    c.sampler.walks_per_node = 4;
    c.sampler.walk_length = 2;
    c.model.hidden = 16;
    c.model.time_dim = 4;
    c.model.head_hidden = 16;
    c.train.max_epochs = 3;
    return c;
  }
  // Dataset presets sit at the middle of the tuning grid: M=8, m=3,
  // hidden=64. Sparse, long-range streams get a milder recency bias.
  for (const auto& n : preset_names()) {
    if (n != name) continue;
    c.sampler.walks_per_node = 8;
    c.sampler.walk_length = 3;
    c.model.hidden = 64;
    if (name == "ndc-classes" || name == "ndc-substances" || name == "congress-bills") {
      c.alpha_relative = 5.0;
    }
    return c;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

void apply_json(RunConfig& config, std::string_view json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  apply_object(config, obj);
}

void apply_json_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_json(config, buf.str());
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = std::string(value);
  json obj = json::object();
  obj[std::string(key)] = v;
  apply_object(config, obj);
}

std::string to_json(const RunConfig& config) {
  json obj = json::object();
  obj["preset"] = config.preset;
  for (const auto& [key, k] : keys()) obj[key] = k.get(config);
  return obj.dump();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  out.push_back("preset: named starting point (" + std::to_string(preset_names().size()) + " presets)");
  for (const auto& [key, k] : keys()) out.push_back(key + ": " + k.help);
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_json(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SamplerConfig resolve_sampler(const RunConfig& config, const TemporalHypergraph& g) {
  SamplerConfig s = config.sampler;
  if (config.alpha_relative >= 0.0) {
    const double span = g.max_time() - g.min_time();
    s.alpha = span > 0.0 ? config.alpha_relative / span : 0.0;
  }
  s.validate();
  return s;
}

void propagate(RunConfig& config) {
  config.split.seed = config.seed;
  config.train.seed = config.seed;
  config.model.init_seed = config.seed;
  config.train.threads = config.threads;
}

}  // namespace catwalk
