// catwalk: command-line front end for ingest, sampling, training, evaluation,
// ablations, node classification and the scalability benchmark.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "catwalk/anonymizer.hpp"
#include "catwalk/config.hpp"
#include "catwalk/hypergraph.hpp"
#include "catwalk/model.hpp"
#include "catwalk/node_classification.hpp"
#include "catwalk/parallel.hpp"
#include "catwalk/sampler.hpp"
#include "catwalk/split.hpp"
#include "catwalk/synthetic.hpp"
#include "catwalk/training.hpp"
#include "json.hpp"

namespace {

using namespace catwalk;
using nlohmann::json;

constexpr int kMetricsSchema = 1;

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string preset;
  std::string config_file;
  std::vector<std::string> settings;
};

struct DataArgs {
  std::string snapshot;
  std::string dataset;  // three-file prefix
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Global seed");
  cmd->add_option("--threads", c.threads, "Worker threads (results do not depend on it)");
  cmd->add_option("--preset", c.preset, "Named preset applied before the config file");
  cmd->add_option("--config", c.config_file, "JSON config file (flat keys)");
  cmd->add_option("--set", c.settings, "Override one key: key=value (repeatable)");
}

void add_data(CLI::App* cmd, DataArgs& d) {
  auto* snap = cmd->add_option("--snapshot", d.snapshot, "Binary snapshot from 'ingest'");
  auto* data = cmd->add_option("--dataset", d.dataset,
                               "Dataset prefix: reads <prefix>-{nverts,simplices,times}.txt");
  snap->excludes(data);
}

RunConfig effective_config(const Common& c) {
  RunConfig config = preset_config(c.preset.empty() ? "default" : c.preset);
  if (!c.config_file.empty()) apply_json_file(config, c.config_file);
  for (const auto& kv : c.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) config.seed = *c.seed;
  if (c.threads) config.threads = *c.threads;
  propagate(config);
  return config;
}

TemporalHypergraph load_graph(const DataArgs& d) {
  if (!d.snapshot.empty()) return load_snapshot(d.snapshot);
  if (!d.dataset.empty()) return ingest_benson_files(d.dataset);
  throw std::invalid_argument("one of --snapshot or --dataset is required");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

json report_json(const EvalReport& r) {
  return {{"auc", r.auc}, {"ap", r.ap}, {"n_pos", r.n_pos}, {"n_neg", r.n_neg},
          {"split_mode", std::string(to_string(r.mode))}};
}

json metrics_header(const char* command, const RunConfig& config) {
  return {{"schema_version", kMetricsSchema},
          {"command", command},
          {"config_hash", config_hash(config)},
          {"seed", config.seed},
          {"config", json::parse(to_json(config))}};
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::vector<NodeId> parse_node_list(const std::string& text, const TemporalHypergraph& g) {
  std::vector<NodeId> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long long label = 0;
    try {
      label = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw std::invalid_argument("bad node label '" + tok + "'");
    const auto labels = g.external_ids();
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw std::invalid_argument("unknown node " + tok);
    out.push_back(static_cast<NodeId>(it - labels.begin()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw std::invalid_argument("--nodes is empty");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || v <= 0) {
      throw std::invalid_argument("invalid size '" + tok + "': sizes must be positive integers");
    }
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw std::invalid_argument("size list is empty");
  return sizes;
}

// --- commands --------------------------------------------------------------

int cmd_ingest(const DataArgs& data, const std::string& out, const Common& common) {
  (void)effective_config(common);
  const auto g = load_graph(data);
  save_snapshot(g, out);
  json info = {{"events", g.event_count()},
               {"nodes", g.node_count()},
               {"max_edge_size", g.max_edge_size()},
               {"t_min", g.min_time()},
               {"t_max", g.max_time()},
               {"snapshot", out}};
  std::cout << info.dump() << '\n';
  return 0;
}

int cmd_sample(const DataArgs& data, const Common& common, const std::string& nodes_text,
               std::optional<std::size_t> event, std::optional<double> time, bool identities) {
  const auto config = effective_config(common);
  const auto g = load_graph(data);
  if (g.empty()) throw std::invalid_argument("dataset has no events");
  std::vector<NodeId> seeds;
  Timestamp t0 = std::numeric_limits<double>::infinity();
  if (event) {
    if (*event >= g.event_count()) throw std::invalid_argument("--event out of range");
    const auto ns = g.nodes(static_cast<EventId>(*event));
    seeds.assign(ns.begin(), ns.end());
    t0 = g.time(static_cast<EventId>(*event));
  } else if (!nodes_text.empty()) {
    seeds = parse_node_list(nodes_text, g);
  } else {
    throw std::invalid_argument("one of --nodes or --event is required");
  }
  if (time) t0 = *time;
  const auto sampler_config = resolve_sampler(config, g);
  const auto scores = ScoreTable::compute(g, sampler_config);
  const SetWalkSampler sampler(g, scores, sampler_config);
  const auto walksets = sampler.sample_walksets(seeds, t0, config.seed);
  if (identities) {
    const std::size_t k_max = std::max(seeds.size(), g.max_edge_size());
    std::cout << dump_identities(collect_identities(walksets, k_max, sampler_config.walk_length), g);
    return 0;
  }
  for (const auto& ws : walksets) {
    std::cout << "# seed " << g.external_id(ws.seed) << '\n';
    for (const auto& walk : ws.walks) std::cout << format_walk(walk, g) << '\n';
  }
  return 0;
}

struct Prepared {
  TemporalHypergraph graph;
  DatasetSplit split;
  SamplerConfig sampler;
};

Prepared prepare(const DataArgs& data, const RunConfig& config) {
  Prepared p{load_graph(data), {}, {}};
  p.split = split_dataset(p.graph, config.split);
  p.sampler = resolve_sampler(config, p.graph);
  return p;
}

int cmd_train(const DataArgs& data, const Common& common, const std::string& out,
              const std::string& history_path, const std::string& metrics_path) {
  const auto config = effective_config(common);
  const auto start = std::chrono::steady_clock::now();
  auto p = prepare(data, config);
  HyperedgeTask task(p.graph, p.split, p.sampler, config.ablation);
  auto result = train(task, task.resolve(config.model), config.train);
  const auto val = evaluate(*result.model, task, task.split().val, config.train);
  const auto test = evaluate(*result.model, task, task.split().test, config.train);

  if (!out.empty()) save_checkpoint(*result.model, to_json(config), out);
  if (!history_path.empty()) write_text(history_path, history_csv(result.history, config.train.timing));
  json m = metrics_header("train", config);
  m["split_mode"] = std::string(to_string(config.split.mode));
  m["ablation"] = std::string(to_string(config.ablation));
  m["epochs"] = result.history.size();
  m["best_epoch"] = result.best_epoch;
  m["val"] = report_json(val);
  m["test"] = report_json(test);
  m["auc"] = test.auc;
  m["ap"] = test.ap;
  if (config.train.timing) m["wall_seconds"] = seconds_since(start);
  const auto text = m.dump() + "\n";
  if (!metrics_path.empty()) write_text(metrics_path, text);
  std::cout << text;
  return 0;
}

int cmd_eval(const DataArgs& data, const Common& common, const std::string& checkpoint,
             const std::string& part) {
  auto loaded = load_checkpoint(checkpoint);
  // The checkpoint carries the training config; explicit flags override it.
  RunConfig config;
  apply_json(config, loaded.metadata);
  Common layered = common;
  if (!layered.preset.empty()) config = preset_config(layered.preset);
  if (!layered.config_file.empty()) apply_json_file(config, layered.config_file);
  for (const auto& kv : layered.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects key=value");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) config.seed = *common.seed;
  if (common.threads) config.threads = *common.threads;
  propagate(config);
  if (part != "val" && part != "test") throw std::invalid_argument("--part must be val or test");
  auto p = prepare(data, config);
  HyperedgeTask task(p.graph, p.split, p.sampler, config.ablation);
  const auto& events = part == "val" ? task.split().val : task.split().test;
  const auto report = evaluate(*loaded.model, task, events, config.train);
  json m = metrics_header("eval", config);
  m["part"] = part;
  m["checkpoint"] = checkpoint;
  const json fields = report_json(report);
  for (const auto& [k, v] : fields.items()) m[k] = v;
  std::cout << m.dump() << '\n';
  return 0;
}

int cmd_ablate(const DataArgs& data, const Common& common, const std::string& modes_text) {
  const auto config = effective_config(common);
  auto p = prepare(data, config);
  std::vector<AblationMode> modes;
  std::stringstream ss(modes_text);
  std::string tok;
  while (std::getline(ss, tok, ',')) modes.push_back(parse_ablation_mode(tok));
  if (modes.empty()) throw std::invalid_argument("--modes is empty");
  std::cout << "mode\tauc\tap\tepochs\n";
  json all = metrics_header("ablate", config);
  all["results"] = json::array();
  for (auto mode : modes) {
    const auto r = run_ablation(p.graph, p.split, p.sampler, config.model, config.train, mode);
    char line[160];
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%zu", std::string(to_string(mode)).c_str(),
                  r.test.auc, r.test.ap, r.training.history.size());
    std::cout << line << '\n';
    json row = report_json(r.test);
    row["mode"] = std::string(to_string(mode));
    row["epochs"] = r.training.history.size();
    all["results"].push_back(row);
  }
  std::cout << "# " << all.dump() << '\n';
  return 0;
}

int cmd_bench(const Common& common, const std::string& sizes_text) {
  auto config = effective_config(common);
  const auto sizes = parse_sizes(sizes_text);
  std::cout << "num_events,sampling_seconds,epoch_seconds\n";
  for (std::size_t n : sizes) {
    const auto g = synthetic_stream(n, config.seed);
    const auto sampler_config = resolve_sampler(config, g);
    // Sampling: walk sets for every event of the stream.
    auto t = std::chrono::steady_clock::now();
    const auto scores = ScoreTable::compute(g, sampler_config);
    const SetWalkSampler sampler(g, scores, sampler_config);
    std::vector<std::size_t> walk_count(g.event_count());
    parallel_for(g.event_count(), config.threads, [&](std::size_t e) {
      const auto ws = sampler.sample_walksets(g.nodes(static_cast<EventId>(e)),
                                              g.time(static_cast<EventId>(e)), config.seed + e);
      walk_count[e] = ws.size();
    });
    const double sampling = seconds_since(t);
    // One training epoch without validation.
    auto split_config = config.split;
    split_config.mode = SplitMode::transductive;
    auto split = split_dataset(g, split_config);
    split.val.clear();
    auto train_config = config.train;
    train_config.max_epochs = 1;
    t = std::chrono::steady_clock::now();
    HyperedgeTask task(g, std::move(split), sampler_config, AblationMode::full);
    (void)train(task, task.resolve(config.model), train_config);
    const double epoch = seconds_since(t);
    char line[128];
    std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f", n, sampling, epoch);
    std::cout << line << '\n';
  }
  return 0;
}

int cmd_classify(const DataArgs& data, const Common& common, const std::string& labels_path,
                 const std::string& out) {
  const auto config = effective_config(common);
  const auto g = load_graph(data);
  const auto labels = load_labels(labels_path, g);
  auto result = node_classify(g, labels, resolve_sampler(config, g), config.model, config.train);
  for (NodeId u : result.excluded) {
    std::cerr << "catwalk: warning: node " << g.external_id(u)
              << " has no incident hyperedges; excluded\n";
  }
  if (!out.empty()) save_checkpoint(*result.model, to_json(config), out);
  json m = metrics_header("classify", config);
  m["accuracy"] = result.accuracy;
  m["n_train"] = result.n_train;
  m["n_test"] = result.n_test;
  m["classes"] = labels.classes;
  m["excluded"] = result.excluded.size();
  std::cout << m.dump() << '\n';
  return 0;
}

int cmd_config(const Common& common, bool list_keys) {
  if (list_keys) {
    for (const auto& k : config_keys()) std::cout << k << '\n';
    return 0;
  }
  std::cout << json::parse(to_json(effective_config(common))).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catwalk: temporal hypergraph learning with SetWalks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "catwalk 0.1.0");

  Common common;
  DataArgs data;

  auto* ingest = app.add_subcommand("ingest", "Parse a three-file dataset into a binary snapshot");
  std::string ingest_out;
  add_common(ingest, common);
  add_data(ingest, data);
  ingest->add_option("--out", ingest_out, "Snapshot path")->required();

  auto* sample = app.add_subcommand("sample", "Dump SetWalks (or identities) for a seed set");
  add_common(sample, common);
  add_data(sample, data);
  std::string nodes_text;
  std::optional<std::size_t> event;
  std::optional<double> time;
  bool identities = false;
  sample->add_option("--nodes", nodes_text, "Comma-separated node labels");
  sample->add_option("--event", event, "Use the nodes and time of this event index");
  sample->add_option("--time", time, "Query time (walks use strictly earlier events)");
  sample->add_flag("--dump-identities", identities, "Print anonymized identities instead");

  auto* train_cmd = app.add_subcommand("train", "Train a hyperedge predictor");
  add_common(train_cmd, common);
  add_data(train_cmd, data);
  std::string ckpt_out, history_path, metrics_path;
  train_cmd->add_option("--out", ckpt_out, "Checkpoint path");
  train_cmd->add_option("--history", history_path, "Per-epoch CSV");
  train_cmd->add_option("--metrics", metrics_path, "Metrics JSON path (also printed)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval_cmd, common);
  add_data(eval_cmd, data);
  std::string ckpt_in, part = "test";
  eval_cmd->add_option("--checkpoint", ckpt_in, "Checkpoint from 'train'")->required();
  eval_cmd->add_option("--part", part, "val | test");

  auto* ablate = app.add_subcommand("ablate", "Train and test several ablation modes");
  add_common(ablate, common);
  add_data(ablate, data);
  std::string modes = "full,r2_walk,no_time_encoding,mean_pool,alpha_zero";
  ablate->add_option("--modes", modes, "Comma-separated modes");

  auto* bench = app.add_subcommand("bench", "Sampling and one-epoch wall-times on synthetic streams");
  add_common(bench, common);
  std::string sizes = "10000,20000";
  bench->add_option("--sizes", sizes, "Comma-separated event counts");

  auto* classify = app.add_subcommand("classify", "Node classification from a label file");
  add_common(classify, common);
  add_data(classify, data);
  std::string labels_path, classify_out;
  classify->add_option("--labels", labels_path, "node<TAB>label lines")->required();
  classify->add_option("--out", classify_out, "Checkpoint path");

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
  add_common(config_cmd, common);
  bool list_keys = false;
  config_cmd->add_flag("--keys", list_keys, "List every key with its meaning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) return cmd_ingest(data, ingest_out, common);
    if (*sample) return cmd_sample(data, common, nodes_text, event, time, identities);
    if (*train_cmd) return cmd_train(data, common, ckpt_out, history_path, metrics_path);
    if (*eval_cmd) return cmd_eval(data, common, ckpt_in, part);
    if (*ablate) return cmd_ablate(data, common, modes);
    if (*bench) return cmd_bench(common, sizes);
    if (*classify) return cmd_classify(data, common, labels_path, classify_out);
    if (*config_cmd) return cmd_config(common, list_keys);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "catwalk: error: " << msg << '\n';
    return 1;
  }
  return 1;
}
