#include "catwalk/node_classification.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "catwalk/metrics.hpp"
#include "catwalk/parallel.hpp"

namespace catwalk {

NodeLabels parse_labels(std::string_view text, const TemporalHypergraph& g) {
  std::unordered_map<std::int64_t, NodeId> by_label;
  for (NodeId u = 0; u < g.node_count(); ++u) by_label.emplace(g.external_id(u), u);
  std::vector<std::pair<NodeId, std::string>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab + 1 >= line.size()) {
      throw FormatError("labels line " + std::to_string(line_no) + ": expected '<node>\\t<label>'");
    }
    std::int64_t id = 0;
    const auto key = line.substr(0, tab);
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc() || ptr != key.data() + key.size()) {
      throw FormatError("labels line " + std::to_string(line_no) + ": bad node id");
    }
    auto it = by_label.find(id);
    if (it == by_label.end()) {
      throw FormatError("labels line " + std::to_string(line_no) + ": unknown node " +
                        std::to_string(id));
    }
    rows.emplace_back(it->second, std::string(line.substr(tab + 1)));
  }
  std::map<std::string, std::size_t> classes;
  for (const auto& [u, label] : rows) classes.emplace(label, 0);
  NodeLabels out;
  for (auto& [name, index] : classes) {
    index = out.classes.size();
    out.classes.push_back(name);
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw FormatError("node " + std::to_string(g.external_id(rows[i].first)) + " labelled twice");
    }
    out.nodes.push_back(rows[i].first);
    out.labels.push_back(classes.at(rows[i].second));
  }
  return out;
}

NodeLabels load_labels(const std::string& path, const TemporalHypergraph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels(buf.str(), g);
}

std::vector<EventId> node_contexts(const TemporalHypergraph& g, NodeId u, Rng& rng) {
  const auto inc = g.incidence(u);
  if (inc.empty()) return {};
  if (inc.size() >= kMinNodeContexts) return {inc.begin(), inc.end()};
  std::vector<EventId> out;
  out.reserve(kMinNodeContexts);
  for (std::size_t i = 0; i < kMinNodeContexts; ++i) out.push_back(inc[rng.below(inc.size())]);
  return out;
}

namespace {

constexpr std::uint64_t kTagSplit = 0x6e737074;
constexpr std::uint64_t kTagContext = 0x63747874;
constexpr std::uint64_t kTagWalk = 0x77616c6b;
constexpr std::uint64_t kTagDropout = 0x64726f70;
constexpr std::uint64_t kTagEpoch = 0x65706f6368;
constexpr std::uint64_t kTagTest = 0x74657374;

struct Item {
  NodeId node;
  std::size_t label;
  std::vector<EventId> contexts;
};

// Mean of the node's vectors over its context hyperedges, then the head.
// Each context is queried just after its own timestamp, so the hyperedge
// itself is part of the visible history.
Var node_logits(const CatWalkModel& model, const SetWalkSampler& sampler,
                const TemporalHypergraph& g, const Item& item, Tape& tape,
                const ForwardContext& ctx, std::uint64_t base, std::uint64_t round) {
  std::vector<Var> per_context;
  per_context.reserve(item.contexts.size());
  for (std::size_t c = 0; c < item.contexts.size(); ++c) {
    const EventId e = item.contexts[c];
    const auto nodes = g.nodes(e);
    const Timestamp t0 = std::nextafter(g.time(e), std::numeric_limits<double>::infinity());
    const auto stream = Rng::derive(base, {kTagWalk, round, item.node, c}).next();
    const auto walksets = sampler.sample_walksets(nodes, t0, stream);
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), item.node) - nodes.begin());
    const auto vectors = model.node_vectors(tape, walksets, t0, ctx);
    per_context.push_back(vectors[pos]);
  }
  return model.head().forward(tape, tape.average(per_context), ctx);
}

std::size_t argmax(const Matrix& row) {
  return static_cast<std::size_t>(std::max_element(row.data.begin(), row.data.end()) -
                                  row.data.begin());
}

}  // namespace

NodeClassResult node_classify(const TemporalHypergraph& g, const NodeLabels& labels,
                              const SamplerConfig& sampler_config, ModelConfig model_config,
                              const TrainConfig& config, double train_fraction) {
  config.validate();
  sampler_config.validate();
  if (labels.classes.size() < 2) throw std::invalid_argument("need at least two classes");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  NodeClassResult result;
  std::vector<Item> items;
  for (std::size_t i = 0; i < labels.nodes.size(); ++i) {
    const NodeId u = labels.nodes[i];
    auto rng = Rng::derive(config.seed, {kTagContext, u});
    auto contexts = node_contexts(g, u, rng);
    if (contexts.empty()) {
      result.excluded.push_back(u);
      continue;
    }
    items.push_back({u, labels.labels[i], std::move(contexts)});
  }
  if (items.size() < 2) throw std::invalid_argument("fewer than two labelled nodes with history");

  auto split_rng = Rng::derive(config.seed, {kTagSplit});
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[split_rng.below(i)]);
  const std::size_t n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(items.size()))), 1,
      items.size() - 1);
  const std::span<const Item> train_items(items.data(), n_train);
  const std::span<const Item> test_items(items.data() + n_train, items.size() - n_train);
  result.n_train = train_items.size();
  result.n_test = test_items.size();

  const auto scores = ScoreTable::compute(g, sampler_config);
  const SetWalkSampler sampler(g, scores, sampler_config);
  model_config.k_max = g.max_edge_size();
  model_config.d_max = g.max_edge_size();
  model_config.walk_length = sampler_config.walk_length;
  model_config.walks_per_node = sampler_config.walks_per_node;
  model_config.output_dim = labels.classes.size();
  if (!(model_config.time_scale > 0.0)) model_config.time_scale = typical_time_gap(g);
  result.model = std::make_unique<CatWalkModel>(model_config);
  CatWalkModel& model = *result.model;
  ParameterSet& params = model.params();

  auto test_accuracy = [&] {
    std::vector<std::size_t> predicted(test_items.size()), truth(test_items.size());
    parallel_for(test_items.size(), config.threads, [&](std::size_t i) {
      Tape tape(params);
      Var logits = node_logits(model, sampler, g, test_items[i], tape, ForwardContext{},
                               config.eval_seed, kTagTest);
      predicted[i] = argmax(tape.value(logits));
      truth[i] = test_items[i].label;
    });
    return accuracy(predicted, truth);
  };

  Optimizer optimizer(params, config);
  Gradients total(params);
  std::vector<Gradients> item_grads;
  std::vector<double> item_loss;
  std::vector<std::size_t> order(train_items.size());
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto shuffle = Rng::derive(config.seed, {kTagEpoch, epoch});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t n = std::min(order.size(), begin + config.batch_size) - begin;
      while (item_grads.size() < n) item_grads.emplace_back(params);
      item_loss.assign(n, 0.0);
      parallel_for(n, config.threads, [&](std::size_t i) {
        const Item& item = train_items[order[begin + i]];
        auto drop = Rng::derive(config.seed, {kTagDropout, epoch, item.node});
        Tape tape(params);
        const ForwardContext ctx{config.dropout, &drop};
        Var loss = tape.softmax_cross_entropy(
            node_logits(model, sampler, g, item, tape, ctx, config.seed, epoch), item.label);
        item_grads[i].zero();
        tape.backward(loss, item_grads[i]);
        item_loss[i] = tape.value(loss).data[0];
      });
      total.zero();
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        total.add(item_grads[i]);
        batch_loss += item_loss[i];
      }
      total.scale(1.0 / static_cast<double>(n));
      if (!std::isfinite(batch_loss) || !total.all_finite()) {
        throw TrainingDiverged("non-finite loss in node classification at epoch " +
                               std::to_string(epoch));
      }
      loss_sum += batch_loss;
      optimizer.step(params, total);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.val_auc = test_accuracy();
    result.history.push_back(record);
  }
  result.accuracy = test_accuracy();
  return result;
}

}  // namespace catwalk
