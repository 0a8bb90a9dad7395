#include "catwalk/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "catwalk/rng.hpp"

namespace catwalk {

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::transductive: return "transductive";
    case SplitMode::weakly_inductive: return "weakly_inductive";
    case SplitMode::strongly_inductive: return "strongly_inductive";
  }
  return "?";
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "transductive") return SplitMode::transductive;
  if (text == "weakly_inductive" || text == "inductive") return SplitMode::weakly_inductive;
  if (text == "strongly_inductive") return SplitMode::strongly_inductive;
  throw std::invalid_argument("unknown split mode '" + std::string(text) + "'");
}

std::string_view to_string(SplitBoundary boundary) {
  return boundary == SplitBoundary::timestamp ? "timestamp" : "event_quantile";
}

SplitBoundary parse_split_boundary(std::string_view text) {
  if (text == "timestamp") return SplitBoundary::timestamp;
  if (text == "event_quantile") return SplitBoundary::event_quantile;
  throw std::invalid_argument("unknown split boundary '" + std::string(text) + "'");
}

namespace {

std::vector<NodeId> draw_masked_nodes(std::size_t node_count, double fraction, std::uint64_t seed) {
  if (node_count == 0) return {};
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(node_count)));
  count = std::clamp<std::size_t>(count, 1, node_count);
  std::vector<NodeId> ids(node_count);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  auto rng = Rng::derive(seed, {0x6d61736bULL});
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(ids[i], ids[i + rng.below(node_count - i)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

DatasetSplit split_dataset(const TemporalHypergraph& g, const SplitConfig& config) {
  std::vector<NodeId> masked;
  if (config.mode != SplitMode::transductive) {
    masked = draw_masked_nodes(g.node_count(), config.mask_fraction, config.seed);
  }
  return split_dataset(g, config, std::move(masked));
}

DatasetSplit split_dataset(const TemporalHypergraph& g, const SplitConfig& config,
                           std::vector<NodeId> masked_nodes) {
  if (g.empty()) throw std::invalid_argument("cannot split an empty hypergraph");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const auto events = g.events();
  const std::size_t n = events.size();

  DatasetSplit split;
  split.mode = config.mode;
  const Timestamp t_min = g.min_time();
  const Timestamp t_max = g.max_time();
  if (config.boundary == SplitBoundary::timestamp) {
    split.t_train = t_min + config.train_fraction * (t_max - t_min);
    split.t_val_end = 0.5 * (split.t_train + t_max);
  } else {
    auto idx = static_cast<std::size_t>(std::ceil(config.train_fraction * static_cast<double>(n)));
    idx = std::clamp<std::size_t>(idx, 1, n) - 1;
    split.t_train = events[idx].time;
    const auto first_post = static_cast<std::size_t>(
        std::upper_bound(events.begin(), events.end(), split.t_train,
                         [](Timestamp t, const HyperedgeEvent& ev) { return t < ev.time; }) -
        events.begin());
    const std::size_t post = n - first_post;
    split.t_val_end = post == 0 ? t_max : events[first_post + (post + 1) / 2 - 1].time;
  }

  std::vector<char> is_masked(g.node_count(), 0);
  if (config.mode != SplitMode::transductive) {
    std::sort(masked_nodes.begin(), masked_nodes.end());
    masked_nodes.erase(std::unique(masked_nodes.begin(), masked_nodes.end()), masked_nodes.end());
    for (NodeId u : masked_nodes) {
      if (u >= g.node_count()) throw std::invalid_argument("masked node out of range");
      is_masked[u] = 1;
    }
    split.masked_nodes = std::move(masked_nodes);
  }
  auto touches_masked = [&](const HyperedgeEvent& ev) {
    return std::any_of(ev.nodes.begin(), ev.nodes.end(), [&](NodeId u) { return is_masked[u]; });
  };

  for (EventId e = 0; e < n; ++e) {
    if (events[e].time <= split.t_train && !touches_masked(events[e])) split.train.push_back(e);
  }

  std::vector<char> seen(g.node_count(), 0);
  for (EventId e : split.train) {
    for (NodeId u : events[e].nodes) seen[u] = 1;
  }

  for (EventId e = 0; e < n; ++e) {
    const auto& ev = events[e];
    if (ev.time <= split.t_train) continue;
    bool keep = true;
    switch (config.mode) {
      case SplitMode::transductive:
        break;
      case SplitMode::weakly_inductive:
        keep = touches_masked(ev);
        break;
      case SplitMode::strongly_inductive:
        keep = std::all_of(ev.nodes.begin(), ev.nodes.end(),
                           [&](NodeId u) { return is_masked[u] || !seen[u]; });
        break;
    }
    if (!keep) continue;
    (ev.time <= split.t_val_end ? split.val : split.test).push_back(e);
  }

  if (split.train.empty()) throw std::runtime_error("split produced an empty training partition");
  if (split.test.empty()) throw std::runtime_error("split produced an empty test partition");
  return split;
}

}  // namespace catwalk
