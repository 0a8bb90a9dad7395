#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "catwalk/hypergraph.hpp"
#include "catwalk/model.hpp"
#include "catwalk/sampler.hpp"
#include "catwalk/training.hpp"

namespace catwalk {

// Dense node ids with class indices; classes are the distinct label strings
// in ascending order.
struct NodeLabels {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> labels;
  std::vector<std::string> classes;
};

// "<external node id>\t<label>" per line; blank lines are skipped. Unknown
// node ids and malformed lines raise FormatError.
NodeLabels parse_labels(std::string_view text, const TemporalHypergraph& g);
NodeLabels load_labels(const std::string& path, const TemporalHypergraph& g);

inline constexpr std::size_t kMinNodeContexts = 10;

// max{deg(u), 10} incident hyperedges: all of them when deg >= 10, otherwise
// 10 draws with replacement.
std::vector<EventId> node_contexts(const TemporalHypergraph& g, NodeId u, Rng& rng);

struct NodeClassResult {
  std::unique_ptr<CatWalkModel> model;
  std::vector<EpochRecord> history;  // val_auc holds test accuracy
  double accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<NodeId> excluded;  // labelled nodes without incident hyperedges
};

// Encodes each labelled node as the mean of its encodings inside sampled
// incident hyperedges and trains a head with softmax cross-entropy. Nodes
// are split train/test by `train_fraction` with the training seed.
NodeClassResult node_classify(const TemporalHypergraph& g, const NodeLabels& labels,
                              const SamplerConfig& sampler, ModelConfig model,
                              const TrainConfig& config, double train_fraction = 0.7);

}  // namespace catwalk
