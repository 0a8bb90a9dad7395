#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "catwalk/hypergraph.hpp"

namespace catwalk {

enum class SplitMode { transductive, weakly_inductive, strongly_inductive };

// How the 70% training boundary is placed.
enum class SplitBoundary {
  timestamp,       // t_min + fraction * (t_max - t_min)
  event_quantile,  // time of the event at the fraction quantile by count
};

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);
std::string_view to_string(SplitBoundary boundary);
SplitBoundary parse_split_boundary(std::string_view text);

struct SplitConfig {
  SplitMode mode = SplitMode::transductive;
  SplitBoundary boundary = SplitBoundary::timestamp;
  double train_fraction = 0.7;
  double mask_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  SplitMode mode = SplitMode::transductive;
  std::vector<EventId> train;
  std::vector<EventId> val;
  std::vector<EventId> test;
  std::vector<NodeId> masked_nodes;  // sorted; empty for transductive
  Timestamp t_train = 0.0;
  Timestamp t_val_end = 0.0;
};

// Time-based train/val/test split. Train events satisfy t <= t_train, the
// post-train window is halved into val then test. Inductive modes mask a
// random node subset, drop masked train events and keep only val/test events
// touching masked (weakly) or made solely of masked/unseen nodes (strongly).
DatasetSplit split_dataset(const TemporalHypergraph& g, const SplitConfig& config);

// Same as above with an explicit masked-node set (ignored for transductive).
DatasetSplit split_dataset(const TemporalHypergraph& g, const SplitConfig& config,
                           std::vector<NodeId> masked_nodes);

}  // namespace catwalk
