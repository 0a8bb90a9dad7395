#pragma once

#include <cstddef>
#include <span>
#include <unordered_set>
#include <vector>

#include "catwalk/hypergraph.hpp"
#include "catwalk/rng.hpp"

namespace catwalk {

// Set of sorted node lists, for rejecting negatives equal to a real hyperedge.
class HyperedgeSet {
 public:
  HyperedgeSet() = default;
  explicit HyperedgeSet(const TemporalHypergraph& g);

  void insert(std::span<const NodeId> sorted_nodes);
  bool contains(std::span<const NodeId> sorted_nodes) const;
  std::size_t size() const { return set_.size(); }

 private:
  struct Hash {
    std::size_t operator()(const std::vector<NodeId>& v) const;
  };
  std::unordered_set<std::vector<NodeId>, Hash> set_;
};

inline constexpr std::size_t kNegativeRetries = 64;

// Size-preserving perturbation of e_pos: ceil(fraction * |e_pos|) members are
// swapped for uniform non-members. Retries until the result is not an
// observed hyperedge; after `retries` failures falls back to fully random
// node sets. Result is sorted. Throws std::invalid_argument when
// node_count < |e_pos| + replaced count, std::runtime_error if the fallback
// also fails.
std::vector<NodeId> generate_negative(std::span<const NodeId> e_pos, std::size_t node_count,
                                      const HyperedgeSet& observed, Rng& rng, double fraction,
                                      std::size_t retries = kNegativeRetries);

// Number of replaced members for a hyperedge of size k.
std::size_t replaced_count(std::size_t k, double fraction);

}  // namespace catwalk
