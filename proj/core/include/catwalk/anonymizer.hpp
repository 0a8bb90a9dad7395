#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "catwalk/hypergraph.hpp"
#include "catwalk/sampler.hpp"

namespace catwalk {

// counts[i] = number of walks in a walk set whose (i+1)-th hyperedge contains
// the node. Length is the walk length m.
using PositionCount = std::vector<std::uint32_t>;

PositionCount count_positions(NodeId w, const WalkSet& walkset, std::size_t walk_length);

// Relative node identity with respect to a seed hyperedge: row j holds the
// position counts against the walk set of the j-th seed; rows past the seed
// count are zero.
struct NodeIdentity {
  std::size_t rows = 0;  // k_max
  std::size_t cols = 0;  // m
  std::vector<std::uint32_t> counts;  // row-major rows x cols

  NodeIdentity() = default;
  NodeIdentity(std::size_t k_max, std::size_t m) : rows(k_max), cols(m), counts(k_max * m, 0) {}

  std::uint32_t at(std::size_t row, std::size_t col) const { return counts[row * cols + col]; }
  std::span<const std::uint32_t> row(std::size_t r) const { return {counts.data() + r * cols, cols}; }
  bool is_zero() const;

  // Rows sorted in descending lexicographic order (zero rows last). The seed
  // set is unordered, so this is the canonical form fed to pooling.
  NodeIdentity canonical() const;

  friend bool operator==(const NodeIdentity&, const NodeIdentity&) = default;
};

bool canonical_less(const NodeIdentity& a, const NodeIdentity& b);

class IdentityTable {
 public:
  IdentityTable() = default;
  IdentityTable(std::size_t k_max, std::size_t walk_length)
      : k_max_(k_max), m_(walk_length), zero_(k_max, walk_length) {}

  std::size_t k_max() const { return k_max_; }
  std::size_t walk_length() const { return m_; }
  std::size_t size() const { return table_.size(); }
  bool contains(NodeId w) const { return table_.count(w) != 0; }

  // Identity of w; the zero identity for nodes never visited.
  const NodeIdentity& at(NodeId w) const;

  // Visited nodes in ascending id order.
  std::vector<NodeId> nodes() const;

  NodeIdentity& slot(NodeId w);

 private:
  std::size_t k_max_ = 0;
  std::size_t m_ = 0;
  std::unordered_map<NodeId, NodeIdentity> table_;
  NodeIdentity zero_;
};

// Identities of every node on at least one walk of the given walk sets (one
// walk set per seed of e0, in seed order). Throws if there are more walk sets
// than k_max or a walk is longer than walk_length.
IdentityTable collect_identities(std::span<const WalkSet> walksets, std::size_t k_max,
                                 std::size_t walk_length);

// Members of a hyperedge ordered for pooling: by canonical identity,
// descending, so relabeling nodes cannot change the assembled block.
std::vector<NodeId> pooling_order(std::span<const NodeId> members, const IdentityTable& ids);

// Padded per-member block: row i = psi2(identity of the i-th member in pooling
// order), zero for members with a zero identity; rows past |e| are zero.
// Returns d_max x width, row-major.
struct HyperedgeBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

using IdentityPooling = std::function<std::vector<double>(const NodeIdentity&)>;

HyperedgeBlock assemble_hyperedge_block(std::span<const NodeId> members, const IdentityTable& ids,
                                        const IdentityPooling& psi2, std::size_t d_max,
                                        std::size_t width);

// Text dump for golden files: one line per visited node,
// "<label>\t<row0>|<row1>|..." with space-separated counts.
std::string dump_identities(const IdentityTable& ids, const TemporalHypergraph& g);

}  // namespace catwalk
