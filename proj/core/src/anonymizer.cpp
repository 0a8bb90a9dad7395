#include "catwalk/anonymizer.hpp"

#include <algorithm>
#include <stdexcept>

namespace catwalk {

PositionCount count_positions(NodeId w, const WalkSet& walkset, std::size_t walk_length) {
  PositionCount counts(walk_length, 0);
  for (const auto& walk : walkset.walks) {
    if (walk.size() > walk_length) throw std::invalid_argument("walk longer than walk_length");
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const auto nodes = walk.steps[i].nodes;
      if (std::binary_search(nodes.begin(), nodes.end(), w)) ++counts[i];
    }
  }
  return counts;
}

bool NodeIdentity::is_zero() const {
  return std::all_of(counts.begin(), counts.end(), [](std::uint32_t c) { return c == 0; });
}

NodeIdentity NodeIdentity::canonical() const {
  std::vector<std::size_t> order(rows);
  for (std::size_t r = 0; r < rows; ++r) order[r] = r;
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    const auto ra = row(a);
    const auto rb = row(b);
    return std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end());
  });
  NodeIdentity out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = row(order[r]);
    std::copy(src.begin(), src.end(), out.counts.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return out;
}

bool canonical_less(const NodeIdentity& a, const NodeIdentity& b) {
  return std::lexicographical_compare(a.counts.begin(), a.counts.end(), b.counts.begin(),
                                      b.counts.end());
}

const NodeIdentity& IdentityTable::at(NodeId w) const {
  auto it = table_.find(w);
  return it != table_.end() ? it->second : zero_;
}

std::vector<NodeId> IdentityTable::nodes() const {
  std::vector<NodeId> out;
  out.reserve(table_.size());
  for (const auto& [w, id] : table_) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

NodeIdentity& IdentityTable::slot(NodeId w) {
  auto [it, inserted] = table_.try_emplace(w, k_max_, m_);
  return it->second;
}

IdentityTable collect_identities(std::span<const WalkSet> walksets, std::size_t k_max,
                                 std::size_t walk_length) {
  if (walksets.size() > k_max) {
    throw std::invalid_argument("seed hyperedge has " + std::to_string(walksets.size()) +
                                " nodes but k_max is " + std::to_string(k_max));
  }
  IdentityTable table(k_max, walk_length);
  for (std::size_t j = 0; j < walksets.size(); ++j) {
    for (const auto& walk : walksets[j].walks) {
      if (walk.size() > walk_length) throw std::invalid_argument("walk longer than walk_length");
      for (std::size_t i = 0; i < walk.size(); ++i) {
        // Step node sets are duplicate-free, so each walk adds at most one
        // hit per (node, position).
        for (NodeId w : walk.steps[i].nodes) {
          ++table.slot(w).counts[j * walk_length + i];
        }
      }
    }
  }
  return table;
}

std::vector<NodeId> pooling_order(std::span<const NodeId> members, const IdentityTable& ids) {
  std::vector<std::pair<NodeIdentity, NodeId>> keyed;
  keyed.reserve(members.size());
  for (NodeId w : members) keyed.emplace_back(ids.at(w).canonical(), w);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return canonical_less(b.first, a.first);
  });
  std::vector<NodeId> out;
  out.reserve(keyed.size());
  for (auto& [id, w] : keyed) out.push_back(w);
  return out;
}

HyperedgeBlock assemble_hyperedge_block(std::span<const NodeId> members, const IdentityTable& ids,
                                        const IdentityPooling& psi2, std::size_t d_max,
                                        std::size_t width) {
  if (members.size() > d_max) {
    throw std::invalid_argument("hyperedge of size " + std::to_string(members.size()) +
                                " exceeds d_max " + std::to_string(d_max));
  }
  HyperedgeBlock block{d_max, width, std::vector<double>(d_max * width, 0.0)};
  const auto order = pooling_order(members, ids);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& id = ids.at(order[i]);
    if (id.is_zero()) continue;
    const auto row = psi2(id.canonical());
    if (row.size() != width) throw std::invalid_argument("psi2 output width mismatch");
    std::copy(row.begin(), row.end(), block.data.begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  return block;
}

std::string dump_identities(const IdentityTable& ids, const TemporalHypergraph& g) {
  std::string out;
  for (NodeId w : ids.nodes()) {
    const auto& id = ids.at(w);
    out += std::to_string(g.external_id(w));
    out += '\t';
    for (std::size_t r = 0; r < id.rows; ++r) {
      if (r > 0) out += '|';
      for (std::size_t c = 0; c < id.cols; ++c) {
        if (c > 0) out += ' ';
        out += std::to_string(id.at(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace catwalk
