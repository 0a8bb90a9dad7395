#include "catwalk/negative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catwalk {

std::size_t HyperedgeSet::Hash::operator()(const std::vector<NodeId>& v) const {
  std::size_t h = 1469598103934665603ULL;
  for (NodeId u : v) {
    h ^= u + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

HyperedgeSet::HyperedgeSet(const TemporalHypergraph& g) {
  for (const auto& ev : g.events()) insert(ev.nodes);
}

void HyperedgeSet::insert(std::span<const NodeId> sorted_nodes) {
  set_.emplace(sorted_nodes.begin(), sorted_nodes.end());
}

bool HyperedgeSet::contains(std::span<const NodeId> sorted_nodes) const {
  return set_.count(std::vector<NodeId>(sorted_nodes.begin(), sorted_nodes.end())) != 0;
}

std::size_t replaced_count(std::size_t k, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("negative fraction must lie in (0, 1]");
  }
  const auto c = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(k) - 1e-12));
  return std::clamp<std::size_t>(c, 1, k);
}

namespace {

bool contains_sorted(const std::vector<NodeId>& v, NodeId u) {
  return std::binary_search(v.begin(), v.end(), u);
}

// Uniform node not in `exclude` (sorted) by rejection.
NodeId draw_outside(const std::vector<NodeId>& exclude, std::size_t node_count, Rng& rng) {
  for (;;) {
    const auto u = static_cast<NodeId>(rng.below(node_count));
    if (!contains_sorted(exclude, u)) return u;
  }
}

}  // namespace

std::vector<NodeId> generate_negative(std::span<const NodeId> e_pos, std::size_t node_count,
                                      const HyperedgeSet& observed, Rng& rng, double fraction,
                                      std::size_t retries) {
  const std::size_t k = e_pos.size();
  if (k == 0) throw std::invalid_argument("positive hyperedge is empty");
  const std::size_t c = replaced_count(k, fraction);
  if (node_count < k + c) {
    throw std::invalid_argument("not enough nodes to perturb a hyperedge of size " +
                                std::to_string(k));
  }
  const std::vector<NodeId> pos(e_pos.begin(), e_pos.end());
  std::vector<std::size_t> slots(k);
  for (std::size_t attempt = 0; attempt < retries; ++attempt) {
    // Partial Fisher-Yates picks which members to drop.
    for (std::size_t i = 0; i < k; ++i) slots[i] = i;
    for (std::size_t i = 0; i < c; ++i) std::swap(slots[i], slots[i + rng.below(k - i)]);
    std::vector<NodeId> neg;
    neg.reserve(k);
    for (std::size_t i = c; i < k; ++i) neg.push_back(pos[slots[i]]);
    std::vector<NodeId> taken = pos;
    for (std::size_t i = 0; i < c; ++i) {
      const NodeId u = draw_outside(taken, node_count, rng);
      taken.insert(std::upper_bound(taken.begin(), taken.end(), u), u);
      neg.push_back(u);
    }
    std::sort(neg.begin(), neg.end());
    if (!observed.contains(neg)) return neg;
  }
  for (std::size_t attempt = 0; attempt < retries; ++attempt) {
    std::vector<NodeId> neg;
    neg.reserve(k);
    while (neg.size() < k) {
      const NodeId u = draw_outside(neg, node_count, rng);
      neg.insert(std::upper_bound(neg.begin(), neg.end(), u), u);
    }
    if (!observed.contains(neg)) return neg;
  }
  throw std::runtime_error("could not draw a negative distinct from every observed hyperedge");
}

}  // namespace catwalk
