#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "catwalk/hypergraph.hpp"

namespace catwalk {

// Lines of the affine space AG(dimension, 3): 3^d points, every pair of
// points lies on exactly one 3-point line. Lines are sorted node triples.
std::vector<std::vector<NodeId>> affine_lines(std::size_t dimension);

// Stream of `events` hyperedges, each a line of AG(dimension, 3), at times
// 1, 2, .... Every pair of nodes co-occurs equally often, so only the triple
// structure separates real hyperedges from perturbed ones. Lines become
// active in bursts of `burst` consecutive draws.
TemporalHypergraph planted_triples(std::size_t dimension, std::size_t events, std::uint64_t seed,
                                   std::size_t burst = 1);

// Generic benchmark stream: sizes 2..5, node pool growing with the stream
// (one node per `events_per_node` events), members drawn near a drifting
// community center. Times are 1, 2, ....
TemporalHypergraph synthetic_stream(std::size_t events, std::uint64_t seed,
                                    std::size_t events_per_node = 10);

// One hyperedge over `nodes` nodes repeated at times 1..repeats, and its
// pairwise expansion at the same times.
struct ExpansionPair {
  TemporalHypergraph hyper;
  TemporalHypergraph pairwise;
};
ExpansionPair expansion_fixture(std::size_t nodes, std::size_t repeats);

// `classes` groups of `per_class` nodes; every hyperedge stays inside one
// group and group c only forms hyperedges of size 2 + c, so the label is
// visible to identity-free encodings. Labels text maps node to "c<group>".
struct LabelledStream {
  TemporalHypergraph graph;
  std::string labels;
};
LabelledStream planted_communities(std::size_t classes, std::size_t per_class, std::size_t events,
                                   std::uint64_t seed);

}  // namespace catwalk
