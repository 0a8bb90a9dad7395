#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace catwalk {

using NodeId = std::uint32_t;
using EventId = std::uint32_t;
using Timestamp = double;

// Raised for malformed dataset text or snapshot bytes.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One timestamped hyperedge. Nodes are kept sorted and duplicate-free.
struct HyperedgeEvent {
  std::vector<NodeId> nodes;
  Timestamp time = 0.0;

  friend bool operator==(const HyperedgeEvent&, const HyperedgeEvent&) = default;
};

// (event index, time) pair returned by the temporal adjacency queries.
struct EventRef {
  EventId event = 0;
  Timestamp time = 0.0;

  friend bool operator==(const EventRef&, const EventRef&) = default;
};

// Immutable stream of hyperedge events, sorted by time (ties keep their
// input order), with a per-node incidence index. Safe to share across
// threads once constructed.
class TemporalHypergraph {
 public:
  TemporalHypergraph() = default;

  // Normalizes each event (sort + dedup), stable-sorts by time and builds the
  // incidence index. node_count of 0 means "one past the largest id seen".
  // external_ids, when given, must have node_count entries.
  static TemporalHypergraph from_events(std::vector<HyperedgeEvent> events,
                                        std::size_t node_count = 0,
                                        std::vector<std::int64_t> external_ids = {});

  std::size_t node_count() const { return node_count_; }
  std::size_t event_count() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::size_t max_edge_size() const { return max_edge_size_; }

  std::span<const HyperedgeEvent> events() const { return events_; }
  const HyperedgeEvent& event(EventId e) const { return events_[e]; }
  Timestamp time(EventId e) const { return events_[e].time; }
  std::span<const NodeId> nodes(EventId e) const { return events_[e].nodes; }

  Timestamp min_time() const { return events_.empty() ? 0.0 : events_.front().time; }
  Timestamp max_time() const { return events_.empty() ? 0.0 : events_.back().time; }

  // Events containing u, in time order.
  std::span<const EventId> incidence(NodeId u) const;
  std::size_t degree(NodeId u) const { return incidence(u).size(); }

  // Original dataset label of a dense node id (identity when ingested from ids).
  std::int64_t external_id(NodeId u) const { return external_ids_[u]; }
  std::span<const std::int64_t> external_ids() const { return external_ids_; }

  // Events e with u in e and time(e) < t, time-sorted.
  std::vector<EventRef> hyperedges_of_node_before(NodeId u, Timestamp t) const;

  // Events e' with time(e') < t sharing at least one node with `nodes`,
  // deduplicated and time-sorted. With window > 0 only the `window` most
  // recent qualifying events of each member node are considered.
  std::vector<EventRef> adjacent_hyperedges_before(std::span<const NodeId> nodes, Timestamp t,
                                                   std::size_t window = 0) const;

  // Sub-stream made of the listed events (same node id space and labels).
  TemporalHypergraph subgraph(std::span<const EventId> keep) const;

 private:
  std::vector<HyperedgeEvent> events_;
  std::size_t node_count_ = 0;
  std::size_t max_edge_size_ = 0;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<EventId> incidence_;
  std::vector<Timestamp> incidence_times_;
  std::vector<std::int64_t> external_ids_;
};

// Parses the three-stream nverts/simplices/times layout. External node ids are
// remapped densely in ascending order of their labels.
TemporalHypergraph ingest_benson(std::string_view nverts_text, std::string_view simplices_text,
                                 std::string_view times_text);

// Reads <prefix>-nverts.txt, <prefix>-simplices.txt and <prefix>-times.txt.
TemporalHypergraph ingest_benson_files(const std::string& prefix);

struct BensonText {
  std::string nverts;
  std::string simplices;
  std::string times;
};

// Inverse of ingest_benson, writing external labels.
BensonText to_benson(const TemporalHypergraph& g);

// Versioned little-endian binary snapshot.
void write_snapshot(const TemporalHypergraph& g, std::ostream& out);
TemporalHypergraph read_snapshot(std::istream& in);
void save_snapshot(const TemporalHypergraph& g, const std::string& path);
TemporalHypergraph load_snapshot(const std::string& path);

inline constexpr std::size_t kDefaultProjectionCap = 100000;

// Unweighted r-projection: events with more than r nodes are replaced by all
// of their size-r subsets at the same timestamp. r = 2 is the clique expansion.
TemporalHypergraph project(const TemporalHypergraph& g, std::size_t r,
                           std::size_t cap_per_event = kDefaultProjectionCap);

// Number of k-subsets of an n-set, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace catwalk
