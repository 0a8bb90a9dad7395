#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "catwalk/hypergraph.hpp"
#include "catwalk/rng.hpp"

namespace catwalk {

// Hyperedge-dependent node weight Gamma(u, e) used by the structural bias.
enum class GammaMode {
  unit,            // Gamma = 1, phi = |e ∩ e'|
  inverse_degree,  // Gamma = 1 / deg(u), phi = sum 1/deg(u)^2
};

enum class StepSampling {
  categorical,  // exact draw from the normalized transition weights
  sequential,   // per-candidate Bernoulli acceptance in decreasing time order
};

std::string_view to_string(GammaMode mode);
GammaMode parse_gamma_mode(std::string_view text);
std::string_view to_string(StepSampling method);
StepSampling parse_step_sampling(std::string_view text);

inline constexpr std::size_t kUnboundedEdgeSize = 0;

struct SamplerConfig {
  double alpha = 0.0;                     // temporal bias per time unit
  std::size_t walks_per_node = 8;         // M
  std::size_t walk_length = 3;            // m, in hyperedges
  std::size_t max_edge_size = kUnboundedEdgeSize;  // r; 0 means no cap
  GammaMode gamma = GammaMode::unit;
  std::size_t candidate_window = 0;       // per-node recency window; 0 = all
  StepSampling method = StepSampling::categorical;

  void validate() const;
  bool admits(std::size_t edge_size) const {
    return max_edge_size == kUnboundedEdgeSize || edge_size <= max_edge_size;
  }
};

// Structural weight phi(e, e') = sum_{u in e ∩ e'} Gamma(u, e) Gamma(u, e').
// Both inputs must be sorted.
double phi(std::span<const NodeId> e, std::span<const NodeId> e_prev, GammaMode mode,
           const TemporalHypergraph& g);

struct Candidate {
  EventId event = 0;
  Timestamp time = 0.0;
  double phi = 0.0;
};

// Per-event precomputed scores (online score computation). Exponentials are
// taken on min-shifted timestamps.
struct EventScores {
  double p0 = 1.0;  // exp(alpha * t)
  double p1 = 0.0;  // sum over predecessors of exp(alpha * t')
  double p2 = 0.0;  // sum over predecessors of exp(phi)
  std::vector<Candidate> p3;  // adjacent predecessors with their phi, time ascending
};

class ScoreTable {
 public:
  ScoreTable() = default;

  // Throws std::domain_error when alpha * (t_max - t_min) would overflow.
  static ScoreTable compute(const TemporalHypergraph& g, const SamplerConfig& config);

  const EventScores& operator[](EventId e) const { return scores_[e]; }
  std::size_t size() const { return scores_.size(); }
  Timestamp origin() const { return origin_; }
  double alpha() const { return alpha_; }

 private:
  std::vector<EventScores> scores_;
  Timestamp origin_ = 0.0;
  double alpha_ = 0.0;
};

inline constexpr double kMaxExponent = 700.0;

// One hyperedge visit. `nodes` views storage owned by the hypergraph.
struct WalkStep {
  EventId event = 0;
  Timestamp time = 0.0;
  std::span<const NodeId> nodes;
};

struct SetWalk {
  std::vector<WalkStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

struct WalkSet {
  NodeId seed = 0;
  std::vector<SetWalk> walks;
};

// Draws temporal SetWalks. Holds references; the hypergraph and score table
// must outlive the sampler.
class SetWalkSampler {
 public:
  SetWalkSampler(const TemporalHypergraph& g, const ScoreTable& scores, SamplerConfig config);

  const SamplerConfig& config() const { return config_; }
  const TemporalHypergraph& graph() const { return g_; }

  // Next hyperedge after an existing event, from the precomputed candidates.
  std::optional<WalkStep> sample_next(EventId prev, Rng& rng) const;

  // Next hyperedge after an arbitrary node set observed at t_prev.
  std::optional<WalkStep> sample_next(std::span<const NodeId> prev, Timestamp t_prev,
                                      Rng& rng) const;

  // First step: the seed node is treated as the hyperedge {seed} at t0.
  std::optional<WalkStep> sample_first(NodeId seed, Timestamp t0, Rng& rng) const;

  SetWalk sample_setwalk(NodeId seed, Timestamp t0, Rng& rng) const;

  // M walks per seed. Walk j of seed position i uses the stream
  // derive(stream, {i, j}), so results do not depend on call order.
  std::vector<WalkSet> sample_walksets(std::span<const NodeId> seeds, Timestamp t0,
                                       std::uint64_t stream) const;

  // Candidates reachable from an event, with r-filter applied.
  std::vector<Candidate> candidates_after(EventId prev) const;
  std::vector<Candidate> candidates_after(std::span<const NodeId> prev, Timestamp t_prev) const;

  // Normalized transition probabilities over `candidates` (same order).
  std::vector<double> transition_probabilities(std::span<const Candidate> candidates,
                                               Timestamp t_prev) const;

 private:
  std::optional<WalkStep> draw(std::span<const Candidate> candidates, Timestamp t_prev,
                               std::optional<EventId> prev, Rng& rng) const;

  const TemporalHypergraph& g_;
  const ScoreTable& scores_;
  SamplerConfig config_;
};

// Line-oriented walk dump: one walk per line, steps as "t:n1,n2,..." joined
// with ';', node labels are the hypergraph's external ids.
std::string format_walk(const SetWalk& walk, const TemporalHypergraph& g);

}  // namespace catwalk
