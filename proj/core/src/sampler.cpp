#include "catwalk/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace catwalk {

std::string_view to_string(GammaMode mode) {
  return mode == GammaMode::unit ? "unit" : "inverse_degree";
}

GammaMode parse_gamma_mode(std::string_view text) {
  if (text == "unit") return GammaMode::unit;
  if (text == "inverse_degree") return GammaMode::inverse_degree;
  throw std::invalid_argument("unknown gamma mode '" + std::string(text) + "'");
}

std::string_view to_string(StepSampling method) {
  return method == StepSampling::categorical ? "categorical" : "sequential";
}

StepSampling parse_step_sampling(std::string_view text) {
  if (text == "categorical") return StepSampling::categorical;
  if (text == "sequential") return StepSampling::sequential;
  throw std::invalid_argument("unknown step sampling method '" + std::string(text) + "'");
}

void SamplerConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (walks_per_node < 1) throw std::invalid_argument("walks_per_node (M) must be >= 1");
  if (walk_length < 1) throw std::invalid_argument("walk_length (m) must be >= 1");
  if (max_edge_size != kUnboundedEdgeSize && max_edge_size < 2) {
    throw std::invalid_argument("max_edge_size (r) must be >= 2 or unbounded");
  }
}

double phi(std::span<const NodeId> e, std::span<const NodeId> e_prev, GammaMode mode,
           const TemporalHypergraph& g) {
  double total = 0.0;
  auto a = e.begin();
  auto b = e_prev.begin();
  while (a != e.end() && b != e_prev.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      if (mode == GammaMode::unit) {
        total += 1.0;
      } else {
        const auto deg = static_cast<double>(g.degree(*a));
        if (deg > 0.0) total += 1.0 / (deg * deg);
      }
      ++a;
      ++b;
    }
  }
  return total;
}

ScoreTable ScoreTable::compute(const TemporalHypergraph& g, const SamplerConfig& config) {
  config.validate();
  ScoreTable table;
  table.alpha_ = config.alpha;
  table.origin_ = g.min_time();
  if (config.alpha * (g.max_time() - g.min_time()) > kMaxExponent) {
    throw std::domain_error("alpha * (t_max - t_min) = " +
                            std::to_string(config.alpha * (g.max_time() - g.min_time())) +
                            " exceeds " + std::to_string(kMaxExponent) +
                            "; rescale alpha to the dataset's time units");
  }
  table.scores_.resize(g.event_count());
  for (EventId e = 0; e < g.event_count(); ++e) {
    auto& s = table.scores_[e];
    const auto nodes = g.nodes(e);
    s.p0 = std::exp(config.alpha * (g.time(e) - table.origin_));
    // Merging the members' incidence lists visits every adjacent predecessor
    // exactly once, however many nodes it shares with e.
    const auto adjacent = g.adjacent_hyperedges_before(nodes, g.time(e), config.candidate_window);
    s.p3.reserve(adjacent.size());
    for (const auto& ref : adjacent) {
      const double w = phi(g.nodes(ref.event), nodes, config.gamma, g);
      s.p3.push_back({ref.event, ref.time, w});
      s.p1 += std::exp(config.alpha * (ref.time - table.origin_));
      s.p2 += std::exp(w);
    }
  }
  return table;
}

SetWalkSampler::SetWalkSampler(const TemporalHypergraph& g, const ScoreTable& scores,
                               SamplerConfig config)
    : g_(g), scores_(scores), config_(config) {
  config_.validate();
  if (scores_.size() != g_.event_count()) {
    throw std::invalid_argument("score table does not match hypergraph");
  }
}

std::vector<Candidate> SetWalkSampler::candidates_after(EventId prev) const {
  const auto& all = scores_[prev].p3;
  if (config_.max_edge_size == kUnboundedEdgeSize) return all;
  std::vector<Candidate> out;
  out.reserve(all.size());
  for (const auto& c : all) {
    if (config_.admits(g_.nodes(c.event).size())) out.push_back(c);
  }
  return out;
}

std::vector<Candidate> SetWalkSampler::candidates_after(std::span<const NodeId> prev,
                                                        Timestamp t_prev) const {
  std::vector<Candidate> out;
  for (const auto& ref : g_.adjacent_hyperedges_before(prev, t_prev, config_.candidate_window)) {
    const auto nodes = g_.nodes(ref.event);
    if (!config_.admits(nodes.size())) continue;
    out.push_back({ref.event, ref.time, phi(nodes, prev, config_.gamma, g_)});
  }
  return out;
}

std::vector<double> SetWalkSampler::transition_probabilities(std::span<const Candidate> candidates,
                                                             Timestamp t_prev) const {
  std::vector<double> p(candidates.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    p[i] = config_.alpha * (candidates[i].time - t_prev) + candidates[i].phi;
    top = std::max(top, p[i]);
  }
  double total = 0.0;
  for (auto& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

std::optional<WalkStep> SetWalkSampler::draw(std::span<const Candidate> candidates,
                                             Timestamp t_prev, std::optional<EventId> prev,
                                             Rng& rng) const {
  if (candidates.empty()) return std::nullopt;
  auto step = [this](const Candidate& c) {
    return WalkStep{c.event, c.time, g_.nodes(c.event)};
  };
  if (candidates.size() == 1) return step(candidates.front());

  if (config_.method == StepSampling::sequential) {
    // Normalizers: precomputed sums when stepping from a stored event with no
    // r-filter, otherwise recomputed over the admissible candidates.
    double p1 = 0.0;
    double p2 = 0.0;
    if (prev && config_.max_edge_size == kUnboundedEdgeSize) {
      p1 = scores_[*prev].p1 * std::exp(-config_.alpha * (t_prev - scores_.origin()));
      p2 = scores_[*prev].p2;
    } else {
      for (const auto& c : candidates) {
        p1 += std::exp(config_.alpha * (c.time - t_prev));
        p2 += std::exp(c.phi);
      }
    }
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
      const double b = rng.uniform();
      const double p = std::exp(config_.alpha * (it->time - t_prev)) / p1 * std::exp(it->phi) / p2;
      if (b < p) return step(*it);
    }
    return std::nullopt;
  }

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) top = std::max(top, config_.alpha * (c.time - t_prev) + c.phi);
  double total = 0.0;
  for (const auto& c : candidates) total += std::exp(config_.alpha * (c.time - t_prev) + c.phi - top);
  double u = rng.uniform() * total;
  for (const auto& c : candidates) {
    u -= std::exp(config_.alpha * (c.time - t_prev) + c.phi - top);
    if (u < 0.0) return step(c);
  }
  return step(candidates.back());
}

std::optional<WalkStep> SetWalkSampler::sample_next(EventId prev, Rng& rng) const {
  if (config_.max_edge_size == kUnboundedEdgeSize) {
    return draw(scores_[prev].p3, g_.time(prev), prev, rng);
  }
  const auto candidates = candidates_after(prev);
  return draw(candidates, g_.time(prev), prev, rng);
}

std::optional<WalkStep> SetWalkSampler::sample_next(std::span<const NodeId> prev,
                                                    Timestamp t_prev, Rng& rng) const {
  const auto candidates = candidates_after(prev, t_prev);
  return draw(candidates, t_prev, std::nullopt, rng);
}

std::optional<WalkStep> SetWalkSampler::sample_first(NodeId seed, Timestamp t0, Rng& rng) const {
  const NodeId self[1] = {seed};
  std::vector<Candidate> candidates;
  const auto history = g_.hyperedges_of_node_before(seed, t0);
  std::size_t first = 0;
  if (config_.candidate_window > 0 && history.size() > config_.candidate_window) {
    first = history.size() - config_.candidate_window;
  }
  candidates.reserve(history.size() - first);
  for (std::size_t i = first; i < history.size(); ++i) {
    const auto nodes = g_.nodes(history[i].event);
    if (!config_.admits(nodes.size())) continue;
    candidates.push_back({history[i].event, history[i].time, phi(nodes, self, config_.gamma, g_)});
  }
  return draw(candidates, t0, std::nullopt, rng);
}

SetWalk SetWalkSampler::sample_setwalk(NodeId seed, Timestamp t0, Rng& rng) const {
  SetWalk walk;
  walk.steps.reserve(config_.walk_length);
  auto step = sample_first(seed, t0, rng);
  while (step) {
    walk.steps.push_back(*step);
    if (walk.steps.size() >= config_.walk_length) break;
    step = sample_next(step->event, rng);
  }
  return walk;
}

std::vector<WalkSet> SetWalkSampler::sample_walksets(std::span<const NodeId> seeds, Timestamp t0,
                                                     std::uint64_t stream) const {
  std::vector<WalkSet> out(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out[i].seed = seeds[i];
    out[i].walks.reserve(config_.walks_per_node);
    for (std::size_t j = 0; j < config_.walks_per_node; ++j) {
      auto rng = Rng::derive(stream, {i, j});
      out[i].walks.push_back(sample_setwalk(seeds[i], t0, rng));
    }
  }
  return out;
}

std::string format_walk(const SetWalk& walk, const TemporalHypergraph& g) {
  std::string line;
  for (std::size_t i = 0; i < walk.steps.size(); ++i) {
    if (i > 0) line += ';';
    const auto& s = walk.steps[i];
    char buf[64];
    if (s.time == std::floor(s.time) && std::fabs(s.time) < 9.0e15) {
      line += std::to_string(static_cast<std::int64_t>(s.time));
    } else {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), s.time);
      (void)ec;
      line.append(buf, ptr);
    }
    line += ':';
    for (std::size_t k = 0; k < s.nodes.size(); ++k) {
      if (k > 0) line += ',';
      line += std::to_string(g.external_id(s.nodes[k]));
    }
  }
  return line;
}

}  // namespace catwalk
