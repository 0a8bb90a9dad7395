#include "catwalk/synthetic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "catwalk/rng.hpp"

namespace catwalk {

std::vector<std::vector<NodeId>> affine_lines(std::size_t dimension) {
  if (dimension == 0 || dimension > 8) throw std::invalid_argument("dimension must lie in 1..8");
  std::size_t n = 1;
  for (std::size_t i = 0; i < dimension; ++i) n *= 3;
  auto digits = [dimension](std::size_t x) {
    std::vector<std::size_t> d(dimension);
    for (auto& v : d) {
      v = x % 3;
      x /= 3;
    }
    return d;
  };
  auto number = [](const std::vector<std::size_t>& d) {
    std::size_t x = 0;
    for (std::size_t i = d.size(); i-- > 0;) x = 3 * x + d[i];
    return x;
  };
  std::set<std::vector<NodeId>> lines;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      // Third point c = -(a + b) coordinate-wise mod 3.
      const auto da = digits(a), db = digits(b);
      std::vector<std::size_t> dc(dimension);
      for (std::size_t i = 0; i < dimension; ++i) dc[i] = (6 - da[i] - db[i]) % 3;
      std::vector<NodeId> line{static_cast<NodeId>(a), static_cast<NodeId>(b),
                               static_cast<NodeId>(number(dc))};
      std::sort(line.begin(), line.end());
      lines.insert(std::move(line));
    }
  }
  return {lines.begin(), lines.end()};
}

TemporalHypergraph planted_triples(std::size_t dimension, std::size_t events, std::uint64_t seed,
                                   std::size_t burst) {
  const auto lines = affine_lines(dimension);
  if (burst == 0) throw std::invalid_argument("burst must be positive");
  auto rng = Rng::derive(seed, {0x706c616e74});
  std::vector<HyperedgeEvent> out;
  out.reserve(events);
  // Every line appears once before any repeats, so each later hyperedge is a
  // triple that already co-occurred.
  std::vector<std::size_t> order(lines.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t current = 0;
  for (std::size_t i = 0; i < events; ++i) {
    std::size_t pick;
    if (i < order.size()) {
      pick = order[i];
    } else {
      if ((i - order.size()) % burst == 0) current = rng.below(lines.size());
      pick = burst == 1 ? rng.below(lines.size()) : current;
    }
    out.push_back({lines[pick], static_cast<Timestamp>(i + 1)});
  }
  std::size_t n = 1;
  for (std::size_t i = 0; i < dimension; ++i) n *= 3;
  return TemporalHypergraph::from_events(std::move(out), n);
}

TemporalHypergraph synthetic_stream(std::size_t events, std::uint64_t seed,
                                    std::size_t events_per_node) {
  if (events == 0) throw std::invalid_argument("stream must have at least one event");
  if (events_per_node == 0) throw std::invalid_argument("events_per_node must be positive");
  const std::size_t nodes = std::max<std::size_t>(16, events / events_per_node);
  auto rng = Rng::derive(seed, {0x7374726561});
  std::vector<HyperedgeEvent> out;
  out.reserve(events);
  for (std::size_t i = 0; i < events; ++i) {
    const std::size_t size = 2 + rng.below(4);
    // Center drifts across the node range; members come from a window of 12.
    const std::size_t center = (i * nodes) / events;
    HyperedgeEvent ev;
    ev.time = static_cast<Timestamp>(i + 1);
    while (ev.nodes.size() < size) {
      const auto offset = static_cast<std::ptrdiff_t>(rng.below(12)) - 6;
      const auto u = static_cast<std::ptrdiff_t>(center) + offset;
      const auto wrapped = static_cast<NodeId>((u + static_cast<std::ptrdiff_t>(nodes)) %
                                               static_cast<std::ptrdiff_t>(nodes));
      if (std::find(ev.nodes.begin(), ev.nodes.end(), wrapped) == ev.nodes.end()) {
        ev.nodes.push_back(wrapped);
      }
    }
    out.push_back(std::move(ev));
  }
  return TemporalHypergraph::from_events(std::move(out), nodes);
}

ExpansionPair expansion_fixture(std::size_t nodes, std::size_t repeats) {
  if (nodes < 3 || repeats == 0) throw std::invalid_argument("need nodes >= 3 and repeats >= 1");
  std::vector<HyperedgeEvent> hyper, pairwise;
  std::vector<NodeId> all(nodes);
  for (std::size_t i = 0; i < nodes; ++i) all[i] = static_cast<NodeId>(i);
  for (std::size_t t = 1; t <= repeats; ++t) {
    hyper.push_back({all, static_cast<Timestamp>(t)});
    for (NodeId a = 0; a < nodes; ++a) {
      for (NodeId b = a + 1; b < nodes; ++b) pairwise.push_back({{a, b}, static_cast<Timestamp>(t)});
    }
  }
  return {TemporalHypergraph::from_events(std::move(hyper), nodes),
          TemporalHypergraph::from_events(std::move(pairwise), nodes)};
}

LabelledStream planted_communities(std::size_t classes, std::size_t per_class, std::size_t events,
                                   std::uint64_t seed) {
  if (classes < 2 || classes > 6 || per_class < classes + 2 || events == 0) {
    throw std::invalid_argument("need 2..6 classes of >= classes + 2 nodes and >= 1 event");
  }
  auto rng = Rng::derive(seed, {0x636f6d6d});
  std::vector<HyperedgeEvent> out;
  out.reserve(events);
  for (std::size_t i = 0; i < events; ++i) {
    const std::size_t c = rng.below(classes);
    const std::size_t size = 2 + c;
    HyperedgeEvent ev;
    ev.time = static_cast<Timestamp>(i + 1);
    while (ev.nodes.size() < size) {
      const auto u = static_cast<NodeId>(c * per_class + rng.below(per_class));
      if (std::find(ev.nodes.begin(), ev.nodes.end(), u) == ev.nodes.end()) ev.nodes.push_back(u);
    }
    out.push_back(std::move(ev));
  }
  LabelledStream result{TemporalHypergraph::from_events(std::move(out), classes * per_class), {}};
  for (std::size_t u = 0; u < classes * per_class; ++u) {
    result.labels += std::to_string(u) + "\tc" + std::to_string(u / per_class) + "\n";
  }
  return result;
}

}  // namespace catwalk
