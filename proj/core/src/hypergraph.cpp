#include "catwalk/hypergraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace catwalk {
namespace {

struct Token {
  std::string_view text;
  std::size_t line = 0;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r' &&
             text[j] != '\n') {
        ++j;
      }
      out.push_back({text.substr(i, j - i), line});
      i = j;
    }
  }
  return out;
}

std::int64_t parse_integer(const Token& tok, std::string_view stream) {
  std::int64_t value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw FormatError(std::string(stream) + " line " + std::to_string(tok.line) +
                      ": not an integer: '" + std::string(tok.text) + "'");
  }
  return value;
}

double parse_time(const Token& tok) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw FormatError("times line " + std::to_string(tok.line) + ": not a number: '" +
                      std::string(tok.text) + "'");
  }
  if (value < 0.0) {
    throw FormatError("times line " + std::to_string(tok.line) + ": negative timestamp");
  }
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_time(Timestamp t) {
  if (t == std::floor(t) && std::fabs(t) < 9.0e15) {
    return std::to_string(static_cast<std::int64_t>(t));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), t);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

TemporalHypergraph TemporalHypergraph::from_events(std::vector<HyperedgeEvent> events,
                                                   std::size_t node_count,
                                                   std::vector<std::int64_t> external_ids) {
  std::size_t max_id_plus_one = 0;
  for (auto& ev : events) {
    if (ev.nodes.empty()) throw std::invalid_argument("hyperedge event with no nodes");
    if (!std::isfinite(ev.time)) throw std::invalid_argument("non-finite timestamp");
    std::sort(ev.nodes.begin(), ev.nodes.end());
    ev.nodes.erase(std::unique(ev.nodes.begin(), ev.nodes.end()), ev.nodes.end());
    max_id_plus_one = std::max<std::size_t>(max_id_plus_one, ev.nodes.back() + std::size_t{1});
  }
  if (node_count == 0) node_count = max_id_plus_one;
  if (max_id_plus_one > node_count) {
    throw std::invalid_argument("node id exceeds node_count");
  }
  if (events.size() > std::numeric_limits<EventId>::max()) {
    throw std::invalid_argument("too many events");
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const HyperedgeEvent& a, const HyperedgeEvent& b) { return a.time < b.time; });

  TemporalHypergraph g;
  g.node_count_ = node_count;
  g.events_ = std::move(events);
  if (external_ids.empty()) {
    external_ids.resize(node_count);
    std::iota(external_ids.begin(), external_ids.end(), std::int64_t{0});
  } else if (external_ids.size() != node_count) {
    throw std::invalid_argument("external id table size differs from node_count");
  }
  g.external_ids_ = std::move(external_ids);

  g.incidence_offsets_.assign(node_count + 1, 0);
  for (const auto& ev : g.events_) {
    g.max_edge_size_ = std::max(g.max_edge_size_, ev.nodes.size());
    for (NodeId u : ev.nodes) ++g.incidence_offsets_[u + 1];
  }
  std::partial_sum(g.incidence_offsets_.begin(), g.incidence_offsets_.end(),
                   g.incidence_offsets_.begin());
  g.incidence_.resize(g.incidence_offsets_.back());
  g.incidence_times_.resize(g.incidence_offsets_.back());
  std::vector<std::size_t> cursor(g.incidence_offsets_.begin(), g.incidence_offsets_.end() - 1);
  for (EventId e = 0; e < g.events_.size(); ++e) {
    for (NodeId u : g.events_[e].nodes) {
      g.incidence_[cursor[u]] = e;
      g.incidence_times_[cursor[u]] = g.events_[e].time;
      ++cursor[u];
    }
  }
  return g;
}

std::span<const EventId> TemporalHypergraph::incidence(NodeId u) const {
  if (u >= node_count_) return {};
  const auto begin = incidence_offsets_[u];
  return {incidence_.data() + begin, incidence_offsets_[u + 1] - begin};
}

std::vector<EventRef> TemporalHypergraph::hyperedges_of_node_before(NodeId u, Timestamp t) const {
  std::vector<EventRef> out;
  if (u >= node_count_) return out;
  const auto begin = incidence_offsets_[u];
  const auto end = incidence_offsets_[u + 1];
  const auto* tb = incidence_times_.data() + begin;
  const auto n = static_cast<std::size_t>(std::lower_bound(tb, tb + (end - begin), t) - tb);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({incidence_[begin + i], tb[i]});
  return out;
}

std::vector<EventRef> TemporalHypergraph::adjacent_hyperedges_before(std::span<const NodeId> nodes,
                                                                     Timestamp t,
                                                                     std::size_t window) const {
  std::vector<EventId> ids;
  for (NodeId u : nodes) {
    if (u >= node_count_) continue;
    const auto begin = incidence_offsets_[u];
    const auto end = incidence_offsets_[u + 1];
    const auto* tb = incidence_times_.data() + begin;
    auto n = static_cast<std::size_t>(std::lower_bound(tb, tb + (end - begin), t) - tb);
    std::size_t first = 0;
    if (window > 0 && n > window) first = n - window;
    ids.insert(ids.end(), incidence_.begin() + static_cast<std::ptrdiff_t>(begin + first),
               incidence_.begin() + static_cast<std::ptrdiff_t>(begin + n));
  }
  // Event ids are assigned in time order, so sorting ids sorts by time.
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<EventRef> out;
  out.reserve(ids.size());
  for (EventId e : ids) out.push_back({e, events_[e].time});
  return out;
}

TemporalHypergraph TemporalHypergraph::subgraph(std::span<const EventId> keep) const {
  std::vector<HyperedgeEvent> events;
  events.reserve(keep.size());
  std::vector<EventId> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  for (EventId e : sorted) events.push_back(events_.at(e));
  return from_events(std::move(events), node_count_, external_ids_);
}

TemporalHypergraph ingest_benson(std::string_view nverts_text, std::string_view simplices_text,
                                 std::string_view times_text) {
  const auto nverts_tok = tokenize(nverts_text);
  const auto simplex_tok = tokenize(simplices_text);
  const auto times_tok = tokenize(times_text);
  if (nverts_tok.size() != times_tok.size()) {
    throw FormatError("length mismatch: " + std::to_string(nverts_tok.size()) +
                      " nverts entries vs " + std::to_string(times_tok.size()) + " times");
  }
  std::vector<std::size_t> sizes;
  sizes.reserve(nverts_tok.size());
  std::size_t total = 0;
  for (const auto& tok : nverts_tok) {
    const auto v = parse_integer(tok, "nverts");
    if (v < 0) throw FormatError("nverts line " + std::to_string(tok.line) + ": negative count");
    sizes.push_back(static_cast<std::size_t>(v));
    total += static_cast<std::size_t>(v);
  }
  if (total != simplex_tok.size()) {
    throw FormatError("length mismatch: nverts sum to " + std::to_string(total) + " but " +
                      std::to_string(simplex_tok.size()) + " simplex entries given");
  }
  std::vector<std::int64_t> raw;
  raw.reserve(simplex_tok.size());
  for (const auto& tok : simplex_tok) raw.push_back(parse_integer(tok, "simplices"));

  std::vector<std::int64_t> labels = raw;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto dense = [&labels](std::int64_t label) {
    return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), label) -
                               labels.begin());
  };

  std::vector<HyperedgeEvent> events;
  events.reserve(sizes.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    HyperedgeEvent ev;
    ev.time = parse_time(times_tok[i]);
    ev.nodes.reserve(sizes[i]);
    for (std::size_t j = 0; j < sizes[i]; ++j) ev.nodes.push_back(dense(raw[cursor++]));
    if (ev.nodes.empty()) {
      throw FormatError("nverts line " + std::to_string(nverts_tok[i].line) + ": empty simplex");
    }
    events.push_back(std::move(ev));
  }
  return TemporalHypergraph::from_events(std::move(events), labels.size(), std::move(labels));
}

TemporalHypergraph ingest_benson_files(const std::string& prefix) {
  return ingest_benson(read_file(prefix + "-nverts.txt"), read_file(prefix + "-simplices.txt"),
                       read_file(prefix + "-times.txt"));
}

BensonText to_benson(const TemporalHypergraph& g) {
  BensonText out;
  for (const auto& ev : g.events()) {
    out.nverts += std::to_string(ev.nodes.size());
    out.nverts += '\n';
    for (NodeId u : ev.nodes) {
      out.simplices += std::to_string(g.external_id(u));
      out.simplices += '\n';
    }
    out.times += format_time(ev.time);
    out.times += '\n';
  }
  return out;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // result * num / i stays exact because result * num is divisible by i.
    if (result > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

TemporalHypergraph project(const TemporalHypergraph& g, std::size_t r, std::size_t cap_per_event) {
  if (r < 2) throw std::invalid_argument("projection order r must be at least 2");
  std::vector<HyperedgeEvent> out;
  out.reserve(g.event_count());
  std::vector<std::size_t> pick;
  for (const auto& ev : g.events()) {
    const std::size_t k = ev.nodes.size();
    if (k <= r) {
      out.push_back(ev);
      continue;
    }
    const std::size_t count = binomial(k, r);
    if (count > cap_per_event) {
      throw std::length_error("projection of a size-" + std::to_string(k) + " hyperedge to r=" +
                              std::to_string(r) + " would emit " + std::to_string(count) +
                              " events (cap " + std::to_string(cap_per_event) + ")");
    }
    // Lexicographic enumeration of r-combinations of positions.
    pick.resize(r);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      HyperedgeEvent sub;
      sub.time = ev.time;
      sub.nodes.reserve(r);
      for (auto p : pick) sub.nodes.push_back(ev.nodes[p]);
      out.push_back(std::move(sub));
      std::size_t i = r;
      while (i > 0 && pick[i - 1] == k - r + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  std::vector<std::int64_t> labels(g.external_ids().begin(), g.external_ids().end());
  return TemporalHypergraph::from_events(std::move(out), g.node_count(), std::move(labels));
}

}  // namespace catwalk
