#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "catwalk/hypergraph.hpp"

// Layout (all integers little-endian):
//   magic "CWSNAP\0\0" | u32 version | u32 reserved
//   u64 node_count | u64 event_count | u64 member_count
//   event_count x u32 event size
//   member_count x u32 node id
//   event_count x f64 timestamp (IEEE-754 bits as u64)
//   node_count x i64 external label

namespace catwalk {
namespace {

constexpr char kMagic[8] = {'C', 'W', 'S', 'N', 'A', 'P', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw FormatError("snapshot truncated");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

}  // namespace

void write_snapshot(const TemporalHypergraph& g, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, 0);
  std::uint64_t members = 0;
  for (const auto& ev : g.events()) members += ev.nodes.size();
  put<std::uint64_t>(out, g.node_count());
  put<std::uint64_t>(out, g.event_count());
  put<std::uint64_t>(out, members);
  for (const auto& ev : g.events()) put<std::uint32_t>(out, static_cast<std::uint32_t>(ev.nodes.size()));
  for (const auto& ev : g.events()) {
    for (NodeId u : ev.nodes) put<std::uint32_t>(out, u);
  }
  for (const auto& ev : g.events()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(ev.time));
  for (auto label : g.external_ids()) put<std::uint64_t>(out, static_cast<std::uint64_t>(label));
  if (!out) throw std::runtime_error("snapshot write failed");
}

TemporalHypergraph read_snapshot(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a hypergraph snapshot (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version));
  }
  (void)get<std::uint32_t>(in);
  const auto node_count = get<std::uint64_t>(in);
  const auto event_count = get<std::uint64_t>(in);
  const auto members = get<std::uint64_t>(in);

  std::vector<HyperedgeEvent> events(event_count);
  std::uint64_t total = 0;
  for (auto& ev : events) {
    ev.nodes.resize(get<std::uint32_t>(in));
    total += ev.nodes.size();
  }
  if (total != members) throw FormatError("snapshot member count mismatch");
  for (auto& ev : events) {
    for (auto& u : ev.nodes) {
      u = get<std::uint32_t>(in);
      if (u >= node_count) throw FormatError("snapshot node id out of range");
    }
  }
  for (auto& ev : events) ev.time = std::bit_cast<double>(get<std::uint64_t>(in));
  std::vector<std::int64_t> labels(node_count);
  for (auto& label : labels) label = static_cast<std::int64_t>(get<std::uint64_t>(in));
  try {
    return TemporalHypergraph::from_events(std::move(events), node_count, std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid snapshot: ") + e.what());
  }
}

void save_snapshot(const TemporalHypergraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_snapshot(g, out);
}

TemporalHypergraph load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace catwalk
