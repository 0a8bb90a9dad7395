#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "catwalk/model.hpp"
#include "json.hpp"

// Layout (integers little-endian):
//   magic "CATWCKPT" | u32 version | u32 reserved
//   u64 length + model config JSON
//   u64 length + metadata bytes
//   u64 tensor count, then per tensor:
//     u32 name length + name | u64 rows | u64 cols | rows*cols f64 (bits as u64)

namespace catwalk {
namespace {

constexpr char kMagic[8] = {'C', 'A', 'T', 'W', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("checkpoint truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

void put_string(std::ostream& out, std::string_view s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, std::uint64_t limit = 1ULL << 32) {
  const auto n = get<std::uint64_t>(in);
  if (n > limit) throw FormatError("checkpoint string too long");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw FormatError("checkpoint truncated");
  }
  return s;
}

nlohmann::json config_json(const ModelConfig& c) {
  return {
      {"k_max", c.k_max},
      {"d_max", c.d_max},
      {"walk_length", c.walk_length},
      {"walks_per_node", c.walks_per_node},
      {"hidden", c.hidden},
      {"time_dim", c.time_dim},
      {"head_hidden", c.head_hidden},
      {"output_dim", c.output_dim},
      {"identity_pool", std::string(to_string(c.identity_pool))},
      {"final_pool", std::string(to_string(c.final_pool))},
      {"time_encoding", c.time_encoding},
      {"time_scale", c.time_scale},
      {"init_seed", c.init_seed},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.k_max = j.at("k_max").get<std::size_t>();
  c.d_max = j.at("d_max").get<std::size_t>();
  c.walk_length = j.at("walk_length").get<std::size_t>();
  c.walks_per_node = j.at("walks_per_node").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.time_dim = j.at("time_dim").get<std::size_t>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  c.identity_pool = parse_pool_kind(j.at("identity_pool").get<std::string>());
  c.final_pool = parse_pool_kind(j.at("final_pool").get<std::string>());
  c.time_encoding = j.at("time_encoding").get<bool>();
  c.time_scale = j.at("time_scale").get<double>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_checkpoint(const CatWalkModel& model, std::string_view metadata, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, 0);
  put_string(out, config_json(model.config()).dump());
  put_string(out, metadata);
  const auto params = model.params().all();
  put<std::uint64_t>(out, params.size());
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint64_t>(out, p.value.rows);
    put<std::uint64_t>(out, p.value.cols);
    for (double v : p.value.data) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

void save_checkpoint(const CatWalkModel& model, std::string_view metadata,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_checkpoint(model, metadata, out);
}

LoadedCheckpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a model checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  (void)get<std::uint32_t>(in);
  ModelConfig config;
  try {
    config = config_from_json(nlohmann::json::parse(get_string(in)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint config: ") + e.what());
  }
  LoadedCheckpoint loaded;
  loaded.metadata = get_string(in);
  loaded.model = std::make_unique<CatWalkModel>(config);
  auto& params = loaded.model->params();
  const auto count = get<std::uint64_t>(in);
  if (count != params.size()) throw FormatError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    if (len && !in.read(name.data(), len)) throw FormatError("checkpoint truncated");
    auto& p = params[i];
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (name != p.name || rows != p.value.rows || cols != p.value.cols) {
      throw FormatError("checkpoint tensor '" + name + "' does not match the model layout");
    }
    for (double& v : p.value.data) v = std::bit_cast<double>(get<std::uint64_t>(in));
  }
  return loaded;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

std::string dump_parameters(const ParameterSet& params) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& p : params.all()) {
    out << p.name << ' ' << p.value.rows << 'x' << p.value.cols;
    for (double v : p.value.data) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace catwalk
