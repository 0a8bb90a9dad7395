#include "catwalk/model.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace catwalk {

std::string_view to_string(PoolKind kind) { return kind == PoolKind::setmixer ? "setmixer" : "mean"; }

PoolKind parse_pool_kind(std::string_view text) {
  if (text == "setmixer") return PoolKind::setmixer;
  if (text == "mean") return PoolKind::mean;
  throw std::invalid_argument("unknown pooling kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (k_max == 0 || d_max == 0) throw std::invalid_argument("k_max and d_max must be positive");
  if (walk_length == 0) throw std::invalid_argument("walk_length must be positive");
  if (hidden == 0 || head_hidden == 0 || output_dim == 0) {
    throw std::invalid_argument("model widths must be positive");
  }
  if (time_dim < 2) throw std::invalid_argument("time_dim must be >= 2");
  if (!(time_scale > 0.0)) throw std::invalid_argument("time_scale must be positive");
}

CatWalkModel::CatWalkModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  auto rng = Rng::derive(config_.init_seed, {0x696e6974ULL});
  const std::size_t h = config_.hidden;
  psi2_ = SetMixerLayer::create(params_, "psi2", config_.walk_length, h, h, rng);
  psi1_ = SetMixerLayer::create(params_, "psi1", h, h, h, rng);
  time_ = TimeEncoderLayer::create(params_, "time", config_.time_dim, rng);
  mixer_ = WalkMixerLayer::create(params_, "walk_mixer", config_.walk_length, config_.walk_dim(), h,
                                  h, rng);
  final_ = SetMixerLayer::create(params_, "final_pool", config_.walk_dim(), config_.walk_dim(), h,
                                 rng);
  head_ = HeadLayer::create(params_, "head", config_.walk_dim(), config_.head_hidden,
                            config_.output_dim, rng);
}

namespace {

// Memo tables for one seed hyperedge: identities are relative to e0, so a
// hyperedge seen in several walks is encoded once.
struct EncodingScratch {
  IdentityTable ids;
  std::map<std::vector<std::uint32_t>, Var> psi2_by_identity;
  std::unordered_map<EventId, Var> edge_identity;
};

}  // namespace

std::vector<Var> CatWalkModel::node_vectors(Tape& tape, std::span<const WalkSet> walksets,
                                            Timestamp t0, const ForwardContext& ctx) const {
  const std::size_t m = config_.walk_length;
  const std::size_t h = config_.hidden;
  EncodingScratch scratch{collect_identities(walksets, config_.k_max, m), {}, {}};

  auto member_row = [&](NodeId w) -> Var {
    const auto& id = scratch.ids.at(w);
    if (id.is_zero()) return tape.zeros(1, h);
    auto canonical = id.canonical();
    auto it = scratch.psi2_by_identity.find(canonical.counts);
    if (it != scratch.psi2_by_identity.end()) return it->second;
    // Counts enter as fractions of the walks per seed.
    Matrix input(canonical.rows, canonical.cols);
    const double per_walk = 1.0 / static_cast<double>(config_.walks_per_node);
    for (std::size_t k = 0; k < input.data.size(); ++k) {
      input.data[k] = static_cast<double>(canonical.counts[k]) * per_walk;
    }
    Var out = psi2_.forward(tape, tape.constant(std::move(input)), ctx);
    scratch.psi2_by_identity.emplace(std::move(canonical.counts), out);
    return out;
  };

  auto edge_identity = [&](const WalkStep& step) -> Var {
    auto it = scratch.edge_identity.find(step.event);
    if (it != scratch.edge_identity.end()) return it->second;
    if (step.nodes.size() > config_.d_max) {
      throw std::invalid_argument("walk hyperedge larger than d_max");
    }
    std::vector<Var> rows;
    rows.reserve(step.nodes.size());
    for (NodeId w : pooling_order(step.nodes, scratch.ids)) rows.push_back(member_row(w));
    Var out = config_.identity_pool == PoolKind::setmixer
                  ? psi1_.forward(tape, tape.stack_rows(rows, config_.d_max), ctx)
                  : tape.average(rows);
    scratch.edge_identity.emplace(step.event, out);
    return out;
  };

  std::vector<Var> nodes;
  nodes.reserve(walksets.size());
  std::vector<Var> walk_vectors;
  std::vector<Var> id_rows;
  std::vector<double> offsets;
  for (const auto& ws : walksets) {
    walk_vectors.clear();
    for (const auto& walk : ws.walks) {
      if (walk.empty()) continue;
      if (walk.size() > m) throw std::invalid_argument("walk longer than walk_length");
      id_rows.clear();
      offsets.clear();
      for (const auto& step : walk.steps) {
        id_rows.push_back(edge_identity(step));
        offsets.push_back((t0 - step.time) / config_.time_scale);
      }
      Var ids = tape.stack_rows(id_rows, m);
      Var times = config_.time_encoding ? time_.forward(tape, offsets, m)
                                        : tape.zeros(m, config_.time_dim);
      walk_vectors.push_back(mixer_.forward(tape, tape.concat_columns(ids, times), ctx));
    }
    nodes.push_back(walk_vectors.empty() ? tape.zeros(1, config_.walk_dim())
                                         : tape.average(walk_vectors));
  }
  return nodes;
}

Var CatWalkModel::hyperedge_logit(Tape& tape, std::span<const WalkSet> walksets, Timestamp t0,
                                  const ForwardContext& ctx) const {
  if (walksets.empty()) throw std::invalid_argument("seed hyperedge has no nodes");
  const auto nodes = node_vectors(tape, walksets, t0, ctx);
  Var stacked = tape.stack_rows(nodes, nodes.size());
  Var pooled = config_.final_pool == PoolKind::setmixer ? final_.forward(tape, stacked, ctx)
                                                        : tape.mean_rows(stacked);
  return head_.forward(tape, pooled, ctx);
}

double CatWalkModel::score(std::span<const WalkSet> walksets, Timestamp t0) const {
  Tape tape(params_);
  Var logit = hyperedge_logit(tape, walksets, t0, ForwardContext{});
  return tape.value(logit).data[0];
}

}  // namespace catwalk
