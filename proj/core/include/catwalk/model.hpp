#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "catwalk/anonymizer.hpp"
#include "catwalk/autodiff.hpp"
#include "catwalk/layers.hpp"
#include "catwalk/sampler.hpp"

namespace catwalk {

enum class PoolKind { setmixer, mean };

std::string_view to_string(PoolKind kind);
PoolKind parse_pool_kind(std::string_view text);

struct ModelConfig {
  std::size_t k_max = 0;        // pad width over seed-hyperedge size
  std::size_t d_max = 0;        // pad width over walk-hyperedge size
  std::size_t walk_length = 3;  // m
  std::size_t walks_per_node = 8;
  std::size_t hidden = 64;      // identity width and MLP hidden width
  std::size_t time_dim = 16;    // d2
  std::size_t head_hidden = 64;
  std::size_t output_dim = 1;
  PoolKind identity_pool = PoolKind::setmixer;  // psi1
  PoolKind final_pool = PoolKind::setmixer;
  bool time_encoding = true;
  double time_scale = 1.0;      // walk time offsets are divided by this
  std::uint64_t init_seed = 0;

  std::size_t walk_dim() const { return hidden + time_dim; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Full encoder: anonymized identities -> walk mixer -> node means -> set
// pooling -> two-layer head.
class CatWalkModel {
 public:
  explicit CatWalkModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  const SetMixerLayer& psi1() const { return psi1_; }
  const SetMixerLayer& psi2() const { return psi2_; }
  const TimeEncoderLayer& time_encoder() const { return time_; }
  const WalkMixerLayer& walk_mixer() const { return mixer_; }
  const SetMixerLayer& final_pool() const { return final_; }
  const HeadLayer& head() const { return head_; }

  // Per-node encodings h(u_i) for each walk set (one per seed of e0, in
  // order). Each is 1 x walk_dim; a seed with no walks gets zeros.
  std::vector<Var> node_vectors(Tape& tape, std::span<const WalkSet> walksets, Timestamp t0,
                                const ForwardContext& ctx) const;

  // 1 x output_dim logits for the seed hyperedge.
  Var hyperedge_logit(Tape& tape, std::span<const WalkSet> walksets, Timestamp t0,
                      const ForwardContext& ctx) const;

  // Inference-mode logit (no dropout).
  double score(std::span<const WalkSet> walksets, Timestamp t0) const;

 private:
  ModelConfig config_;
  ParameterSet params_;
  SetMixerLayer psi2_;
  SetMixerLayer psi1_;
  TimeEncoderLayer time_;
  WalkMixerLayer mixer_;
  SetMixerLayer final_;
  HeadLayer head_;
};

// Versioned binary checkpoint: model config + every parameter tensor, plus
// an opaque metadata string (the effective run configuration).
void write_checkpoint(const CatWalkModel& model, std::string_view metadata, std::ostream& out);
void save_checkpoint(const CatWalkModel& model, std::string_view metadata, const std::string& path);

struct LoadedCheckpoint {
  std::unique_ptr<CatWalkModel> model;
  std::string metadata;
};

LoadedCheckpoint read_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::string& path);

// Text dump of one tensor per line: "<name> <rows>x<cols> v0 v1 ...".
std::string dump_parameters(const ParameterSet& params);

}  // namespace catwalk
