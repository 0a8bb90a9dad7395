#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "catwalk/model.hpp"
#include "catwalk/sampler.hpp"
#include "catwalk/split.hpp"
#include "catwalk/training.hpp"

namespace catwalk {

// Flat, fully-defaulted configuration for every command. Precedence is
// flag > config file > preset > built-in default.
struct RunConfig {
  std::string preset = "default";
  SamplerConfig sampler;
  // When >= 0, alpha is set to alpha_relative / (t_max - t_min) of the
  // dataset, i.e. the recency weight ratio across the full span is
  // exp(alpha_relative). Negative means "use sampler.alpha as given".
  double alpha_relative = 20.0;
  ModelConfig model;
  TrainConfig train;
  SplitConfig split;
  AblationMode ablation = AblationMode::full;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  RunConfig();
};

std::vector<std::string> preset_names();
// Throws std::invalid_argument for unknown names.
RunConfig preset_config(std::string_view name);

// One flat JSON object; unknown keys and ill-typed values throw
// std::invalid_argument. A "preset" key is applied before the other keys.
void apply_json(RunConfig& config, std::string_view json_text);
void apply_json_file(RunConfig& config, const std::string& path);

// key=value from the command line; the value is read as JSON when it parses,
// otherwise as a string.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Every key with its effective value, sorted by key.
std::string to_json(const RunConfig& config);

// Documented key list ("key: description").
std::vector<std::string> config_keys();

// 16 hex digits of FNV-1a over to_json.
std::string config_hash(const RunConfig& config);

// Effective sampler config for a dataset (alpha_relative applied).
SamplerConfig resolve_sampler(const RunConfig& config, const TemporalHypergraph& g);

// Copies seed/threads into the sub-configs.
void propagate(RunConfig& config);

}  // namespace catwalk
