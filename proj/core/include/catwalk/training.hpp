#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "catwalk/hypergraph.hpp"
#include "catwalk/model.hpp"
#include "catwalk/negative.hpp"
#include "catwalk/sampler.hpp"
#include "catwalk/split.hpp"

namespace catwalk {

enum class AblationMode { full, r2_walk, no_time_encoding, mean_pool, alpha_zero };
enum class OptimizerKind { adam, sgd };

std::string_view to_string(AblationMode mode);
AblationMode parse_ablation_mode(std::string_view text);
std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  double dropout = 0.1;
  double negative_fraction = 0.5;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  std::uint64_t eval_seed = 0x6576616c;  // fixed so metrics compare across checkpoints
  std::size_t threads = 1;               // 0 = hardware concurrency
  std::size_t max_train_events = 0;      // per-epoch subsample; 0 = all
  bool timing = false;                   // record wall-times (non-deterministic output)

  void validate() const;
};

// Raised when the loss or a gradient becomes non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised if a sampled walk reaches an event not strictly before its seed.
class TemporalLeak : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Adam (beta 0.9/0.999, eps 1e-8, bias-corrected) or plain SGD.
class Optimizer {
 public:
  Optimizer(const ParameterSet& params, const TrainConfig& config);
  void step(ParameterSet& params, const Gradients& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  std::uint64_t t_ = 0;
  Gradients m_;
  Gradients v_;
};

struct EvalReport {
  double auc = 0.0;
  double ap = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  SplitMode mode = SplitMode::transductive;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  double val_ap = 0.0;
  double seconds = 0.0;
};

// Sets the sampler/model knobs an ablation overrides.
void apply_ablation(AblationMode mode, SamplerConfig& sampler, ModelConfig& model);

// Graph views and score tables for hyperedge prediction. Training walks run
// on the train events only; evaluation walks use the whole stream strictly
// before each query time. Under r2_walk both views are clique-expanded.
class HyperedgeTask {
 public:
  HyperedgeTask(const TemporalHypergraph& g, DatasetSplit split, SamplerConfig sampler,
                AblationMode ablation = AblationMode::full);

  HyperedgeTask(const HyperedgeTask&) = delete;
  HyperedgeTask& operator=(const HyperedgeTask&) = delete;

  const TemporalHypergraph& full() const { return *full_; }
  const DatasetSplit& split() const { return split_; }
  const SamplerConfig& sampler_config() const { return sampler_config_; }
  AblationMode ablation() const { return ablation_; }

  const SetWalkSampler& train_sampler() const { return *train_sampler_; }
  const SetWalkSampler& eval_sampler() const { return *eval_sampler_; }
  const HyperedgeSet& train_observed() const { return train_observed_; }
  const HyperedgeSet& all_observed() const { return all_observed_; }

  // Fills k_max, d_max, walk sizes and (when base.time_scale <= 0) a time
  // scale from the training stream; applies the ablation.
  ModelConfig resolve(ModelConfig base) const;

 private:
  const TemporalHypergraph* full_;
  DatasetSplit split_;
  SamplerConfig sampler_config_;
  AblationMode ablation_;
  std::unique_ptr<TemporalHypergraph> train_graph_;
  std::unique_ptr<TemporalHypergraph> eval_graph_;  // null when the full graph is used as is
  std::unique_ptr<ScoreTable> train_scores_;
  std::unique_ptr<ScoreTable> eval_scores_;
  std::unique_ptr<SetWalkSampler> train_sampler_;
  std::unique_ptr<SetWalkSampler> eval_sampler_;
  HyperedgeSet train_observed_;
  HyperedgeSet all_observed_;
};

// Mean gap between consecutive events of the same node; 1 when undefined.
double typical_time_gap(const TemporalHypergraph& g);

struct TrainResult {
  std::unique_ptr<CatWalkModel> model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_val_auc = 0.0;
};

// Binary cross-entropy training with one perturbed negative per positive and
// early stopping on validation AUC. The returned model holds the best
// parameters seen.
TrainResult train(const HyperedgeTask& task, const ModelConfig& model_config,
                  const TrainConfig& config);

// AUC/AP over `events` with one negative each, all drawn from eval_seed.
EvalReport evaluate(const CatWalkModel& model, const HyperedgeTask& task,
                    std::span<const EventId> events, const TrainConfig& config);

// Scores of one hyperedge query on the evaluation view.
double score_query(const CatWalkModel& model, const HyperedgeTask& task,
                   std::span<const NodeId> nodes, Timestamp t0, std::uint64_t stream);

std::string history_csv(std::span<const EpochRecord> history, bool timing);

struct AblationResult {
  AblationMode mode = AblationMode::full;
  EvalReport test;
  TrainResult training;
};

AblationResult run_ablation(const TemporalHypergraph& g, const DatasetSplit& split,
                            const SamplerConfig& sampler, const ModelConfig& model,
                            const TrainConfig& config, AblationMode mode);

}  // namespace catwalk
