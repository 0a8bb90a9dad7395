#include "catwalk/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "catwalk/metrics.hpp"
#include "catwalk/parallel.hpp"

namespace catwalk {

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::full: return "full";
    case AblationMode::r2_walk: return "r2_walk";
    case AblationMode::no_time_encoding: return "no_time_encoding";
    case AblationMode::mean_pool: return "mean_pool";
    case AblationMode::alpha_zero: return "alpha_zero";
  }
  return "full";
}

AblationMode parse_ablation_mode(std::string_view text) {
  for (auto m : {AblationMode::full, AblationMode::r2_walk, AblationMode::no_time_encoding,
                 AblationMode::mean_pool, AblationMode::alpha_zero}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown ablation mode '" + std::string(text) + "'");
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::adam;
  if (text == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(negative_fraction > 0.0 && negative_fraction <= 1.0)) {
    throw std::invalid_argument("negative_fraction must lie in (0, 1]");
  }
}

void apply_ablation(AblationMode mode, SamplerConfig& sampler, ModelConfig& model) {
  switch (mode) {
    case AblationMode::full: break;
    case AblationMode::r2_walk: sampler.max_edge_size = 2; break;
    case AblationMode::no_time_encoding: model.time_encoding = false; break;
    case AblationMode::mean_pool:
      model.identity_pool = PoolKind::mean;
      model.final_pool = PoolKind::mean;
      break;
    case AblationMode::alpha_zero: sampler.alpha = 0.0; break;
  }
}

Optimizer::Optimizer(const ParameterSet& params, const TrainConfig& config)
    : kind_(config.optimizer), lr_(config.learning_rate), m_(params), v_(params) {}

void Optimizer::step(ParameterSet& params, const Gradients& g) {
  ++t_;
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& w = params[i].value.data;
      const auto& d = g[i].data;
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr_ * d[k];
    }
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i].value.data;
    const auto& d = g[i].data;
    auto& m = m_[i].data;
    auto& v = v_[i].data;
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * d[k];
      v[k] = b2 * v[k] + (1.0 - b2) * d[k] * d[k];
      w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
}

double typical_time_gap(const TemporalHypergraph& g) {
  double total = 0.0;
  std::size_t count = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto inc = g.incidence(u);
    for (std::size_t i = 1; i < inc.size(); ++i) {
      const double gap = g.time(inc[i]) - g.time(inc[i - 1]);
      if (gap > 0.0) {
        total += gap;
        ++count;
      }
    }
  }
  return count == 0 ? 1.0 : total / static_cast<double>(count);
}

HyperedgeTask::HyperedgeTask(const TemporalHypergraph& g, DatasetSplit split,
                             SamplerConfig sampler, AblationMode ablation)
    : full_(&g), split_(std::move(split)), sampler_config_(sampler), ablation_(ablation) {
  ModelConfig unused;
  apply_ablation(ablation_, sampler_config_, unused);
  sampler_config_.validate();
  auto train_view = g.subgraph(split_.train);
  train_observed_ = HyperedgeSet(train_view);
  all_observed_ = HyperedgeSet(g);
  if (ablation_ == AblationMode::r2_walk) {
    train_graph_ = std::make_unique<TemporalHypergraph>(project(train_view, 2));
    eval_graph_ = std::make_unique<TemporalHypergraph>(project(g, 2));
  } else {
    train_graph_ = std::make_unique<TemporalHypergraph>(std::move(train_view));
  }
  const TemporalHypergraph& eval_view = eval_graph_ ? *eval_graph_ : g;
  train_scores_ = std::make_unique<ScoreTable>(ScoreTable::compute(*train_graph_, sampler_config_));
  eval_scores_ = std::make_unique<ScoreTable>(ScoreTable::compute(eval_view, sampler_config_));
  train_sampler_ = std::make_unique<SetWalkSampler>(*train_graph_, *train_scores_, sampler_config_);
  eval_sampler_ = std::make_unique<SetWalkSampler>(eval_view, *eval_scores_, sampler_config_);
}

ModelConfig HyperedgeTask::resolve(ModelConfig base) const {
  base.k_max = full_->max_edge_size();
  base.d_max = std::max(train_sampler_->graph().max_edge_size(),
                        eval_sampler_->graph().max_edge_size());
  if (sampler_config_.max_edge_size != kUnboundedEdgeSize) {
    base.d_max = std::min(base.d_max, sampler_config_.max_edge_size);
  }
  base.d_max = std::max<std::size_t>(base.d_max, 1);
  base.walk_length = sampler_config_.walk_length;
  base.walks_per_node = sampler_config_.walks_per_node;
  if (!(base.time_scale > 0.0)) base.time_scale = typical_time_gap(train_sampler_->graph());
  SamplerConfig unused;
  apply_ablation(ablation_, unused, base);
  return base;
}

namespace {

constexpr std::uint64_t kTagEpoch = 0x65706f6368;
constexpr std::uint64_t kTagNegative = 0x6e6567;
constexpr std::uint64_t kTagWalk = 0x77616c6b;
constexpr std::uint64_t kTagDropout = 0x64726f70;

std::uint64_t stream_of(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  return Rng::derive(base, keys).next();
}

void check_leakage(std::span<const WalkSet> walksets, Timestamp t0) {
  for (const auto& ws : walksets) {
    for (const auto& walk : ws.walks) {
      for (const auto& step : walk.steps) {
        if (!(step.time < t0)) {
          throw TemporalLeak("walk reached event " + std::to_string(step.event) + " at time " +
                             std::to_string(step.time) + " for a query at " + std::to_string(t0));
        }
      }
    }
  }
}

std::vector<Matrix> snapshot_values(const ParameterSet& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params.all()) out.push_back(p.value);
  return out;
}

void restore_values(ParameterSet& params, std::vector<Matrix>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = std::move(values[i]);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double score_query(const CatWalkModel& model, const HyperedgeTask& task,
                   std::span<const NodeId> nodes, Timestamp t0, std::uint64_t stream) {
  const auto walksets = task.eval_sampler().sample_walksets(nodes, t0, stream);
  check_leakage(walksets, t0);
  return model.score(walksets, t0);
}

EvalReport evaluate(const CatWalkModel& model, const HyperedgeTask& task,
                    std::span<const EventId> events, const TrainConfig& config) {
  const auto& g = task.full();
  std::vector<double> pos(events.size()), neg(events.size());
  parallel_for(events.size(), config.threads, [&](std::size_t i) {
    const EventId e = events[i];
    const Timestamp t0 = g.time(e);
    auto rng = Rng::derive(config.eval_seed, {kTagNegative, e});
    const auto negative = generate_negative(g.nodes(e), g.node_count(), task.all_observed(), rng,
                                            config.negative_fraction);
    pos[i] = score_query(model, task, g.nodes(e), t0, stream_of(config.eval_seed, {kTagWalk, e, 1}));
    neg[i] = score_query(model, task, negative, t0, stream_of(config.eval_seed, {kTagWalk, e, 0}));
  });
  EvalReport report;
  report.mode = task.split().mode;
  report.n_pos = pos.size();
  report.n_neg = neg.size();
  if (!events.empty()) {
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (!std::isfinite(pos[i]) || !std::isfinite(neg[i])) {
        throw TrainingDiverged("non-finite score during evaluation");
      }
    }
    report.auc = roc_auc(pos, neg);
    report.ap = average_precision(pos, neg);
  }
  return report;
}

TrainResult train(const HyperedgeTask& task, const ModelConfig& model_config,
                  const TrainConfig& config) {
  config.validate();
  const auto& g = task.full();
  TrainResult result;
  result.model = std::make_unique<CatWalkModel>(model_config);
  CatWalkModel& model = *result.model;
  ParameterSet& params = model.params();
  Optimizer optimizer(params, config);

  const std::vector<EventId>& train_events = task.split().train;
  const std::vector<EventId>& val_events = task.split().val;
  const std::size_t cap = config.max_train_events == 0
                              ? train_events.size()
                              : std::min(config.max_train_events, train_events.size());
  std::vector<Gradients> item_grads;
  std::vector<double> item_loss;
  Gradients total(params);

  auto best_values = snapshot_values(params);
  double best_auc = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<EventId> order = train_events;
    auto shuffle_rng = Rng::derive(config.seed, {kTagEpoch, epoch});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    order.resize(cap);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::size_t items = 2 * (end - begin);
      while (item_grads.size() < items) item_grads.emplace_back(params);
      item_loss.assign(items, 0.0);
      parallel_for(items, config.threads, [&](std::size_t i) {
        const EventId e = order[begin + i / 2];
        const bool positive = i % 2 == 0;
        const Timestamp t0 = g.time(e);
        std::vector<NodeId> nodes(g.nodes(e).begin(), g.nodes(e).end());
        if (!positive) {
          auto rng = Rng::derive(config.seed, {kTagNegative, epoch, e});
          nodes = generate_negative(nodes, g.node_count(), task.train_observed(), rng,
                                    config.negative_fraction);
        }
        const auto walksets = task.train_sampler().sample_walksets(
            nodes, t0, stream_of(config.seed, {kTagWalk, epoch, e, positive ? 1u : 0u}));
        check_leakage(walksets, t0);
        auto drop_rng = Rng::derive(config.seed, {kTagDropout, epoch, e, positive ? 1u : 0u});
        Tape tape(params);
        const ForwardContext ctx{config.dropout, &drop_rng};
        Var loss = tape.bce_with_logits(model.hyperedge_logit(tape, walksets, t0, ctx),
                                        positive ? 1.0 : 0.0);
        item_grads[i].zero();
        tape.backward(loss, item_grads[i]);
        item_loss[i] = tape.value(loss).data[0];
      });
      // Fixed summation order keeps updates independent of the thread count.
      total.zero();
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < items; ++i) {
        total.add(item_grads[i]);
        batch_loss += item_loss[i];
      }
      total.scale(1.0 / static_cast<double>(items));
      if (!std::isfinite(batch_loss) || !total.all_finite()) {
        throw TrainingDiverged("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                               ", batch starting at item " + std::to_string(begin) +
                               "; lower the learning rate or rescale timestamps");
      }
      loss_sum += batch_loss;
      optimizer.step(params, total);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = order.empty() ? 0.0 : loss_sum / static_cast<double>(2 * order.size());
    if (!val_events.empty()) {
      const auto report = evaluate(model, task, val_events, config);
      record.val_auc = report.auc;
      record.val_ap = report.ap;
    }
    if (config.timing) record.seconds = seconds_since(start);
    result.history.push_back(record);

    if (val_events.empty() || record.val_auc > best_auc) {
      best_auc = record.val_auc;
      best_values = snapshot_values(params);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  restore_values(params, best_values);
  result.best_val_auc = result.best_epoch == 0 ? 0.0 : best_auc;
  return result;
}

std::string history_csv(std::span<const EpochRecord> history, bool timing) {
  std::ostringstream out;
  out << "epoch,train_loss,val_auc,val_ap" << (timing ? ",seconds" : "") << '\n';
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g", r.epoch, r.train_loss, r.val_auc,
                  r.val_ap);
    out << buf;
    if (timing) {
      std::snprintf(buf, sizeof(buf), ",%.6f", r.seconds);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

AblationResult run_ablation(const TemporalHypergraph& g, const DatasetSplit& split,
                            const SamplerConfig& sampler, const ModelConfig& model,
                            const TrainConfig& config, AblationMode mode) {
  HyperedgeTask task(g, split, sampler, mode);
  AblationResult result;
  result.mode = mode;
  result.training = train(task, task.resolve(model), config);
  result.test = evaluate(*result.training.model, task, task.split().test, config);
  return result;
}

}  // namespace catwalk
