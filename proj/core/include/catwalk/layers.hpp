#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "catwalk/autodiff.hpp"
#include "catwalk/rng.hpp"

namespace catwalk {

// Per-forward settings. Dropout is applied only when rng is set.
struct ForwardContext {
  double dropout = 0.0;
  Rng* rng = nullptr;

  bool training() const { return rng != nullptr && dropout > 0.0; }
};

// rows x cols matrix drawn from U(-sqrt(6/fan_in), +sqrt(6/fan_in)). fan_in
// defaults to rows (right-multiplied weights).
Matrix he_uniform(std::size_t rows, std::size_t cols, Rng& rng, std::size_t fan_in = 0);

// Permutation-invariant set pooling (all-MLP). Input: d x in_dim matrix whose
// rows are set elements. Output: 1 x model_dim.
//   V' = V W_in + b_in                  (only when in_dim != model_dim)
//   H  = V' + gelu(softmax_over_rows(LN1(V')))
//   y  = mean_rows(H + gelu(LN2(H) W1) W2)
struct SetMixerLayer {
  std::size_t in_dim = 0;
  std::size_t model_dim = 0;
  std::size_t hidden_dim = 0;
  std::optional<std::size_t> w_in, b_in;  // present when in_dim != model_dim
  std::size_t ln1_gain = 0, ln1_shift = 0;
  std::size_t ln2_gain = 0, ln2_shift = 0;
  std::size_t w1 = 0, w2 = 0;

  static SetMixerLayer create(ParameterSet& params, const std::string& prefix, std::size_t in_dim,
                              std::size_t model_dim, std::size_t hidden_dim, Rng& rng);

  Var forward(Tape& tape, Var set, const ForwardContext& ctx) const;
};

// Learnable linear term plus periodic features: T(t) = (w_l t + b_l) || cos(t w_p).
struct TimeEncoderLayer {
  std::size_t dim = 0;  // d2 >= 2
  std::size_t w_linear = 0, b_linear = 0, w_periodic = 0;

  static TimeEncoderLayer create(ParameterSet& params, const std::string& prefix, std::size_t dim,
                                 Rng& rng);

  // rows_total x dim block, zero rows after times.size().
  Var forward(Tape& tape, std::span<const double> times, std::size_t rows_total) const;
};

// Order-sensitive mixer over the m x dim matrix of a walk:
//   H = E + W_tok2 gelu(W_tok1 LN_tok(E))
//   y = mean_rows(H + gelu(LN_ch(H) W_ch1) W_ch2)
struct WalkMixerLayer {
  std::size_t length = 0;  // m
  std::size_t dim = 0;
  std::size_t token_hidden = 0;
  std::size_t channel_hidden = 0;
  std::size_t ln_tok_gain = 0, ln_tok_shift = 0;
  std::size_t w_tok1 = 0, w_tok2 = 0;
  std::size_t ln_ch_gain = 0, ln_ch_shift = 0;
  std::size_t w_ch1 = 0, w_ch2 = 0;

  static WalkMixerLayer create(ParameterSet& params, const std::string& prefix, std::size_t length,
                               std::size_t dim, std::size_t token_hidden,
                               std::size_t channel_hidden, Rng& rng);

  Var forward(Tape& tape, Var walk_matrix, const ForwardContext& ctx) const;
};

// Two affine layers with a GeLU in between.
// LayerNorm, then a two-layer GeLU MLP.
struct HeadLayer {
  std::size_t in_dim = 0, hidden_dim = 0, out_dim = 0;
  std::size_t ln_gain = 0, ln_shift = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0;

  static HeadLayer create(ParameterSet& params, const std::string& prefix, std::size_t in_dim,
                          std::size_t hidden_dim, std::size_t out_dim, Rng& rng);

  Var forward(Tape& tape, Var x, const ForwardContext& ctx) const;
};

}  // namespace catwalk
