#include "catwalk/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace catwalk {

Matrix he_uniform(std::size_t rows, std::size_t cols, Rng& rng, std::size_t fan_in) {
  Matrix w(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in == 0 ? rows : fan_in));
  for (auto& v : w.data) v = rng.uniform(-limit, limit);
  return w;
}

namespace {

std::size_t add_gain(ParameterSet& params, const std::string& name, std::size_t dim) {
  return params.add(name, Matrix(1, dim, 1.0));
}

std::size_t add_zeros(ParameterSet& params, const std::string& name, std::size_t rows,
                      std::size_t cols) {
  return params.add(name, Matrix(rows, cols, 0.0));
}

Var maybe_dropout(Tape& tape, Var x, const ForwardContext& ctx) {
  return ctx.training() ? tape.dropout(x, ctx.dropout, *ctx.rng) : x;
}

}  // namespace

SetMixerLayer SetMixerLayer::create(ParameterSet& params, const std::string& prefix,
                                    std::size_t in_dim, std::size_t model_dim,
                                    std::size_t hidden_dim, Rng& rng) {
  if (in_dim == 0 || model_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("SetMixer dimensions must be positive");
  }
  SetMixerLayer layer;
  layer.in_dim = in_dim;
  layer.model_dim = model_dim;
  layer.hidden_dim = hidden_dim;
  if (in_dim != model_dim) {
    layer.w_in = params.add(prefix + ".w_in", he_uniform(in_dim, model_dim, rng));
    // Random bias: LayerNorm is scale invariant, so without it the
    // magnitude of a projected row would be lost.
    layer.b_in = params.add(prefix + ".b_in", he_uniform(1, model_dim, rng, in_dim));
  }
  layer.ln1_gain = add_gain(params, prefix + ".ln_token.gain", model_dim);
  layer.ln1_shift = add_zeros(params, prefix + ".ln_token.shift", 1, model_dim);
  layer.ln2_gain = add_gain(params, prefix + ".ln_channel.gain", model_dim);
  layer.ln2_shift = add_zeros(params, prefix + ".ln_channel.shift", 1, model_dim);
  layer.w1 = params.add(prefix + ".w_s1", he_uniform(model_dim, hidden_dim, rng));
  layer.w2 = params.add(prefix + ".w_s2", he_uniform(hidden_dim, model_dim, rng));
  return layer;
}

Var SetMixerLayer::forward(Tape& tape, Var set, const ForwardContext& ctx) const {
  if (tape.value(set).cols != in_dim) throw std::invalid_argument("SetMixer input width mismatch");
  Var v = w_in ? tape.add_row(tape.matmul(set, tape.param(*w_in)), tape.param(*b_in)) : set;
  // Token mixing: softmax over the set axis is the only cross-element step.
  Var ln1 = tape.layer_norm(v, tape.param(ln1_gain), tape.param(ln1_shift));
  Var h = tape.add(v, tape.gelu(tape.softmax_columns(ln1)));
  Var ln2 = tape.layer_norm(h, tape.param(ln2_gain), tape.param(ln2_shift));
  Var mlp = tape.matmul(tape.gelu(tape.matmul(ln2, tape.param(w1))), tape.param(w2));
  return tape.mean_rows(tape.add(h, maybe_dropout(tape, mlp, ctx)));
}

TimeEncoderLayer TimeEncoderLayer::create(ParameterSet& params, const std::string& prefix,
                                          std::size_t dim, Rng& rng) {
  if (dim < 2) throw std::invalid_argument("time encoding dimension must be >= 2");
  TimeEncoderLayer layer;
  layer.dim = dim;
  layer.w_linear = params.add(prefix + ".w_l", he_uniform(1, 1, rng));
  layer.b_linear = add_zeros(params, prefix + ".b_l", 1, 1);
  Matrix wp(1, dim - 1);
  for (auto& v : wp.data) v = rng.normal();
  layer.w_periodic = params.add(prefix + ".w_p", std::move(wp));
  return layer;
}

Var TimeEncoderLayer::forward(Tape& tape, std::span<const double> times,
                              std::size_t rows_total) const {
  return tape.time_encode(times, rows_total, tape.param(w_linear), tape.param(b_linear),
                          tape.param(w_periodic));
}

WalkMixerLayer WalkMixerLayer::create(ParameterSet& params, const std::string& prefix,
                                      std::size_t length, std::size_t dim,
                                      std::size_t token_hidden, std::size_t channel_hidden,
                                      Rng& rng) {
  if (length == 0 || dim == 0 || token_hidden == 0 || channel_hidden == 0) {
    throw std::invalid_argument("walk mixer dimensions must be positive");
  }
  WalkMixerLayer layer;
  layer.length = length;
  layer.dim = dim;
  layer.token_hidden = token_hidden;
  layer.channel_hidden = channel_hidden;
  layer.ln_tok_gain = add_gain(params, prefix + ".ln_token.gain", dim);
  layer.ln_tok_shift = add_zeros(params, prefix + ".ln_token.shift", 1, dim);
  // Token weights multiply from the left and act across walk positions.
  layer.w_tok1 = params.add(prefix + ".w_token1", he_uniform(token_hidden, length, rng, length));
  layer.w_tok2 =
      params.add(prefix + ".w_token2", he_uniform(length, token_hidden, rng, token_hidden));
  layer.ln_ch_gain = add_gain(params, prefix + ".ln_channel.gain", dim);
  layer.ln_ch_shift = add_zeros(params, prefix + ".ln_channel.shift", 1, dim);
  layer.w_ch1 = params.add(prefix + ".w_channel1", he_uniform(dim, channel_hidden, rng));
  layer.w_ch2 = params.add(prefix + ".w_channel2", he_uniform(channel_hidden, dim, rng));
  return layer;
}

Var WalkMixerLayer::forward(Tape& tape, Var walk_matrix, const ForwardContext& ctx) const {
  const auto& e = tape.value(walk_matrix);
  if (e.rows != length || e.cols != dim) throw std::invalid_argument("walk matrix shape mismatch");
  Var ln_tok = tape.layer_norm(walk_matrix, tape.param(ln_tok_gain), tape.param(ln_tok_shift));
  Var tok = tape.matmul(tape.param(w_tok2), tape.gelu(tape.matmul(tape.param(w_tok1), ln_tok)));
  Var h = tape.add(walk_matrix, maybe_dropout(tape, tok, ctx));
  Var ln_ch = tape.layer_norm(h, tape.param(ln_ch_gain), tape.param(ln_ch_shift));
  Var ch = tape.matmul(tape.gelu(tape.matmul(ln_ch, tape.param(w_ch1))), tape.param(w_ch2));
  return tape.mean_rows(tape.add(h, maybe_dropout(tape, ch, ctx)));
}

HeadLayer HeadLayer::create(ParameterSet& params, const std::string& prefix, std::size_t in_dim,
                            std::size_t hidden_dim, std::size_t out_dim, Rng& rng) {
  HeadLayer layer;
  layer.in_dim = in_dim;
  layer.hidden_dim = hidden_dim;
  layer.out_dim = out_dim;
  layer.ln_gain = add_gain(params, prefix + ".ln.gain", in_dim);
  layer.ln_shift = add_zeros(params, prefix + ".ln.shift", 1, in_dim);
  layer.w1 = params.add(prefix + ".w1", he_uniform(in_dim, hidden_dim, rng));
  layer.b1 = add_zeros(params, prefix + ".b1", 1, hidden_dim);
  layer.w2 = params.add(prefix + ".w2", he_uniform(hidden_dim, out_dim, rng));
  layer.b2 = add_zeros(params, prefix + ".b2", 1, out_dim);
  return layer;
}

Var HeadLayer::forward(Tape& tape, Var x, const ForwardContext& ctx) const {
  Var z = tape.layer_norm(x, tape.param(ln_gain), tape.param(ln_shift));
  Var hidden = tape.gelu(tape.add_row(tape.matmul(z, tape.param(w1)), tape.param(b1)));
  hidden = maybe_dropout(tape, hidden, ctx);
  return tape.add_row(tape.matmul(hidden, tape.param(w2)), tape.param(b2));
}

}  // namespace catwalk
