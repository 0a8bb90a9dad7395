#pragma once

// Straight-line reference of the encoder using nested vectors and loops
// only; shares parameters (by name) with the tape-based model but none of
// its arithmetic.

#include <cmath>
#include <string>
#include <vector>

#include "catwalk/anonymizer.hpp"
#include "catwalk/model.hpp"

namespace ref {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat from(const catwalk::Matrix& m) {
  Mat out(m.rows, Vec(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out[i][j] = m(i, j);
  }
  return out;
}

inline const catwalk::Matrix& P(const catwalk::ParameterSet& ps, const std::string& name) {
  return ps[ps.index_of(name)].value;
}

inline bool has(const catwalk::ParameterSet& ps, const std::string& name) {
  for (const auto& p : ps.all()) {
    if (p.name == name) return true;
  }
  return false;
}

inline Mat mul(const Mat& a, const Mat& b) {
  Mat c(a.size(), Vec(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  }
  return c;
}

inline Mat plus(Mat a, const Mat& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  }
  return a;
}

inline Mat plus_row(Mat a, const catwalk::Matrix& row) {
  for (auto& r : a) {
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += row.data[j];
  }
  return a;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline Mat gelu(Mat a) {
  for (auto& r : a) {
    for (auto& v : r) v = gelu(v);
  }
  return a;
}

inline Mat layer_norm(const Mat& x, const catwalk::Matrix& gain, const catwalk::Matrix& shift) {
  Mat y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mean = 0.0;
    for (double v : x[i]) mean += v / n;
    double var = 0.0;
    for (double v : x[i]) var += (v - mean) * (v - mean) / n;
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      y[i][j] = (x[i][j] - mean) / std::sqrt(var + 1e-5) * gain.data[j] + shift.data[j];
    }
  }
  return y;
}

// Softmax over the set axis (down each column).
inline Mat softmax_over_rows(const Mat& x) {
  Mat y = x;
  for (std::size_t j = 0; j < x[0].size(); ++j) {
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) z += std::exp(x[i][j]);
    for (std::size_t i = 0; i < x.size(); ++i) y[i][j] = std::exp(x[i][j]) / z;
  }
  return y;
}

inline Vec mean_rows(const Mat& x) {
  Vec out(x[0].size(), 0.0);
  for (const auto& r : x) {
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] / static_cast<double>(x.size());
  }
  return out;
}

inline Vec setmixer(const catwalk::ParameterSet& ps, const std::string& p, Mat v) {
  if (has(ps, p + ".w_in")) v = plus_row(mul(v, from(P(ps, p + ".w_in"))), P(ps, p + ".b_in"));
  const Mat ln1 = layer_norm(v, P(ps, p + ".ln_token.gain"), P(ps, p + ".ln_token.shift"));
  const Mat h = plus(v, gelu(softmax_over_rows(ln1)));
  const Mat ln2 = layer_norm(h, P(ps, p + ".ln_channel.gain"), P(ps, p + ".ln_channel.shift"));
  const Mat mlp = mul(gelu(mul(ln2, from(P(ps, p + ".w_s1")))), from(P(ps, p + ".w_s2")));
  return mean_rows(plus(h, mlp));
}

inline Vec walk_mixer(const catwalk::ParameterSet& ps, const std::string& p, const Mat& e) {
  const Mat ln_t = layer_norm(e, P(ps, p + ".ln_token.gain"), P(ps, p + ".ln_token.shift"));
  const Mat tok = mul(from(P(ps, p + ".w_token2")), gelu(mul(from(P(ps, p + ".w_token1")), ln_t)));
  const Mat h = plus(e, tok);
  const Mat ln_c = layer_norm(h, P(ps, p + ".ln_channel.gain"), P(ps, p + ".ln_channel.shift"));
  const Mat ch = mul(gelu(mul(ln_c, from(P(ps, p + ".w_channel1")))), from(P(ps, p + ".w_channel2")));
  return mean_rows(plus(h, ch));
}

inline Vec head(const catwalk::ParameterSet& ps, const std::string& p, const Vec& x) {
  const Mat z = layer_norm(Mat{x}, P(ps, p + ".ln.gain"), P(ps, p + ".ln.shift"));
  const Mat hidden = gelu(plus_row(mul(z, from(P(ps, p + ".w1"))), P(ps, p + ".b1")));
  return plus_row(mul(hidden, from(P(ps, p + ".w2"))), P(ps, p + ".b2"))[0];
}

inline Vec time_row(const catwalk::ParameterSet& ps, const std::string& p, double t) {
  const auto& wp = P(ps, p + ".w_p");
  Vec row{P(ps, p + ".w_l").data[0] * t + P(ps, p + ".b_l").data[0]};
  for (double w : wp.data) row.push_back(std::cos(t * w));
  return row;
}

inline double logit(const catwalk::CatWalkModel& model, const std::vector<catwalk::WalkSet>& sets,
                    double t0) {
  using namespace catwalk;
  const auto& c = model.config();
  const auto& ps = model.params();
  const auto ids = collect_identities(sets, c.k_max, c.walk_length);
  auto member = [&](NodeId w) {
    const auto& id = ids.at(w);
    if (id.is_zero()) return Vec(c.hidden, 0.0);
    const auto canon = id.canonical();
    Mat in(canon.rows, Vec(canon.cols));
    for (std::size_t r = 0; r < canon.rows; ++r) {
      for (std::size_t k = 0; k < canon.cols; ++k) {
        in[r][k] = canon.at(r, k) / static_cast<double>(c.walks_per_node);
      }
    }
    return setmixer(ps, "psi2", in);
  };
  Mat nodes;
  for (const auto& ws : sets) {
    Mat walk_vecs;
    for (const auto& walk : ws.walks) {
      if (walk.empty()) continue;
      Mat e(c.walk_length, Vec(c.walk_dim(), 0.0));
      for (std::size_t s = 0; s < walk.size(); ++s) {
        const auto& step = walk.steps[s];
        Mat rows;
        for (NodeId w : pooling_order(step.nodes, ids)) rows.push_back(member(w));
        Vec id_row;
        if (c.identity_pool == PoolKind::setmixer) {
          while (rows.size() < c.d_max) rows.push_back(Vec(c.hidden, 0.0));
          id_row = setmixer(ps, "psi1", rows);
        } else {
          id_row = mean_rows(rows);
        }
        const Vec tr = c.time_encoding ? time_row(ps, "time", (t0 - step.time) / c.time_scale)
                                       : Vec(c.time_dim, 0.0);
        for (std::size_t j = 0; j < c.hidden; ++j) e[s][j] = id_row[j];
        for (std::size_t j = 0; j < c.time_dim; ++j) e[s][c.hidden + j] = tr[j];
      }
      walk_vecs.push_back(walk_mixer(ps, "walk_mixer", e));
    }
    nodes.push_back(walk_vecs.empty() ? Vec(c.walk_dim(), 0.0) : mean_rows(walk_vecs));
  }
  const Vec pooled = c.final_pool == PoolKind::setmixer ? setmixer(ps, "final_pool", nodes)
                                                         : mean_rows(nodes);
  return head(ps, "head", pooled)[0];
}

}  // namespace ref
