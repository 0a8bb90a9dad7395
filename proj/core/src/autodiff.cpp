#include "catwalk/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace catwalk {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) throw std::invalid_argument("matrix data size does not match shape");
}

std::size_t ParameterSet::add(std::string name, Matrix value) {
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw std::out_of_range("no parameter named " + name);
}

Gradients::Gradients(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (const auto& p : params.all()) grads_.emplace_back(p.value.rows, p.value.cols);
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void Gradients::add(const Gradients& other, double scale) {
  if (other.grads_.size() != grads_.size()) throw std::invalid_argument("gradient set mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto& dst = grads_[i].data;
    const auto& src = other.grads_[i].data;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

void Gradients::scale(double s) {
  for (auto& g : grads_) {
    for (auto& v : g.data) v *= s;
  }
}

bool Gradients::all_finite() const {
  for (const auto& g : grads_) {
    for (double v : g.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.data) s += v * v;
  }
  return s;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Var Tape::push(Node n) {
  n.needs_grad = n.op == Op::param;
  for (auto in : n.inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(std::size_t index) {
  if (index >= params_->size()) throw std::out_of_range("parameter index");
  // One node per parameter per tape; repeated uses share it.
  if (param_vars_.size() < params_->size()) param_vars_.resize(params_->size(), kNoVar);
  if (param_vars_[index] != kNoVar) return Var{param_vars_[index]};
  Node n;
  n.op = Op::param;
  n.param_index = index;
  const Var v = push(std::move(n));
  param_vars_[index] = v.id;
  return v;
}

const Matrix& Tape::value(Var v) const {
  const auto& n = nodes_[v.id];
  return n.op == Op::param ? (*params_)[n.param_index].value : n.value;
}

Var Tape::matmul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.cols == B.rows, "matmul: inner dimensions differ");
  Matrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double* c = C.data.data() + i * C.cols;
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A.data[i * A.cols + k];
      if (aik == 0.0) continue;
      const double* brow = B.data.data() + k * B.cols;
      for (std::size_t j = 0; j < B.cols; ++j) c[j] += aik * brow[j];
    }
  }
  Node n;
  n.op = Op::matmul;
  n.value = std::move(C);
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.same_shape(B), "add: shape mismatch");
  Matrix C = A;
  for (std::size_t k = 0; k < C.data.size(); ++k) C.data[k] += B.data[k];
  Node n;
  n.op = Op::add;
  n.value = std::move(C);
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}

Var Tape::add_row(Var x, Var bias) {
  const auto& X = value(x);
  const auto& b = value(bias);
  require(b.rows == 1 && b.cols == X.cols, "add_row: bias must be 1 x cols");
  Matrix C = X;
  for (std::size_t i = 0; i < C.rows; ++i) {
    for (std::size_t j = 0; j < C.cols; ++j) C(i, j) += b.data[j];
  }
  Node n;
  n.op = Op::add_row;
  n.value = std::move(C);
  n.inputs = {x.id, bias.id};
  return push(std::move(n));
}

Var Tape::scale(Var x, double s) {
  Matrix C = value(x);
  for (auto& v : C.data) v *= s;
  Node n;
  n.op = Op::scale;
  n.value = std::move(C);
  n.inputs = {x.id};
  n.scalar = s;
  return push(std::move(n));
}

Var Tape::gelu(Var x) {
  Matrix C = value(x);
  for (auto& v : C.data) v = catwalk::gelu(v);
  Node n;
  n.op = Op::gelu;
  n.value = std::move(C);
  n.inputs = {x.id};
  return push(std::move(n));
}

Var Tape::layer_norm(Var x, Var gain, Var shift, double eps) {
  const auto& X = value(x);
  const auto& g = value(gain);
  const auto& b = value(shift);
  require(g.rows == 1 && g.cols == X.cols && b.same_shape(g), "layer_norm: gain/shift shape");
  Matrix Y(X.rows, X.cols);
  std::vector<double> stats(2 * X.rows);
  const auto d = static_cast<double>(X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) {
    const auto row = X.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= d;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= d;
    const double rstd = 1.0 / std::sqrt(var + eps);
    stats[2 * i] = mean;
    stats[2 * i + 1] = rstd;
    for (std::size_t j = 0; j < X.cols; ++j) {
      Y(i, j) = (row[j] - mean) * rstd * g.data[j] + b.data[j];
    }
  }
  Node n;
  n.op = Op::layer_norm;
  n.value = std::move(Y);
  n.inputs = {x.id, gain.id, shift.id};
  n.aux = std::move(stats);
  return push(std::move(n));
}

Var Tape::softmax_columns(Var x) {
  const auto& X = value(x);
  Matrix Y(X.rows, X.cols);
  for (std::size_t j = 0; j < X.cols; ++j) {
    double top = -INFINITY;
    for (std::size_t i = 0; i < X.rows; ++i) top = std::max(top, X(i, j));
    double total = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
      Y(i, j) = std::exp(X(i, j) - top);
      total += Y(i, j);
    }
    for (std::size_t i = 0; i < X.rows; ++i) Y(i, j) /= total;
  }
  Node n;
  n.op = Op::softmax_columns;
  n.value = std::move(Y);
  n.inputs = {x.id};
  return push(std::move(n));
}

Var Tape::mean_rows(Var x) {
  const auto& X = value(x);
  require(X.rows > 0, "mean_rows: empty input");
  Matrix Y(1, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t j = 0; j < X.cols; ++j) Y.data[j] += X(i, j);
  }
  for (auto& v : Y.data) v /= static_cast<double>(X.rows);
  Node n;
  n.op = Op::mean_rows;
  n.value = std::move(Y);
  n.inputs = {x.id};
  return push(std::move(n));
}

Var Tape::concat_columns(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.rows == B.rows, "concat_columns: row counts differ");
  Matrix C(A.rows, A.cols + B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    std::copy(A.row(i).begin(), A.row(i).end(), C.row(i).begin());
    std::copy(B.row(i).begin(), B.row(i).end(), C.row(i).begin() + static_cast<std::ptrdiff_t>(A.cols));
  }
  Node n;
  n.op = Op::concat_columns;
  n.value = std::move(C);
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}

Var Tape::stack_rows(std::span<const Var> rows, std::size_t rows_total) {
  require(!rows.empty(), "stack_rows: no rows");
  require(rows.size() <= rows_total, "stack_rows: more rows than rows_total");
  const std::size_t cols = value(rows.front()).cols;
  Matrix C(rows_total, cols);
  Node n;
  n.op = Op::stack_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = value(rows[i]);
    require(r.rows == 1 && r.cols == cols, "stack_rows: rows must be 1 x cols");
    std::copy(r.data.begin(), r.data.end(), C.row(i).begin());
    n.inputs.push_back(rows[i].id);
  }
  n.value = std::move(C);
  return push(std::move(n));
}

Var Tape::average(std::span<const Var> values) {
  require(!values.empty(), "average: no inputs");
  Matrix C = value(values.front());
  Node n;
  n.op = Op::average;
  n.inputs.push_back(values.front().id);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const auto& v = value(values[i]);
    require(v.same_shape(C), "average: shape mismatch");
    for (std::size_t k = 0; k < C.data.size(); ++k) C.data[k] += v.data[k];
    n.inputs.push_back(values[i].id);
  }
  const double inv = 1.0 / static_cast<double>(values.size());
  for (auto& v : C.data) v *= inv;
  n.value = std::move(C);
  return push(std::move(n));
}

Var Tape::dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  require(rate < 1.0, "dropout: rate must be < 1");
  Matrix C = value(x);
  std::vector<double> mask(C.data.size());
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t k = 0; k < C.data.size(); ++k) {
    mask[k] = rng.uniform() < rate ? 0.0 : keep;
    C.data[k] *= mask[k];
  }
  Node n;
  n.op = Op::dropout;
  n.value = std::move(C);
  n.inputs = {x.id};
  n.aux = std::move(mask);
  return push(std::move(n));
}

Var Tape::time_encode(std::span<const double> times, std::size_t rows_total, Var w_linear,
                      Var b_linear, Var w_periodic) {
  const auto& wl = value(w_linear);
  const auto& bl = value(b_linear);
  const auto& wp = value(w_periodic);
  require(wl.size() == 1 && bl.size() == 1 && wp.rows == 1, "time_encode: parameter shapes");
  require(times.size() <= rows_total, "time_encode: more times than rows");
  Matrix C(rows_total, 1 + wp.cols);
  for (std::size_t i = 0; i < times.size(); ++i) {
    C(i, 0) = wl.data[0] * times[i] + bl.data[0];
    for (std::size_t k = 0; k < wp.cols; ++k) C(i, 1 + k) = std::cos(times[i] * wp.data[k]);
  }
  Node n;
  n.op = Op::time_encode;
  n.value = std::move(C);
  n.inputs = {w_linear.id, b_linear.id, w_periodic.id};
  n.aux.assign(times.begin(), times.end());
  return push(std::move(n));
}

Var Tape::bce_with_logits(Var logit, double label) {
  const auto& z = value(logit);
  require(z.size() == 1, "bce_with_logits: logit must be 1 x 1");
  const double x = z.data[0];
  const double loss = std::max(x, 0.0) - x * label + std::log1p(std::exp(-std::fabs(x)));
  Node n;
  n.op = Op::bce;
  n.value = Matrix(1, 1, loss);
  n.inputs = {logit.id};
  n.scalar = label;
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t label) {
  const auto& z = value(logits);
  require(z.rows == 1 && label < z.cols, "softmax_cross_entropy: bad logits/label");
  const double top = *std::max_element(z.data.begin(), z.data.end());
  double total = 0.0;
  for (double v : z.data) total += std::exp(v - top);
  const double lse = top + std::log(total);
  Node n;
  n.op = Op::softmax_ce;
  n.value = Matrix(1, 1, lse - z.data[label]);
  n.inputs = {logits.id};
  n.scalar = static_cast<double>(label);
  n.aux.resize(z.cols);
  for (std::size_t j = 0; j < z.cols; ++j) n.aux[j] = std::exp(z.data[j] - lse);
  return push(std::move(n));
}

void Tape::backward(Var output, Gradients& grads) {
  const auto& out = value(output);
  backward(output, Matrix(out.rows, out.cols, 1.0), grads);
}

void Tape::backward(Var output, const Matrix& seed, Gradients& grads) {
  require(seed.same_shape(value(output)), "backward: seed shape mismatch");
  require(grads.size() == params_->size(), "backward: gradient set does not match parameters");
  std::vector<Matrix> g(output.id + 1);
  g[output.id] = seed;
  // Parameters accumulate straight into grads; values that cannot reach a
  // parameter get a throwaway buffer.
  Matrix sink;
  auto grad_of = [&](std::uint32_t id) -> Matrix& {
    const Node& in = nodes_[id];
    if (in.op == Op::param) return grads[in.param_index];
    if (!in.needs_grad) {
      const auto& v = value(Var{id});
      sink.rows = v.rows;
      sink.cols = v.cols;
      sink.data.resize(v.rows * v.cols);
      return sink;
    }
    if (g[id].data.empty()) {
      const auto& v = value(Var{id});
      g[id] = Matrix(v.rows, v.cols);
    }
    return g[id];
  };

  for (std::uint32_t id = output.id + 1; id-- > 0;) {
    if (g[id].data.empty() || !nodes_[id].needs_grad) continue;
    const Matrix& dy = g[id];
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::param: {
        auto& dst = grads[n.param_index].data;
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += dy.data[k];
        break;
      }
      case Op::matmul: {
        const auto& A = value(Var{n.inputs[0]});
        const auto& B = value(Var{n.inputs[1]});
        if (nodes_[n.inputs[0]].needs_grad) {
          auto& dA = grad_of(n.inputs[0]);
          for (std::size_t i = 0; i < A.rows; ++i) {
            const double* drow = dy.data.data() + i * dy.cols;
            for (std::size_t k = 0; k < A.cols; ++k) {
              double s = 0.0;
              const double* brow = B.data.data() + k * B.cols;
              for (std::size_t j = 0; j < B.cols; ++j) s += drow[j] * brow[j];
              dA.data[i * A.cols + k] += s;
            }
          }
        }
        if (!nodes_[n.inputs[1]].needs_grad) break;
        auto& dB = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < A.rows; ++i) {
          const double* drow = dy.data.data() + i * dy.cols;
          for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A.data[i * A.cols + k];
            if (aik == 0.0) continue;
            double* brow = dB.data.data() + k * B.cols;
            for (std::size_t j = 0; j < B.cols; ++j) brow[j] += aik * drow[j];
          }
        }
        break;
      }
      case Op::add: {
        for (auto in : n.inputs) {
          auto& d = grad_of(in);
          for (std::size_t k = 0; k < d.data.size(); ++k) d.data[k] += dy.data[k];
        }
        break;
      }
      case Op::add_row: {
        auto& dx = grad_of(n.inputs[0]);
        for (std::size_t k = 0; k < dx.data.size(); ++k) dx.data[k] += dy.data[k];
        auto& db = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < dy.rows; ++i) {
          for (std::size_t j = 0; j < dy.cols; ++j) db.data[j] += dy(i, j);
        }
        break;
      }
      case Op::scale: {
        auto& dx = grad_of(n.inputs[0]);
        for (std::size_t k = 0; k < dx.data.size(); ++k) dx.data[k] += n.scalar * dy.data[k];
        break;
      }
      case Op::gelu: {
        const auto& X = value(Var{n.inputs[0]});
        auto& dx = grad_of(n.inputs[0]);
        for (std::size_t k = 0; k < dx.data.size(); ++k) {
          dx.data[k] += dy.data[k] * gelu_derivative(X.data[k]);
        }
        break;
      }
      case Op::layer_norm: {
        const auto& X = value(Var{n.inputs[0]});
        const auto& gain = value(Var{n.inputs[1]});
        auto& dx = grad_of(n.inputs[0]);
        auto& dg = grad_of(n.inputs[1]);
        auto& db = grad_of(n.inputs[2]);
        const std::size_t d = X.cols;
        std::vector<double> xhat(d), dxhat(d);
        for (std::size_t i = 0; i < X.rows; ++i) {
          const double mean = n.aux[2 * i];
          const double rstd = n.aux[2 * i + 1];
          double m1 = 0.0;
          double m2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            xhat[j] = (X(i, j) - mean) * rstd;
            dxhat[j] = dy(i, j) * gain.data[j];
            dg.data[j] += dy(i, j) * xhat[j];
            db.data[j] += dy(i, j);
            m1 += dxhat[j];
            m2 += dxhat[j] * xhat[j];
          }
          m1 /= static_cast<double>(d);
          m2 /= static_cast<double>(d);
          for (std::size_t j = 0; j < d; ++j) dx(i, j) += rstd * (dxhat[j] - m1 - xhat[j] * m2);
        }
        break;
      }
      case Op::softmax_columns: {
        const auto& Y = n.value;
        auto& dx = grad_of(n.inputs[0]);
        for (std::size_t j = 0; j < Y.cols; ++j) {
          double dot = 0.0;
          for (std::size_t i = 0; i < Y.rows; ++i) dot += dy(i, j) * Y(i, j);
          for (std::size_t i = 0; i < Y.rows; ++i) dx(i, j) += Y(i, j) * (dy(i, j) - dot);
        }
        break;
      }
      case Op::mean_rows: {
        auto& dx = grad_of(n.inputs[0]);
        const double inv = 1.0 / static_cast<double>(dx.rows);
        for (std::size_t i = 0; i < dx.rows; ++i) {
          for (std::size_t j = 0; j < dx.cols; ++j) dx(i, j) += dy.data[j] * inv;
        }
        break;
      }
      case Op::concat_columns: {
        auto& da = grad_of(n.inputs[0]);
        auto& dbm = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < dy.rows; ++i) {
          for (std::size_t j = 0; j < da.cols; ++j) da(i, j) += dy(i, j);
          for (std::size_t j = 0; j < dbm.cols; ++j) dbm(i, j) += dy(i, da.cols + j);
        }
        break;
      }
      case Op::stack_rows: {
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          auto& dr = grad_of(n.inputs[i]);
          for (std::size_t j = 0; j < dr.cols; ++j) dr.data[j] += dy(i, j);
        }
        break;
      }
      case Op::average: {
        const double inv = 1.0 / static_cast<double>(n.inputs.size());
        for (auto in : n.inputs) {
          auto& d = grad_of(in);
          for (std::size_t k = 0; k < d.data.size(); ++k) d.data[k] += inv * dy.data[k];
        }
        break;
      }
      case Op::dropout: {
        auto& dx = grad_of(n.inputs[0]);
        for (std::size_t k = 0; k < dx.data.size(); ++k) dx.data[k] += n.aux[k] * dy.data[k];
        break;
      }
      case Op::time_encode: {
        const auto& wp = value(Var{n.inputs[2]});
        auto& dwl = grad_of(n.inputs[0]);
        auto& dbl = grad_of(n.inputs[1]);
        auto& dwp = grad_of(n.inputs[2]);
        for (std::size_t i = 0; i < n.aux.size(); ++i) {
          const double t = n.aux[i];
          dwl.data[0] += dy(i, 0) * t;
          dbl.data[0] += dy(i, 0);
          for (std::size_t k = 0; k < wp.cols; ++k) {
            dwp.data[k] -= dy(i, 1 + k) * std::sin(t * wp.data[k]) * t;
          }
        }
        break;
      }
      case Op::bce: {
        const double z = value(Var{n.inputs[0]}).data[0];
        const double sig = 1.0 / (1.0 + std::exp(-z));
        grad_of(n.inputs[0]).data[0] += dy.data[0] * (sig - n.scalar);
        break;
      }
      case Op::softmax_ce: {
        auto& dz = grad_of(n.inputs[0]);
        const auto label = static_cast<std::size_t>(n.scalar);
        for (std::size_t j = 0; j < dz.cols; ++j) {
          dz.data[j] += dy.data[0] * (n.aux[j] - (j == label ? 1.0 : 0.0));
        }
        break;
      }
    }
    g[id] = Matrix();
  }
}

}  // namespace catwalk
