#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "catwalk/rng.hpp"

namespace catwalk {

// Dense row-major matrix of doubles. Vectors are 1 x n.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// A named learnable tensor. Parameters live in a ParameterSet; gradients are
// accumulated into a Gradients object indexed the same way.
struct Parameter {
  std::string name;
  Matrix value;
};

class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix value);
  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::span<Parameter> all() { return params_; }
  std::span<const Parameter> all() const { return params_; }
  std::size_t scalar_count() const;
  // Index of a parameter by name; throws if absent.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<Parameter> params_;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& params);

  std::size_t size() const { return grads_.size(); }
  Matrix& operator[](std::size_t i) { return grads_[i]; }
  const Matrix& operator[](std::size_t i) const { return grads_[i]; }
  void zero();
  void add(const Gradients& other, double scale = 1.0);
  void scale(double s);
  bool all_finite() const;
  double squared_norm() const;

 private:
  std::vector<Matrix> grads_;
};

// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

// Reverse-mode tape over matrix-valued operations. Each forward call records
// one node; backward() walks the nodes in reverse, accumulating input
// gradients and finally parameter gradients.
class Tape {
 public:
  explicit Tape(const ParameterSet& params) : params_(&params) {}

  Var constant(Matrix value);
  Var zeros(std::size_t rows, std::size_t cols) { return constant(Matrix(rows, cols)); }
  Var param(std::size_t index);

  const Matrix& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // Adds a 1 x cols row to every row of x.
  Var add_row(Var x, Var bias);
  Var scale(Var x, double s);
  Var gelu(Var x);
  // Per-row normalization over columns with learnable 1 x cols gain/shift.
  Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);
  // Softmax down each column (normalizes across rows).
  Var softmax_columns(Var x);
  Var mean_rows(Var x);
  Var concat_columns(Var a, Var b);
  // Stacks 1 x c rows, then zero-pads to `rows_total` rows.
  Var stack_rows(std::span<const Var> rows, std::size_t rows_total);
  // Mean of equally-shaped values.
  Var average(std::span<const Var> values);
  // Inverted dropout; identity when rate == 0.
  Var dropout(Var x, double rate, Rng& rng);
  // rows x (1 + d) block: [w_l t + b_l, cos(t w_p)] for each of the first
  // `offsets.size()` rows, zero rows after.
  Var time_encode(std::span<const double> times, std::size_t rows_total, Var w_linear,
                  Var b_linear, Var w_periodic);
  // Binary cross-entropy of sigmoid(logit) against label in {0, 1}; 1 x 1.
  Var bce_with_logits(Var logit, double label);
  // Multiclass cross-entropy over a 1 x C logit row; 1 x 1.
  Var softmax_cross_entropy(Var logits, std::size_t label);

  // Accumulates d(output)/d(param) * seed into grads. `output` must be 1 x 1
  // unless seed is given with its shape.
  void backward(Var output, Gradients& grads);
  void backward(Var output, const Matrix& seed, Gradients& grads);

 private:
  enum class Op : std::uint8_t {
    leaf,
    param,
    matmul,
    add,
    add_row,
    scale,
    gelu,
    layer_norm,
    softmax_columns,
    mean_rows,
    concat_columns,
    stack_rows,
    average,
    dropout,
    time_encode,
    bce,
    softmax_ce,
  };

  struct Node {
    Op op = Op::leaf;
    Matrix value;
    std::vector<std::uint32_t> inputs;
    std::vector<double> aux;  // op-specific cache
    double scalar = 0.0;
    std::size_t param_index = 0;
    bool needs_grad = false;  // some parameter is upstream
  };

  static constexpr std::uint32_t kNoVar = 0xffffffffu;

  Var push(Node node);
  Node& node(Var v) { return nodes_[v.id]; }
  const Node& node(Var v) const { return nodes_[v.id]; }

  const ParameterSet* params_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> param_vars_;
};

double gelu(double x);
double gelu_derivative(double x);

}  // namespace catwalk
