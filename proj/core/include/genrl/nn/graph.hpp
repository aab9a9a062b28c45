#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "genrl/nn/matrix.hpp"

namespace genrl::nn {

/// Trainable tensor: values plus an accumulated gradient of the same shape.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix value);

  const std::string& name() const noexcept { return name_; }
  Matrix& value() noexcept { return value_; }
  const Matrix& value() const noexcept { return value_; }
  Matrix& grad() noexcept { return grad_; }
  const Matrix& grad() const noexcept { return grad_; }
  void zero_grad() { grad_.fill(0.0); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

/// Handle to a node recorded on a Graph.
struct Var {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t id = kInvalid;
  bool valid() const noexcept { return id != kInvalid; }
};

/// Reverse-mode tape over small dense matrices.
///
/// Each op evaluates eagerly and records a closure that propagates the output
/// gradient to its inputs. backward() replays the closures in reverse order
/// and accumulates leaf gradients into the bound Parameters. A graph can be
/// differentiated once; build a new graph for the next pass.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var scalar(double v) { return constant(Matrix(1, 1, v)); }
  /// Leaf bound to p; gradients are added into p.grad() on backward().
  Var param(Parameter& p);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  double scalar_value(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_row(Var a, Var row);  // adds a 1 x c row to every row of a
  Var mul_row(Var a, Var row);  // scales every row of a elementwise by a 1 x c row
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);

  // Elementwise nonlinearities.
  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var minimum(Var a, Var b);
  /// Clamps into [lo, hi]; gradient is zero where the clamp is active.
  Var clamp(Var a, double lo, double hi);
  /// Elementwise Huber with threshold delta.
  Var huber(Var a, double delta);

  // Row-wise ops.
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);
  /// Normalizes each row to zero mean and unit variance.
  Var layer_norm_rows(Var a, double eps = 1e-5);
  /// Column vector with a(i, index[i]).
  Var pick(Var a, std::span<const std::size_t> index);
  Var sum_rows(Var a);  // r x 1

  // Reductions to 1 x 1.
  Var sum(Var a);
  Var mean(Var a);

  // Structural.
  Var gather_rows(Var a, std::span<const std::size_t> index);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);

  /// Throws StateError if loss is invalid or the graph was already
  /// differentiated, ShapeError if loss is not 1 x 1.
  void backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    // Receives this node's accumulated output gradient.
    std::function<void(Graph&, const Matrix&)> backward;
  };

  using BackwardFn = std::function<void(Graph&, const Matrix&)>;
  Var push(Matrix value, bool requires_grad, BackwardFn fn);
  Node& node(Var v);
  const Node& node(Var v) const;
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  Matrix& g(Var v) { return nodes_[v.id].grad; }

  std::vector<Node> nodes_;
  bool differentiated_ = false;
};

}  // namespace genrl::nn
