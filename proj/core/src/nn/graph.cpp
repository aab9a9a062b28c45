#include "genrl/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "genrl/errors.hpp"

namespace genrl::nn {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
}

}  // namespace

Parameter::Parameter(std::string name, Matrix value)
    : name_(std::move(name)), value_(std::move(value)), grad_(value_.rows, value_.cols) {}

Graph::Node& Graph::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw StateError("graph: invalid variable");
  return nodes_[v.id];
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw StateError("graph: invalid variable");
  return nodes_[v.id];
}

Var Graph::push(Matrix value, bool requires_grad, BackwardFn fn) {
  if (differentiated_) throw StateError("graph: ops recorded after backward()");
  Node n;
  n.grad = Matrix(value.rows, value.cols);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Graph::param(Parameter& p) {
  Var v = push(p.value(), true, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

const Matrix& Graph::value(Var v) const { return node(v).value; }
const Matrix& Graph::grad(Var v) const { return node(v).grad; }

double Graph::scalar_value(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw ShapeError("graph: scalar_value on " + shape_of(m));
  return m.data[0];
}

// ---------------------------------------------------------------------------
// Linear algebra

Var Graph::matmul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  if (A.cols != B.rows) throw ShapeError("matmul: " + shape_of(A) + " * " + shape_of(B));
  Matrix out(A.rows, B.cols);
  gemm_accumulate(A, B, out);
  return push(std::move(out), needs(a) || needs(b), [a, b](Graph& G, const Matrix& go) {
    if (G.needs(a)) gemm_a_bt_accumulate(go, G.nodes_[b.id].value, G.g(a));
    if (G.needs(b)) gemm_at_b_accumulate(G.nodes_[a.id].value, go, G.g(b));
  });
}

Var Graph::transpose(Var a) {
  const Matrix& A = node(a).value;
  Matrix out(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) out(j, i) = A(i, j);
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.rows; ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += go(j, i);
  });
}

Var Graph::add(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "add");
  Matrix out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Graph& G, const Matrix& go) {
    for (Var v : {a, b}) {
      if (!G.needs(v)) continue;
      Matrix& gv = G.g(v);
      for (std::size_t i = 0; i < gv.size(); ++i) gv.data[i] += go.data[i];
    }
  });
}

Var Graph::sub(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "sub");
  Matrix out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= B.data[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Graph& G, const Matrix& go) {
    if (G.needs(a)) {
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i];
    }
    if (G.needs(b)) {
      Matrix& gb = G.g(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] -= go.data[i];
    }
  });
}

Var Graph::mul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "mul");
  Matrix out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    const Matrix& bv = G.nodes_[b.id].value;
    if (G.needs(a)) {
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i] * bv.data[i];
    }
    if (G.needs(b)) {
      Matrix& gb = G.g(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += go.data[i] * av.data[i];
    }
  });
}

Var Graph::add_row(Var a, Var row) {
  const Matrix& A = node(a).value;
  const Matrix& R = node(row).value;
  if (R.rows != 1 || R.cols != A.cols) {
    throw ShapeError("add_row: " + shape_of(A) + " + row " + shape_of(R));
  }
  Matrix out = A;
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += R.data[j];
  return push(std::move(out), needs(a) || needs(row), [a, row](Graph& G, const Matrix& go) {
    if (G.needs(a)) {
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i];
    }
    if (G.needs(row)) {
      Matrix& gr = G.g(row);
      for (std::size_t i = 0; i < go.rows; ++i)
        for (std::size_t j = 0; j < go.cols; ++j) gr.data[j] += go(i, j);
    }
  });
}

Var Graph::mul_row(Var a, Var row) {
  const Matrix& A = node(a).value;
  const Matrix& R = node(row).value;
  if (R.rows != 1 || R.cols != A.cols) {
    throw ShapeError("mul_row: " + shape_of(A) + " * row " + shape_of(R));
  }
  Matrix out = A;
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= R.data[j];
  return push(std::move(out), needs(a) || needs(row), [a, row](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    const Matrix& rv = G.nodes_[row.id].value;
    if (G.needs(a)) {
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < go.rows; ++i)
        for (std::size_t j = 0; j < go.cols; ++j) ga(i, j) += go(i, j) * rv.data[j];
    }
    if (G.needs(row)) {
      Matrix& gr = G.g(row);
      for (std::size_t i = 0; i < go.rows; ++i)
        for (std::size_t j = 0; j < go.cols; ++j) gr.data[j] += go(i, j) * av(i, j);
    }
  });
}

Var Graph::scale(Var a, double s) {
  Matrix out = node(a).value;
  for (double& v : out.data) v *= s;
  return push(std::move(out), needs(a), [a, s](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += s * go.data[i];
  });
}

Var Graph::add_scalar(Var a, double s) {
  Matrix out = node(a).value;
  for (double& v : out.data) v += s;
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i];
  });
}

// ---------------------------------------------------------------------------
// Elementwise

Var Graph::relu(Var a) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (av.data[i] > 0.0) ga.data[i] += go.data[i];
  });
}

Var Graph::tanh(Var a) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = std::tanh(v);
  Var o = push(std::move(out), needs(a), nullptr);
  if (needs(a)) {
    nodes_[o.id].backward = [a, o](Graph& G, const Matrix& go) {
      const Matrix& y = G.nodes_[o.id].value;
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i] * (1.0 - y.data[i] * y.data[i]);
    };
  }
  return o;
}

Var Graph::exp(Var a) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = std::exp(v);
  Var o = push(std::move(out), needs(a), nullptr);
  if (needs(a)) {
    nodes_[o.id].backward = [a, o](Graph& G, const Matrix& go) {
      const Matrix& y = G.nodes_[o.id].value;
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i] * y.data[i];
    };
  }
  return o;
}

Var Graph::log(Var a) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = std::log(v);
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += go.data[i] / av.data[i];
  });
}

Var Graph::square(Var a) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = v * v;
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += 2.0 * av.data[i] * go.data[i];
  });
}

Var Graph::minimum(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "minimum");
  Matrix out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::min(A.data[i], B.data[i]);
  return push(std::move(out), needs(a) || needs(b), [a, b](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    const Matrix& bv = G.nodes_[b.id].value;
    for (std::size_t i = 0; i < go.size(); ++i) {
      // Ties route the gradient to a.
      if (av.data[i] <= bv.data[i]) {
        if (G.needs(a)) G.g(a).data[i] += go.data[i];
      } else if (G.needs(b)) {
        G.g(b).data[i] += go.data[i];
      }
    }
  });
}

Var Graph::clamp(Var a, double lo, double hi) {
  Matrix out = node(a).value;
  for (double& v : out.data) v = std::clamp(v, lo, hi);
  return push(std::move(out), needs(a), [a, lo, hi](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (av.data[i] >= lo && av.data[i] <= hi) ga.data[i] += go.data[i];
  });
}

Var Graph::huber(Var a, double delta) {
  Matrix out = node(a).value;
  for (double& v : out.data) {
    const double x = std::abs(v);
    v = x <= delta ? 0.5 * v * v : delta * (x - 0.5 * delta);
  }
  return push(std::move(out), needs(a), [a, delta](Graph& G, const Matrix& go) {
    const Matrix& av = G.nodes_[a.id].value;
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga.data[i] += go.data[i] * std::clamp(av.data[i], -delta, delta);
  });
}

// ---------------------------------------------------------------------------
// Row-wise

Var Graph::softmax_rows(Var a) {
  Matrix out = node(a).value;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto r = out.row_span(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) s += (v = std::exp(v - mx));
    for (double& v : r) v /= s;
  }
  Var o = push(std::move(out), needs(a), nullptr);
  if (needs(a)) {
    nodes_[o.id].backward = [a, o](Graph& G, const Matrix& go) {
      const Matrix& y = G.nodes_[o.id].value;
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < y.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) dot += go(i, j) * y(i, j);
        for (std::size_t j = 0; j < y.cols; ++j) ga(i, j) += y(i, j) * (go(i, j) - dot);
      }
    };
  }
  return o;
}

Var Graph::log_softmax_rows(Var a) {
  Matrix out = node(a).value;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto r = out.row_span(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (double& v : r) v -= lse;
  }
  Var o = push(std::move(out), needs(a), nullptr);
  if (needs(a)) {
    nodes_[o.id].backward = [a, o](Graph& G, const Matrix& go) {
      const Matrix& y = G.nodes_[o.id].value;
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < y.rows; ++i) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) gsum += go(i, j);
        for (std::size_t j = 0; j < y.cols; ++j) ga(i, j) += go(i, j) - std::exp(y(i, j)) * gsum;
      }
    };
  }
  return o;
}

Var Graph::layer_norm_rows(Var a, double eps) {
  const Matrix& A = node(a).value;
  Matrix out(A.rows, A.cols);
  std::vector<double> inv_std(A.rows);
  const double n = static_cast<double>(A.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    auto r = A.row_span(i);
    double mu = 0.0;
    for (double v : r) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : r) var += (v - mu) * (v - mu);
    var /= n;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < A.cols; ++j) out(i, j) = (A(i, j) - mu) * inv_std[i];
  }
  Var o = push(std::move(out), needs(a), nullptr);
  if (needs(a)) {
    nodes_[o.id].backward = [a, o, inv_std = std::move(inv_std), n](Graph& G, const Matrix& go) {
      const Matrix& y = G.nodes_[o.id].value;
      Matrix& ga = G.g(a);
      for (std::size_t i = 0; i < y.rows; ++i) {
        double gmean = 0.0, gy = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) {
          gmean += go(i, j);
          gy += go(i, j) * y(i, j);
        }
        gmean /= n;
        gy /= n;
        for (std::size_t j = 0; j < y.cols; ++j)
          ga(i, j) += inv_std[i] * (go(i, j) - gmean - y(i, j) * gy);
      }
    };
  }
  return o;
}

Var Graph::pick(Var a, std::span<const std::size_t> index) {
  const Matrix& A = node(a).value;
  if (index.size() != A.rows) throw ShapeError("pick: index count does not match rows");
  Matrix out(A.rows, 1);
  for (std::size_t i = 0; i < A.rows; ++i) {
    if (index[i] >= A.cols) throw ShapeError("pick: column index out of range");
    out(i, 0) = A(i, index[i]);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return push(std::move(out), needs(a), [a, idx = std::move(idx)](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < idx.size(); ++i) ga(i, idx[i]) += go(i, 0);
  });
}

Var Graph::sum_rows(Var a) {
  const Matrix& A = node(a).value;
  Matrix out(A.rows, 1);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (double v : A.row_span(i)) out(i, 0) += v;
  return push(std::move(out), needs(a), [a](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < ga.rows; ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += go(i, 0);
  });
}

Var Graph::sum(Var a) {
  const Matrix& A = node(a).value;
  double s = 0.0;
  for (double v : A.data) s += v;
  return push(Matrix(1, 1, s), needs(a), [a](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (double& v : ga.data) v += go.data[0];
  });
}

Var Graph::mean(Var a) {
  const Matrix& A = node(a).value;
  if (A.size() == 0) throw ShapeError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(A.size()));
}

// ---------------------------------------------------------------------------
// Structural

Var Graph::gather_rows(Var a, std::span<const std::size_t> index) {
  const Matrix& A = node(a).value;
  Matrix out(index.size(), A.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= A.rows) throw ShapeError("gather_rows: row index out of range");
    std::copy_n(A.data.begin() + index[i] * A.cols, A.cols, out.data.begin() + i * A.cols);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return push(std::move(out), needs(a), [a, idx = std::move(idx)](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(idx[i], j) += go(i, j);
  });
}

Var Graph::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix& A = node(a).value;
  if (begin + count > A.rows) throw ShapeError("slice_rows: range exceeds " + shape_of(A));
  Matrix out(count, A.cols);
  std::copy_n(A.data.begin() + begin * A.cols, count * A.cols, out.data.begin());
  return push(std::move(out), needs(a), [a, begin](Graph& G, const Matrix& go) {
    Matrix& ga = G.g(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga.data[begin * ga.cols + i] += go.data[i];
  });
}

Var Graph::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = node(parts[0]).value.cols;
  std::size_t rows = 0;
  bool rg = false;
  for (Var p : parts) {
    const Matrix& m = node(p).value;
    if (m.cols != cols) throw ShapeError("concat_rows: column mismatch");
    rows += m.rows;
    rg = rg || needs(p);
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& m = nodes_[p.id].value;
    std::copy(m.data.begin(), m.data.end(), out.data.begin() + off);
    off += m.size();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), rg, [ps = std::move(ps)](Graph& G, const Matrix& go) {
    std::size_t offset = 0;
    for (Var p : ps) {
      const std::size_t n = G.nodes_[p.id].value.size();
      if (G.needs(p)) {
        Matrix& gp = G.g(p);
        for (std::size_t i = 0; i < n; ++i) gp.data[i] += go.data[offset + i];
      }
      offset += n;
    }
  });
}

Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = node(parts[0]).value.rows;
  std::size_t cols = 0;
  bool rg = false;
  for (Var p : parts) {
    const Matrix& m = node(p).value;
    if (m.rows != rows) throw ShapeError("concat_cols: row mismatch");
    cols += m.cols;
    rg = rg || needs(p);
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& m = nodes_[p.id].value;
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(m.data.begin() + i * m.cols, m.cols, out.data.begin() + i * cols + off);
    off += m.cols;
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), rg, [ps = std::move(ps)](Graph& G, const Matrix& go) {
    std::size_t offset = 0;
    for (Var p : ps) {
      const std::size_t c = G.nodes_[p.id].value.cols;
      if (G.needs(p)) {
        Matrix& gp = G.g(p);
        for (std::size_t i = 0; i < gp.rows; ++i)
          for (std::size_t j = 0; j < c; ++j) gp(i, j) += go(i, offset + j);
      }
      offset += c;
    }
  });
}

// ---------------------------------------------------------------------------

void Graph::backward(Var loss) {
  if (nodes_.empty() || !loss.valid() || loss.id >= nodes_.size()) {
    throw StateError("backward: no recorded forward pass for this loss");
  }
  if (differentiated_) throw StateError("backward: graph already differentiated");
  Node& l = nodes_[loss.id];
  if (l.value.size() != 1) throw ShapeError("backward: loss must be 1x1, got " + shape_of(l.value));
  differentiated_ = true;
  l.grad.data[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) {
      Matrix& pg = n.param->grad();
      for (std::size_t k = 0; k < pg.size(); ++k) pg.data[k] += n.grad.data[k];
    }
  }
}

}  // namespace genrl::nn
