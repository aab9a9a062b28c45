#include "genrl/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "genrl/errors.hpp"

namespace genrl::nn {

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "unknown";
}

Mlp::Mlp(MlpSpec spec, Rng& rng, const std::string& name) : spec_(std::move(spec)) {
  if (spec_.layer_widths.size() < 2) throw ConfigError("mlp: need an input width and at least one layer");
  for (std::size_t w : spec_.layer_widths) {
    if (w == 0) throw ConfigError("mlp: layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < spec_.layer_widths.size(); ++l) {
    const std::size_t in = spec_.layer_widths[l];
    const std::size_t out = spec_.layer_widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Matrix w(in, out);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    const std::string prefix = name + ".l" + std::to_string(l);
    layers_.push_back({Parameter(prefix + ".weight", std::move(w)), Parameter(prefix + ".bias", Matrix(1, out))});
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.value().size() + l.bias.value().size();
  return n;
}

Var Mlp::forward(Graph& g, Var input) {
  if (g.value(input).cols != input_width()) {
    throw ShapeError("mlp: input width " + std::to_string(g.value(input).cols) + ", expected " +
                     std::to_string(input_width()));
  }
  Var x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = g.add_row(g.matmul(x, g.param(layers_[l].weight)), g.param(layers_[l].bias));
    if (l + 1 < layers_.size()) x = spec_.activation == Activation::kRelu ? g.relu(x) : g.tanh(x);
  }
  return x;
}

std::vector<double> Mlp::predict(std::span<const double> input) const {
  if (input.size() != input_width()) {
    throw ShapeError("mlp: input width " + std::to_string(input.size()) + ", expected " +
                     std::to_string(input_width()));
  }
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Matrix& w = layers_[l].weight.value();
    std::vector<double> y(layers_[l].bias.value().data);
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* wi = w.data.data() + i * w.cols;
      for (std::size_t j = 0; j < w.cols; ++j) y[j] += xi * wi[j];
    }
    if (l + 1 < layers_.size()) {
      for (double& v : y) v = spec_.activation == Activation::kRelu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
    }
    x = std::move(y);
  }
  return x;
}

Matrix Mlp::predict_batch(const Matrix& input) const {
  if (input.cols != input_width()) {
    throw ShapeError("mlp: input width " + std::to_string(input.cols) + ", expected " + std::to_string(input_width()));
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Matrix& w = layers_[l].weight.value();
    const auto& b = layers_[l].bias.value().data;
    Matrix y(x.rows, w.cols);
    for (std::size_t r = 0; r < y.rows; ++r) std::copy(b.begin(), b.end(), y.row_span(r).begin());
    gemm_accumulate(x, w, y);
    if (l + 1 < layers_.size()) {
      for (double& v : y.data) v = spec_.activation == Activation::kRelu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
    }
    x = std::move(y);
  }
  return x;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> Mlp::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

}  // namespace genrl::nn
