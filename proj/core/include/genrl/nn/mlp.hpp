#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "genrl/nn/graph.hpp"
#include "genrl/rng.hpp"

namespace genrl::nn {

enum class Activation { kRelu, kTanh };

const char* to_string(Activation a) noexcept;

struct MlpSpec {
  /// Input width followed by one width per dense layer; at least two entries.
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::kRelu;
};

struct DenseLayer {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
};

/// Fully connected network. The activation is applied between layers, never
/// after the output layer. Weights start uniform in +-1/sqrt(fan_in), biases
/// at zero.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, Rng& rng, const std::string& name = "mlp");

  const MlpSpec& spec() const noexcept { return spec_; }
  std::size_t input_width() const { return spec_.layer_widths.front(); }
  std::size_t output_width() const { return spec_.layer_widths.back(); }
  std::size_t parameter_count() const;

  /// input: batch x input_width. Throws ShapeError on width mismatch.
  Var forward(Graph& g, Var input);
  /// Tape-free evaluation of a single input row.
  std::vector<double> predict(std::span<const double> input) const;
  /// Tape-free evaluation of a batch x input_width matrix.
  Matrix predict_batch(const Matrix& input) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

}  // namespace genrl::nn
