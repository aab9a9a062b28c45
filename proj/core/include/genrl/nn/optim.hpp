#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "genrl/nn/graph.hpp"

namespace genrl::nn {

void zero_grad(std::span<Parameter* const> params);
/// Rescales gradients so their joint L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Applies one update from the accumulated gradients. Throws NumericError on
  /// non-finite gradients (parameters are left untouched in that case).
  virtual void step(std::span<Parameter* const> params) = 0;
  virtual std::unique_ptr<Optimizer> clone() const = 0;
};

struct RmsPropOptions {
  double lr = 0.00048;
  double smoothing = 0.99;
  double epsilon = 0.01;
};

// s <- smoothing * s + (1 - smoothing) * g^2;  w <- w - lr * g / sqrt(s + epsilon)
class RmsProp final : public Optimizer {
 public:
  explicit RmsProp(RmsPropOptions options = {}) : options_(options) {}
  void step(std::span<Parameter* const> params) override;
  std::unique_ptr<Optimizer> clone() const override { return std::make_unique<RmsProp>(*this); }
  const RmsPropOptions& options() const noexcept { return options_; }
  const std::vector<Matrix>& accumulators() const noexcept { return square_avg_; }

 private:
  RmsPropOptions options_;
  std::vector<Matrix> square_avg_;
};

struct AdamWOptions {
  double lr = 0.0001;
  double weight_decay = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with decoupled weight decay: w <- w - lr * (adam_direction + weight_decay * w)
class AdamW final : public Optimizer {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}
  void step(std::span<Parameter* const> params) override;
  std::unique_ptr<Optimizer> clone() const override { return std::make_unique<AdamW>(*this); }
  const AdamWOptions& options() const noexcept { return options_; }

 private:
  AdamWOptions options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::size_t t_ = 0;
};

}  // namespace genrl::nn
