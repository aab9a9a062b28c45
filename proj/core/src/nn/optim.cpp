#include "genrl/nn/optim.hpp"

#include <cmath>

#include "genrl/errors.hpp"

namespace genrl::nn {

namespace {

void check_finite_grads(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->grad().all_finite()) throw NumericError("optimizer: non-finite gradient in " + p->name());
  }
}

void ensure_state(std::vector<Matrix>& state, std::span<Parameter* const> params) {
  if (state.empty()) {
    for (const Parameter* p : params) state.emplace_back(p->value().rows, p->value().cols);
    return;
  }
  if (state.size() != params.size()) throw ShapeError("optimizer: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state[i].same_shape(params[i]->value())) throw ShapeError("optimizer: parameter shape changed");
  }
}

}  // namespace

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad().data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad().data) g *= s;
  }
  return norm;
}

void RmsProp::step(std::span<Parameter* const> params) {
  check_finite_grads(params);
  ensure_state(square_avg_, params);
  const double rho = options_.smoothing;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = params[i]->value();
    const Matrix& g = params[i]->grad();
    Matrix& s = square_avg_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.data[k];
      s.data[k] = rho * s.data[k] + (1.0 - rho) * gk * gk;
      if (gk != 0.0) w.data[k] -= options_.lr * gk / std::sqrt(s.data[k] + options_.epsilon);
    }
  }
}

void AdamW::step(std::span<Parameter* const> params) {
  check_finite_grads(params);
  ensure_state(m_, params);
  ensure_state(v_, params);
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = params[i]->value();
    const Matrix& g = params[i]->grad();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.data[k];
      double& m = m_[i].data[k];
      double& v = v_[i].data[k];
      m = b1 * m + (1.0 - b1) * gk;
      v = b2 * v + (1.0 - b2) * gk * gk;
      const double direction = (m / c1) / (std::sqrt(v / c2) + options_.epsilon);
      w.data[k] -= options_.lr * (direction + options_.weight_decay * w.data[k]);
    }
  }
}

}  // namespace genrl::nn
