#include "genrl/learners/model.hpp"

#include "genrl/errors.hpp"

namespace genrl::learners {

nn::Var apply_masks(nn::Graph& g, nn::Var logits, std::span<const ActionMask> masks) {
  nn::Matrix offsets(g.value(logits).rows, g.value(logits).cols);
  apply_masks(offsets, masks);
  return g.add(logits, g.constant(std::move(offsets)));
}

void apply_masks(nn::Matrix& logits, std::span<const ActionMask> masks) {
  if (masks.empty()) return;
  if (masks.size() != logits.rows) throw ShapeError("apply_masks: one mask per row required");
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const auto& m = masks[r];
    if (m.empty()) continue;
    if (m.size() != logits.cols) throw ShapeError("apply_masks: mask width != action count");
    for (std::size_t a = 0; a < logits.cols; ++a) {
      if (!m[a]) logits(r, a) += kMaskedLogit;
    }
  }
}

namespace {

nn::MlpSpec make_spec(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, nn::Activation act) {
  nn::MlpSpec spec{{in}, act};
  spec.layer_widths.insert(spec.layer_widths.end(), hidden.begin(), hidden.end());
  spec.layer_widths.push_back(out);
  return spec;
}

}  // namespace

MlpModel::MlpModel(std::size_t input_width, std::size_t action_count, std::vector<std::size_t> hidden,
                   nn::Activation activation, Rng& rng, const std::string& name, bool with_value)
    : policy_(make_spec(input_width, hidden, action_count, activation), rng, name + ".pi"), with_value_(with_value) {
  if (with_value_) value_ = nn::Mlp(make_spec(input_width, hidden, 1, activation), rng, name + ".v");
}

nn::Matrix MlpModel::stack(std::span<const Observation> xs) const {
  if (xs.empty()) throw ShapeError("mlp model: empty batch");
  nn::Matrix m(xs.size(), input_width());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != input_width()) {
      throw ShapeError("mlp model: observation size " + std::to_string(xs[i].size()) + ", expected " +
                       std::to_string(input_width()));
    }
    std::copy(xs[i].values.begin(), xs[i].values.end(), m.row_span(i).begin());
  }
  return m;
}

ModelHeads MlpModel::forward(nn::Graph& g, std::span<const Observation> xs) {
  const nn::Var in = g.constant(stack(xs));
  const nn::Var logits = policy_.forward(g, in);
  return {logits, with_value_ ? value_.forward(g, in) : g.constant(nn::Matrix(xs.size(), 1))};
}

HeadValues MlpModel::infer(std::span<const Observation> xs) const {
  const nn::Matrix in = stack(xs);
  HeadValues out{policy_.predict_batch(in), std::vector<double>(xs.size(), 0.0)};
  if (with_value_) out.values = value_.predict_batch(in).data;
  return out;
}

std::vector<nn::Parameter*> MlpModel::parameters() {
  auto out = policy_.parameters();
  if (with_value_) {
    for (auto* p : value_.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const nn::Parameter*> MlpModel::parameters() const {
  auto out = static_cast<const nn::Mlp&>(policy_).parameters();
  if (with_value_) {
    for (const auto* p : value_.parameters()) out.push_back(p);
  }
  return out;
}

}  // namespace genrl::learners
