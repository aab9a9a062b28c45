#include "genrl/seq/model.hpp"

#include <cmath>
#include <numeric>

#include "genrl/errors.hpp"

namespace genrl::seq {

using nn::Matrix;
using nn::Var;

void SequenceModelSpec::validate() const {
  if (patch_count == 0 || patch_size == 0 || action_count == 0 || return_bins < 2 || context == 0 || embed == 0 ||
      heads == 0 || layers == 0 || mlp_ratio == 0) {
    throw ConfigError("sequence model: sizes must be positive");
  }
  if (embed % heads != 0) throw ConfigError("sequence model: embed must be divisible by heads");
}

namespace {

// Parameter layout: fixed slots, then one block of slots per layer, then heads.
enum Slot : std::size_t { kPatchW, kPatchB, kReturnTable, kActionTable, kRewardTable, kPosition, kFixedSlots };

struct BlockLayout {
  std::size_t heads;
  std::size_t stride() const { return 3 * heads + 10; }
  std::size_t ln1_g() const { return 0; }
  std::size_t ln1_b() const { return 1; }
  std::size_t wq(std::size_t h) const { return 2 + 3 * h; }
  std::size_t wk(std::size_t h) const { return 3 + 3 * h; }
  std::size_t wv(std::size_t h) const { return 4 + 3 * h; }
  std::size_t wo() const { return 2 + 3 * heads; }
  std::size_t bo() const { return 3 + 3 * heads; }
  std::size_t ln2_g() const { return 4 + 3 * heads; }
  std::size_t ln2_b() const { return 5 + 3 * heads; }
  std::size_t w1() const { return 6 + 3 * heads; }
  std::size_t b1() const { return 7 + 3 * heads; }
  std::size_t w2() const { return 8 + 3 * heads; }
  std::size_t b2() const { return 9 + 3 * heads; }
};

Matrix uniform_init(std::size_t r, std::size_t c, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(r));
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-bound, bound);
  return m;
}

Matrix normal_init(std::size_t r, std::size_t c, double sd, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = sd * rng.normal();
  return m;
}

}  // namespace

void SequenceModel::add(const std::string& name, Matrix value) { params_.emplace_back(name, std::move(value)); }

SequenceModel::SequenceModel(SequenceModelSpec spec, Rng& rng) : spec_(spec) {
  spec_.validate();
  const std::size_t d = spec_.embed, dh = d / spec_.heads, hidden = d * spec_.mlp_ratio;
  const std::size_t positions = spec_.context * (spec_.patch_count + 3);
  add("embed.patch.weight", uniform_init(spec_.patch_size, d, rng));
  add("embed.patch.bias", Matrix(1, d));
  add("embed.return", normal_init(spec_.return_bins, d, 0.02, rng));
  add("embed.action", normal_init(spec_.action_count, d, 0.02, rng));
  add("embed.reward", normal_init(3, d, 0.02, rng));
  add("embed.position", normal_init(positions, d, 0.02, rng));
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::string b = "block" + std::to_string(l) + ".";
    add(b + "ln1.gain", Matrix(1, d, 1.0));
    add(b + "ln1.bias", Matrix(1, d));
    for (std::size_t h = 0; h < spec_.heads; ++h) {
      const std::string hp = b + "attn.h" + std::to_string(h) + ".";
      add(hp + "q", uniform_init(d, dh, rng));
      add(hp + "k", uniform_init(d, dh, rng));
      add(hp + "v", uniform_init(d, dh, rng));
    }
    add(b + "attn.out.weight", uniform_init(d, d, rng));
    add(b + "attn.out.bias", Matrix(1, d));
    add(b + "ln2.gain", Matrix(1, d, 1.0));
    add(b + "ln2.bias", Matrix(1, d));
    add(b + "mlp.fc.weight", uniform_init(d, hidden, rng));
    add(b + "mlp.fc.bias", Matrix(1, hidden));
    add(b + "mlp.proj.weight", uniform_init(hidden, d, rng));
    add(b + "mlp.proj.bias", Matrix(1, d));
  }
  add("final_ln.gain", Matrix(1, d, 1.0));
  add("final_ln.bias", Matrix(1, d));
  add("head.action.weight", Matrix(d, spec_.action_count));
  add("head.action.bias", Matrix(1, spec_.action_count));
  add("head.value.weight", uniform_init(d, 1, rng));
  add("head.value.bias", Matrix(1, 1));
}

std::vector<Var> SequenceModel::bind(nn::Graph& g) {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(g.param(p));
  return out;
}

std::vector<Var> SequenceModel::bind_constant(nn::Graph& g) const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(g.constant(p.value()));
  return out;
}

learners::ModelHeads SequenceModel::run(nn::Graph& g, const std::vector<Var>& p, const TokenSequence& seq,
                                        bool last_only) const {
  const std::size_t T = seq.length(), M = spec_.patch_count, d = spec_.embed;
  if (T == 0) throw ContractError("sequence model: empty sequence");
  if (T > spec_.context) {
    throw ContractError("sequence model: " + std::to_string(T) + " timesteps exceed context " +
                        std::to_string(spec_.context));
  }
  if (seq.patch_count != M || seq.patch_size != spec_.patch_size) {
    throw ContractError("sequence model: patch layout does not match the model");
  }
  seq.validate(spec_.return_bins, spec_.action_count);

  // Token embeddings grouped by type, then interleaved into timestep order.
  Matrix patches(T * M, spec_.patch_size);
  std::vector<std::size_t> ret_ids(T), act_ids(T), rew_ids(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& s = seq.steps[t];
    std::copy(s.patches.begin(), s.patches.end(), patches.data.begin() + t * M * spec_.patch_size);
    ret_ids[t] = s.return_bin;
    act_ids[t] = s.action;
    rew_ids[t] = static_cast<std::size_t>(s.reward + 1);
  }
  const Var patch_emb = g.add_row(g.matmul(g.constant(std::move(patches)), p[kPatchW]), p[kPatchB]);
  const Var groups[] = {patch_emb, g.gather_rows(p[kReturnTable], ret_ids), g.gather_rows(p[kActionTable], act_ids),
                        g.gather_rows(p[kRewardTable], rew_ids)};
  const Var grouped = g.concat_rows(groups);
  const std::size_t L = T * (M + 3);
  std::vector<std::size_t> order;
  order.reserve(L);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < M; ++m) order.push_back(t * M + m);
    order.push_back(T * M + t);
    order.push_back(T * M + T + t);
    order.push_back(T * M + 2 * T + t);
  }
  Var x = g.add(g.gather_rows(grouped, order), g.slice_rows(p[kPosition], 0, L));

  Matrix causal(L, L);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 1; j < L; ++j) causal(i, j) = learners::kMaskedLogit;
  const Var mask = g.constant(std::move(causal));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d / spec_.heads));

  const BlockLayout layout{spec_.heads};
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::size_t base = kFixedSlots + l * layout.stride();
    auto P = [&](std::size_t off) { return p[base + off]; };
    const Var h1 = g.add_row(g.mul_row(g.layer_norm_rows(x), P(layout.ln1_g())), P(layout.ln1_b()));
    std::vector<Var> head_out;
    for (std::size_t h = 0; h < spec_.heads; ++h) {
      const Var q = g.matmul(h1, P(layout.wq(h)));
      const Var k = g.matmul(h1, P(layout.wk(h)));
      const Var v = g.matmul(h1, P(layout.wv(h)));
      const Var scores = g.add(g.scale(g.matmul(q, g.transpose(k)), scale), mask);
      head_out.push_back(g.matmul(g.softmax_rows(scores), v));
    }
    const Var attn = g.add_row(g.matmul(g.concat_cols(head_out), P(layout.wo())), P(layout.bo()));
    x = g.add(x, attn);
    const Var h2 = g.add_row(g.mul_row(g.layer_norm_rows(x), P(layout.ln2_g())), P(layout.ln2_b()));
    const Var hidden = g.tanh(g.add_row(g.matmul(h2, P(layout.w1())), P(layout.b1())));
    x = g.add(x, g.add_row(g.matmul(hidden, P(layout.w2())), P(layout.b2())));
  }

  const std::size_t head = kFixedSlots + spec_.layers * layout.stride();
  std::vector<std::size_t> read;
  for (std::size_t t = last_only ? T - 1 : 0; t < T; ++t) read.push_back(seq.return_position(t));
  const Var z = g.gather_rows(x, read);
  const Var zn = g.add_row(g.mul_row(g.layer_norm_rows(z), p[head]), p[head + 1]);
  return {g.add_row(g.matmul(zn, p[head + 2]), p[head + 3]), g.add_row(g.matmul(zn, p[head + 4]), p[head + 5])};
}

learners::ModelHeads SequenceModel::forward_all(nn::Graph& g, const TokenSequence& seq) {
  return run(g, bind(g), seq, false);
}

namespace {

learners::ModelHeads concat_heads(nn::Graph& g, const std::vector<learners::ModelHeads>& parts) {
  if (parts.size() == 1) return parts.front();
  std::vector<Var> logits, values;
  for (const auto& h : parts) {
    logits.push_back(h.logits);
    values.push_back(h.value);
  }
  return {g.concat_rows(logits), g.concat_rows(values)};
}

learners::HeadValues to_values(const nn::Graph& g, const learners::ModelHeads& h) {
  return {g.value(h.logits), g.value(h.value).data};
}

}  // namespace

learners::ModelHeads SequenceModel::forward(nn::Graph& g, std::span<const TokenSequence> batch) {
  if (batch.empty()) throw ShapeError("sequence model: empty batch");
  const auto p = bind(g);
  std::vector<learners::ModelHeads> parts;
  for (const auto& s : batch) parts.push_back(run(g, p, s, true));
  return concat_heads(g, parts);
}

learners::ModelHeads SequenceModel::forward_all(nn::Graph& g, std::span<const TokenSequence> batch) {
  if (batch.empty()) throw ShapeError("sequence model: empty batch");
  const auto p = bind(g);
  std::vector<learners::ModelHeads> parts;
  for (const auto& s : batch) parts.push_back(run(g, p, s, false));
  return concat_heads(g, parts);
}

learners::HeadValues SequenceModel::infer(std::span<const TokenSequence> batch) const {
  if (batch.empty()) throw ShapeError("sequence model: empty batch");
  nn::Graph g;
  const auto p = bind_constant(g);
  std::vector<learners::ModelHeads> parts;
  for (const auto& s : batch) parts.push_back(run(g, p, s, true));
  return to_values(g, concat_heads(g, parts));
}

learners::HeadValues SequenceModel::infer_all(const TokenSequence& seq) const {
  nn::Graph g;
  return to_values(g, run(g, bind_constant(g), seq, false));
}

std::vector<nn::Parameter*> SequenceModel::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const nn::Parameter*> SequenceModel::parameters() const {
  std::vector<const nn::Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t SequenceModel::parameter_count() const {
  return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                         [](std::size_t n, const nn::Parameter& p) { return n + p.value().size(); });
}

}  // namespace genrl::seq
