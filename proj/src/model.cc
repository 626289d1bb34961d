/*
 * Copyright 2026 The PIGAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pigat/model.h"

#include <algorithm>
#include <cmath>

namespace pigat {

std::string_view ToString(AttentionKind k) {
  switch (k) {
    case AttentionKind::kFfn1:
      return "ffn-1";
    case AttentionKind::kFfn2:
      return "ffn-2";
    case AttentionKind::kFfn3:
      return "ffn-3";
    case AttentionKind::kDot:
      return "dot";
    case AttentionKind::kScaledDot:
      return "scaled-dot";
  }
  return "?";
}

AttentionKind ParseAttentionKind(std::string_view s) {
  for (auto k :
       {AttentionKind::kFfn1, AttentionKind::kFfn2, AttentionKind::kFfn3,
        AttentionKind::kDot, AttentionKind::kScaledDot}) {
    if (ToString(k) == s) return k;
  }
  throw DomainError("unknown attention kind '" + std::string(s) +
                    "' (expected ffn-1|ffn-2|ffn-3|dot|scaled-dot)");
}

std::string_view ToString(PoolingMode p) {
  return p == PoolingMode::kAttention ? "attention" : "average";
}

PoolingMode ParsePoolingMode(std::string_view s) {
  if (s == "attention") return PoolingMode::kAttention;
  if (s == "average") return PoolingMode::kAverage;
  throw DomainError("unknown pooling mode '" + std::string(s) +
                    "' (expected attention|average)");
}

std::vector<std::size_t> AttentionHiddenWidths(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kFfn3:
      return {64, 32};
    case AttentionKind::kFfn2:
      return {32};
    default:
      return {};
  }
}

std::vector<Param*> AttentionHead::Parameters() {
  if (is_ffn()) return ffn.Parameters();
  if (has_projection) return {&projection_w, &projection_b};
  return {};
}

namespace {

const char* const kHeadNames[4] = {
    "head.user_interactive", "head.user_adaptive", "head.item_interactive",
    "head.item_adaptive"};
const char* const kIntegrateNames[4] = {"integrate.user", "integrate.item",
                                        "integrate.user_adaptive",
                                        "integrate.item_adaptive"};

AttentionHead MakeHead(const char* name, AttentionKind kind,
                       std::size_t query_width, std::size_t key_width,
                       double slope, Rng& rng) {
  AttentionHead h;
  h.kind = kind;
  h.query_width = query_width;
  h.key_width = key_width;
  if (h.is_ffn()) {
    std::vector<std::size_t> widths = {query_width + key_width};
    for (std::size_t w : AttentionHiddenWidths(kind)) widths.push_back(w);
    widths.push_back(1);
    h.ffn = MakeFfn(name, widths, /*activate_output=*/false, rng, slope);
  } else if (query_width != key_width) {
    h.has_projection = true;
    h.projection_w =
        Param(std::string(name) + ".proj.w", key_width, query_width);
    h.projection_b = Param(std::string(name) + ".proj.b", 1, key_width);
    XavierUniform(h.projection_w.value, query_width, key_width, rng);
  }
  return h;
}

Dense MakeDense(const char* name, std::size_t in, std::size_t out, Rng& rng) {
  Dense d{Param(std::string(name) + ".w", out, in),
          Param(std::string(name) + ".b", 1, out)};
  XavierUniform(d.w.value, in, out, rng);
  return d;
}

Vector Concat(std::span<const double> a, std::span<const double> b) {
  Vector out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

PigatModel::PigatModel(const FeatureSchema& schema, const ModelConfig& config,
                       Rng& rng)
    : config_(config),
      n_user_(schema.user_fields.size()),
      n_item_(schema.item_fields.size()),
      user_width_(schema.user_width),
      item_width_(schema.item_width) {
  schema.Validate();
  if (config.max_neighbors == 0)
    throw DomainError("max_neighbors must be >= 1");
  if (config.integrate_width == 0) {
    throw DomainError("integrate_width must be >= 1");
  }
  if (!(config.dropout >= 0.0) || config.dropout >= 1.0) {
    throw DomainError("dropout must lie in [0, 1)");
  }
  const std::size_t k = config.max_neighbors;
  const std::size_t eu = n_user_ * user_width_;  // e_u and query width
  const std::size_t ei = n_item_ * item_width_;  // e_i and S_u row width
  const std::size_t si = user_width_;            // S_i row width
  const double slope = config.leaky_slope;

  user_table_ = EmbeddingTable("table.user", schema.TableRows(Part::kUser),
                               user_width_, rng);
  item_table_ = EmbeddingTable("table.item", schema.TableRows(Part::kItem),
                               item_width_, rng);
  user_confidence_ =
      BuildConfidence(config.confidence, k, ei, rng, "confidence.user_seq");
  item_confidence_ =
      BuildConfidence(config.confidence, k, si, rng, "confidence.item_seq");

  const bool lit = config.user_query_all_heads;
  heads_[kUserInteractive] =
      MakeHead(kHeadNames[0], config.attention, eu, ei, slope, rng);
  heads_[kUserAdaptive] =
      MakeHead(kHeadNames[1], config.attention, lit ? eu : ei, ei, slope, rng);
  heads_[kItemInteractive] =
      MakeHead(kHeadNames[2], config.attention, lit ? eu : ei, si, slope, rng);
  heads_[kItemAdaptive] =
      MakeHead(kHeadNames[3], config.attention, eu, si, slope, rng);

  const std::size_t d = config.integrate_width;
  integrate_[kUserIntegrate] = MakeDense(kIntegrateNames[0], eu + ei, d, rng);
  integrate_[kItemIntegrate] = MakeDense(kIntegrateNames[1], ei + si, d, rng);
  integrate_[kUserAdaptiveIntegrate] =
      MakeDense(kIntegrateNames[2], 2 * ei, d, rng);
  integrate_[kItemAdaptiveIntegrate] =
      MakeDense(kIntegrateNames[3], 2 * si, d, rng);

  std::vector<std::size_t> widths = {4 * d};
  for (std::size_t w : config.mlp_hidden) widths.push_back(w);
  widths.push_back(1);
  mlp_ = MakeFfn("mlp", widths, /*activate_output=*/false, rng, slope);
}

std::vector<Param*> PigatModel::Parameters() {
  std::vector<Param*> out = {&user_table_.param(), &item_table_.param()};
  if (!user_confidence_.table.value.empty()) {
    out.push_back(&user_confidence_.table);
  }
  if (!item_confidence_.table.value.empty()) {
    out.push_back(&item_confidence_.table);
  }
  for (auto& h : heads_) {
    for (Param* p : h.Parameters()) out.push_back(p);
  }
  for (auto& d : integrate_) {
    out.push_back(&d.w);
    out.push_back(&d.b);
  }
  for (Param* p : mlp_.Parameters()) out.push_back(p);
  return out;
}

std::vector<const Param*> PigatModel::Parameters() const {
  auto mutable_params = const_cast<PigatModel*>(this)->Parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void PigatModel::ZeroGrad() {
  for (Param* p : Parameters()) p->grad.SetZero();
}

void PigatModel::ApplyOptimizerStep(AdamState& adam) {
  adam.Step(Parameters());
  user_table_.PinPadding();
  item_table_.PinPadding();
  BumpVersion();
}

void PigatModel::ForwardSequence(const EmbeddingTable& table,
                                 const ConfidenceTable& confidence,
                                 std::span<const std::uint32_t> ids,
                                 std::size_t ids_per_slot, std::size_t live,
                                 SequenceCache* out) const {
  const std::size_t k = config_.max_neighbors;
  const std::size_t width = ids_per_slot * table.width();
  out->raw = Matrix(k, width);
  out->live = live;
  for (std::size_t l = 0; l < live; ++l) {
    table.LookupInto(ids.subspan(l * ids_per_slot, ids_per_slot),
                     out->raw.row(l));
  }
  out->augmented = out->raw;
  ApplyConfidence(confidence, out->augmented, live);
}

void PigatModel::ForwardHead(const AttentionHead& head,
                             std::span<const double> query,
                             const SequenceCache& seq, const Mask& mask,
                             HeadCache* out) const {
  const std::size_t k = config_.max_neighbors;
  const std::size_t live = seq.live;
  out->logits.assign(k, 0.0);
  out->ffn.clear();
  out->query.clear();
  if (config_.pooling == PoolingMode::kAverage) {
    out->weights.assign(k, 0.0);
    for (std::size_t l = 0; l < live; ++l) {
      out->weights[l] = 1.0 / static_cast<double>(live);
    }
  } else {
    if (head.is_ffn()) {
      out->ffn.resize(live);
      Vector input(head.query_width + head.key_width);
      std::copy(query.begin(), query.end(), input.begin());
      for (std::size_t l = 0; l < live; ++l) {
        auto key = seq.augmented.row(l);
        std::copy(key.begin(), key.end(), input.begin() + head.query_width);
        out->logits[l] = FfnForward(head.ffn, input, &out->ffn[l])[0];
      }
    } else {
      out->query = head.has_projection
                       ? AffineForward(head.projection_w.value, query,
                                       head.projection_b.value.values())
                       : Vector(query.begin(), query.end());
      const double scale =
          head.kind == AttentionKind::kScaledDot
              ? 1.0 / std::sqrt(static_cast<double>(head.key_width))
              : 1.0;
      for (std::size_t l = 0; l < live; ++l) {
        out->logits[l] = scale * Dot(out->query, seq.augmented.row(l));
      }
    }
    out->weights = MaskedSoftmax(out->logits, mask);
  }
  const Matrix& source =
      config_.confidence_in_pooling ? seq.augmented : seq.raw;
  out->pooled.assign(source.cols(), 0.0);
  for (std::size_t l = 0; l < live; ++l) {
    Axpy(out->weights[l], source.row(l), out->pooled);
  }
}

double PigatModel::Forward(const EncodedInstance& instance, Mode mode, Rng* rng,
                           ForwardCache* cache) const {
  const std::size_t k = config_.max_neighbors;
  if (instance.user_profile.size() != n_user_ ||
      instance.item_profile.size() != n_item_ ||
      instance.user_mask.size() != k || instance.item_mask.size() != k ||
      instance.user_neighbors.size() != k * n_item_ ||
      instance.item_neighbors.size() != k || instance.user_len > k ||
      instance.item_len > k) {
    throw SchemaError("instance was not encoded for this model's schema");
  }
  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.owner = this;
  c.version = version_;
  c.mode = mode;
  c.user_profile = user_table_.Lookup(instance.user_profile);
  c.item_profile = item_table_.Lookup(instance.item_profile);
  ForwardSequence(item_table_, user_confidence_, instance.user_neighbors,
                  n_item_, instance.user_len, &c.user_seq);
  ForwardSequence(user_table_, item_confidence_, instance.item_neighbors, 1,
                  instance.item_len, &c.item_seq);

  const bool lit = config_.user_query_all_heads;
  const Vector& eu = c.user_profile;
  const Vector& ei = c.item_profile;
  ForwardHead(heads_[kUserInteractive], eu, c.user_seq, instance.user_mask,
              &c.heads[kUserInteractive]);
  ForwardHead(heads_[kUserAdaptive], lit ? eu : ei, c.user_seq,
              instance.user_mask, &c.heads[kUserAdaptive]);
  ForwardHead(heads_[kItemInteractive], lit ? eu : ei, c.item_seq,
              instance.item_mask, &c.heads[kItemInteractive]);
  ForwardHead(heads_[kItemAdaptive], eu, c.item_seq, instance.item_mask,
              &c.heads[kItemAdaptive]);

  const auto& p = c.heads;
  c.integrate_in[kUserIntegrate] = Concat(eu, p[kUserInteractive].pooled);
  c.integrate_in[kItemIntegrate] = Concat(ei, p[kItemInteractive].pooled);
  c.integrate_in[kUserAdaptiveIntegrate] =
      Concat(p[kUserInteractive].pooled, p[kUserAdaptive].pooled);
  c.integrate_in[kItemAdaptiveIntegrate] =
      Concat(p[kItemInteractive].pooled, p[kItemAdaptive].pooled);

  c.mlp_input.clear();
  for (std::size_t s = 0; s < 4; ++s) {
    c.integrate_pre[s] = AffineForward(integrate_[s].w.value, c.integrate_in[s],
                                       integrate_[s].b.value.values());
    const Vector h = LeakyRelu(c.integrate_pre[s], config_.leaky_slope);
    c.mlp_input.insert(c.mlp_input.end(), h.begin(), h.end());
  }

  const bool training = mode == Mode::kTrain && config_.dropout > 0.0;
  if (training && rng == nullptr) {
    throw UsageError("train-mode forward with dropout needs an rng");
  }
  Rng unused(0);
  c.dropout_mask = DropoutMask(c.mlp_input.size(), config_.dropout,
                               training ? *rng : unused, training);
  Vector x = c.mlp_input;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] *= c.dropout_mask[j];

  c.logit = FfnForward(mlp_, x, &c.mlp)[0];
  c.raw_probability = Sigmoid(c.logit);
  c.probability = ClampProbability(c.raw_probability);
  return c.probability;
}

Vector PigatModel::BackwardHead(AttentionHead& head,
                                std::span<const double> query,
                                const SequenceCache& seq, const HeadCache& hc,
                                std::span<const double> grad_pooled,
                                Matrix& grad_augmented, Matrix& grad_raw) {
  const std::size_t k = config_.max_neighbors;
  const std::size_t live = seq.live;
  Vector grad_query(head.query_width, 0.0);
  if (live == 0) return grad_query;

  const bool augmented_source = config_.confidence_in_pooling;
  const Matrix& source = augmented_source ? seq.augmented : seq.raw;
  Matrix& grad_source = augmented_source ? grad_augmented : grad_raw;
  Vector grad_weights(k, 0.0);
  for (std::size_t l = 0; l < live; ++l) {
    grad_weights[l] = Dot(grad_pooled, source.row(l));
    Axpy(hc.weights[l], grad_pooled, grad_source.row(l));
  }
  if (config_.pooling == PoolingMode::kAverage) return grad_query;

  const Vector grad_logits = SoftmaxBackward(hc.weights, grad_weights);
  if (head.is_ffn()) {
    for (std::size_t l = 0; l < live; ++l) {
      const Vector g =
          FfnBackward(head.ffn, hc.ffn[l], std::span(&grad_logits[l], 1));
      Axpy(1.0, std::span(g).first(head.query_width), grad_query);
      Axpy(1.0, std::span(g).subspan(head.query_width), grad_augmented.row(l));
    }
    return grad_query;
  }

  const double scale =
      head.kind == AttentionKind::kScaledDot
          ? 1.0 / std::sqrt(static_cast<double>(head.key_width))
          : 1.0;
  Vector grad_scored(head.key_width, 0.0);
  for (std::size_t l = 0; l < live; ++l) {
    const double g = scale * grad_logits[l];
    Axpy(g, seq.augmented.row(l), grad_scored);
    Axpy(g, hc.query, grad_augmented.row(l));
  }
  if (head.has_projection) {
    AffineBackward(head.projection_w.value, query, grad_scored,
                   &head.projection_w.grad, head.projection_b.grad.values(),
                   grad_query);
  } else {
    Axpy(1.0, grad_scored, grad_query);
  }
  return grad_query;
}

void PigatModel::Backward(const EncodedInstance& instance,
                          const ForwardCache& c, double grad_logit) {
  if (c.owner != this || c.version != version_) {
    throw UsageError("backward called with a stale or foreign forward cache");
  }
  const double slope = config_.leaky_slope;
  const std::size_t d = config_.integrate_width;

  Vector grad_x = FfnBackward(mlp_, c.mlp, std::span(&grad_logit, 1));
  for (std::size_t j = 0; j < grad_x.size(); ++j) {
    grad_x[j] *= c.dropout_mask[j];
  }

  std::array<Vector, 4> grad_in;
  for (std::size_t s = 0; s < 4; ++s) {
    Vector g(grad_x.begin() + s * d, grad_x.begin() + (s + 1) * d);
    LeakyReluBackward(c.integrate_pre[s], slope, g);
    grad_in[s].assign(c.integrate_in[s].size(), 0.0);
    AffineBackward(integrate_[s].w.value, c.integrate_in[s], g,
                   &integrate_[s].w.grad, integrate_[s].b.grad.values(),
                   grad_in[s]);
  }

  const std::size_t eu = c.user_profile.size();
  const std::size_t ei = c.item_profile.size();
  const std::size_t su = c.user_seq.raw.cols();
  const std::size_t si = c.item_seq.raw.cols();
  auto part = [](const Vector& v, std::size_t from, std::size_t len) {
    return std::span<const double>(v).subspan(from, len);
  };

  Vector grad_eu(part(grad_in[kUserIntegrate], 0, eu).begin(),
                 part(grad_in[kUserIntegrate], 0, eu).end());
  Vector grad_ei(part(grad_in[kItemIntegrate], 0, ei).begin(),
                 part(grad_in[kItemIntegrate], 0, ei).end());
  std::array<Vector, 4> grad_pooled;
  grad_pooled[kUserInteractive].assign(su, 0.0);
  Axpy(1.0, part(grad_in[kUserIntegrate], eu, su),
       grad_pooled[kUserInteractive]);
  Axpy(1.0, part(grad_in[kUserAdaptiveIntegrate], 0, su),
       grad_pooled[kUserInteractive]);
  grad_pooled[kUserAdaptive].assign(
      part(grad_in[kUserAdaptiveIntegrate], su, su).begin(),
      part(grad_in[kUserAdaptiveIntegrate], su, su).end());
  grad_pooled[kItemInteractive].assign(si, 0.0);
  Axpy(1.0, part(grad_in[kItemIntegrate], ei, si),
       grad_pooled[kItemInteractive]);
  Axpy(1.0, part(grad_in[kItemAdaptiveIntegrate], 0, si),
       grad_pooled[kItemInteractive]);
  grad_pooled[kItemAdaptive].assign(
      part(grad_in[kItemAdaptiveIntegrate], si, si).begin(),
      part(grad_in[kItemAdaptiveIntegrate], si, si).end());

  const std::size_t k = config_.max_neighbors;
  Matrix user_aug(k, su), user_raw(k, su), item_aug(k, si), item_raw(k, si);
  const bool lit = config_.user_query_all_heads;

  auto accumulate_query = [&](const Vector& g, bool is_user_query) {
    Axpy(1.0, g, is_user_query ? grad_eu : grad_ei);
  };
  accumulate_query(
      BackwardHead(heads_[kUserInteractive], c.user_profile, c.user_seq,
                   c.heads[kUserInteractive], grad_pooled[kUserInteractive],
                   user_aug, user_raw),
      true);
  accumulate_query(
      BackwardHead(heads_[kUserAdaptive], lit ? c.user_profile : c.item_profile,
                   c.user_seq, c.heads[kUserAdaptive],
                   grad_pooled[kUserAdaptive], user_aug, user_raw),
      lit);
  accumulate_query(
      BackwardHead(heads_[kItemInteractive],
                   lit ? c.user_profile : c.item_profile, c.item_seq,
                   c.heads[kItemInteractive], grad_pooled[kItemInteractive],
                   item_aug, item_raw),
      lit);
  accumulate_query(BackwardHead(heads_[kItemAdaptive], c.user_profile,
                                c.item_seq, c.heads[kItemAdaptive],
                                grad_pooled[kItemAdaptive], item_aug, item_raw),
                   true);

  // augmented = raw + confidence
  ConfidenceBackward(user_confidence_, user_aug, c.user_seq.live);
  ConfidenceBackward(item_confidence_, item_aug, c.item_seq.live);
  Axpy(1.0, user_aug.values(), user_raw.values());
  Axpy(1.0, item_aug.values(), item_raw.values());

  for (std::size_t l = 0; l < c.user_seq.live; ++l) {
    item_table_.ScatterGradient(
        std::span(instance.user_neighbors).subspan(l * n_item_, n_item_),
        user_raw.row(l));
  }
  for (std::size_t l = 0; l < c.item_seq.live; ++l) {
    user_table_.ScatterGradient(
        std::span(instance.item_neighbors).subspan(l, 1), item_raw.row(l));
  }
  user_table_.ScatterGradient(instance.user_profile, grad_eu);
  item_table_.ScatterGradient(instance.item_profile, grad_ei);
}

double LogLoss(std::span<const double> probabilities,
               std::span<const int> labels) {
  if (probabilities.empty()) throw DomainError("log loss of an empty batch");
  if (probabilities.size() != labels.size()) {
    throw ShapeError("log loss: " + std::to_string(probabilities.size()) +
                     " predictions vs " + std::to_string(labels.size()) +
                     " labels");
  }
  double total = 0.0;
  for (std::size_t b = 0; b < probabilities.size(); ++b) {
    const double p = ClampProbability(probabilities[b]);
    total -= labels[b] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(probabilities.size());
}

double LogLossGradLogit(const ForwardCache& cache, int label, double scale) {
  if (cache.raw_probability != cache.probability) return 0.0;
  return scale * (cache.raw_probability - static_cast<double>(label));
}

std::vector<std::uint8_t> ActivationPattern(const ForwardCache& cache) {
  std::vector<std::uint8_t> signs;
  auto add_ffn = [&](const FfnCache& fc) {
    for (std::size_t k = 0; k < fc.pre.size(); ++k) {
      if (k + 1 == fc.pre.size()) break;  // output layers are linear
      for (double v : fc.pre[k]) signs.push_back(v > 0.0);
    }
  };
  for (const auto& h : cache.heads) {
    for (const auto& fc : h.ffn) add_ffn(fc);
  }
  for (const auto& pre : cache.integrate_pre) {
    for (double v : pre) signs.push_back(v > 0.0);
  }
  add_ffn(cache.mlp);
  signs.push_back(cache.raw_probability != cache.probability);
  return signs;
}

}  // namespace pigat
