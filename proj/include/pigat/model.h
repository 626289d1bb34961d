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

// Pairwise interactive graph attention model.
//
// Forward pass for one (user, item) query:
//
//   e_u, e_i            profile embeddings (n_u*H_u and n_i*H_i wide)
//   S_u (k x n_i*H_i)   item profiles of the user's last-k neighbors
//   S_i (k x H_u)       user IDs of the item's last-k neighbors
//   both sequences get their confidence rows added.
//
//   four attention heads pool a sequence with weights
//   softmax_l(score(query, S[l])):
//     user-interactive  query e_u over S_u -> p_ui
//     user-adaptive     query e_i over S_u -> p_ua
//     item-interactive  query e_i over S_i -> p_ii
//     item-adaptive     query e_u over S_i -> p_ia
//   (`user_query_all_heads` queries every head with e_u instead.)
//
//   h_u  = lrelu(W_u  [e_u  | p_ui] + b_u)
//   h_i  = lrelu(W_i  [e_i  | p_ii] + b_i)
//   h'_u = lrelu(W'_u [p_ui | p_ua] + b'_u)
//   h'_i = lrelu(W'_i [p_ii | p_ia] + b'_i)
//   y    = sigmoid(MLP(dropout([h_u | h_i | h'_u | h'_i])))
//
// The backward pass is written out by hand and checked against central
// finite differences in the tests.

#ifndef PIGAT_MODEL_H_
#define PIGAT_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pigat/confidence.h"
#include "pigat/features.h"
#include "pigat/numeric.h"

namespace pigat {

enum class AttentionKind { kFfn1, kFfn2, kFfn3, kDot, kScaledDot };
enum class PoolingMode { kAttention, kAverage };
enum class Mode { kTrain, kEval };

std::string_view ToString(AttentionKind k);
AttentionKind ParseAttentionKind(std::string_view s);
std::string_view ToString(PoolingMode p);
PoolingMode ParsePoolingMode(std::string_view s);

struct ModelConfig {
  AttentionKind attention = AttentionKind::kFfn3;
  ConfidenceVariant confidence = ConfidenceVariant::kCe;
  PoolingMode pooling = PoolingMode::kAttention;
  // Pool the confidence-augmented sequence (true) or the raw one.
  bool confidence_in_pooling = true;
  bool user_query_all_heads = false;
  std::size_t max_neighbors = 10;
  std::size_t integrate_width = 64;
  std::vector<std::size_t> mlp_hidden = {80, 40};
  double dropout = 0.0;
  double leaky_slope = kDefaultLeakySlope;
};

// Hidden widths of the scoring FFN for each attention kind.
std::vector<std::size_t> AttentionHiddenWidths(AttentionKind kind);

struct AttentionHead {
  AttentionKind kind = AttentionKind::kFfn3;
  std::size_t query_width = 0;
  std::size_t key_width = 0;
  FfnParams ffn;  // [query | key] -> 1, FFN kinds only
  // Query -> key-width projection; dot kinds with unequal widths only.
  bool has_projection = false;
  Param projection_w;
  Param projection_b;

  bool is_ffn() const {
    return kind != AttentionKind::kDot && kind != AttentionKind::kScaledDot;
  }
  std::vector<Param*> Parameters();
};

struct Dense {
  Param w;
  Param b;
};

enum HeadSlot : std::size_t {
  kUserInteractive = 0,
  kUserAdaptive = 1,
  kItemInteractive = 2,
  kItemAdaptive = 3,
};

// Integrate layers, in MLP-input order.
enum IntegrateSlot : std::size_t {
  kUserIntegrate = 0,
  kItemIntegrate = 1,
  kUserAdaptiveIntegrate = 2,
  kItemAdaptiveIntegrate = 3,
};

struct SequenceCache {
  Matrix raw;        // k x width lookups; dead rows are zero
  Matrix augmented;  // raw + confidence
  std::size_t live = 0;
};

struct HeadCache {
  Vector query;               // query as scored (projected for dot kinds)
  std::vector<FfnCache> ffn;  // one per live position
  Vector logits;
  Vector weights;
  Vector pooled;
};

class PigatModel;

struct ForwardCache {
  const PigatModel* owner = nullptr;
  std::uint64_t version = 0;
  Mode mode = Mode::kEval;
  Vector user_profile;  // e_u
  Vector item_profile;  // e_i
  SequenceCache user_seq;
  SequenceCache item_seq;
  std::array<HeadCache, 4> heads;
  std::array<Vector, 4> integrate_in;
  std::array<Vector, 4> integrate_pre;
  Vector mlp_input;  // before dropout
  Vector dropout_mask;
  FfnCache mlp;
  double logit = 0.0;
  double raw_probability = 0.0;
  double probability = 0.0;  // clamped
};

class PigatModel {
 public:
  PigatModel() = default;
  PigatModel(const FeatureSchema& schema, const ModelConfig& config, Rng& rng);

  const ModelConfig& config() const { return config_; }
  std::size_t user_fields() const { return n_user_; }
  std::size_t item_fields() const { return n_item_; }

  // Returns the clamped probability. `rng` is required in train mode when
  // dropout is active. `cache` may be null.
  double Forward(const EncodedInstance& instance, Mode mode, Rng* rng,
                 ForwardCache* cache) const;

  // Accumulates gradients of a loss whose derivative with respect to the
  // pre-sigmoid logit is `grad_logit`.
  void Backward(const EncodedInstance& instance, const ForwardCache& cache,
                double grad_logit);

  // Every parameter in a fixed order (tables, confidence, heads, integrate,
  // MLP). Frozen parameters are included with trainable = false.
  std::vector<Param*> Parameters();
  std::vector<const Param*> Parameters() const;
  void ZeroGrad();
  // Adam step followed by re-pinning the padding rows.
  void ApplyOptimizerStep(AdamState& adam);

  EmbeddingTable& user_table() { return user_table_; }
  EmbeddingTable& item_table() { return item_table_; }
  const EmbeddingTable& user_table() const { return user_table_; }
  const EmbeddingTable& item_table() const { return item_table_; }
  ConfidenceTable& user_confidence() { return user_confidence_; }
  ConfidenceTable& item_confidence() { return item_confidence_; }
  const ConfidenceTable& user_confidence() const { return user_confidence_; }
  const ConfidenceTable& item_confidence() const { return item_confidence_; }
  AttentionHead& head(std::size_t slot) { return heads_[slot]; }
  const AttentionHead& head(std::size_t slot) const { return heads_[slot]; }
  Dense& integrate(std::size_t slot) { return integrate_[slot]; }
  const Dense& integrate(std::size_t slot) const { return integrate_[slot]; }
  FfnParams& mlp() { return mlp_; }
  const FfnParams& mlp() const { return mlp_; }

  std::uint64_t version() const { return version_; }
  // Invalidates outstanding forward caches.
  void BumpVersion() { ++version_; }

 private:
  void ForwardSequence(const EmbeddingTable& table,
                       const ConfidenceTable& confidence,
                       std::span<const std::uint32_t> ids,
                       std::size_t ids_per_slot, std::size_t live,
                       SequenceCache* out) const;
  void ForwardHead(const AttentionHead& head, std::span<const double> query,
                   const SequenceCache& seq, const Mask& mask,
                   HeadCache* out) const;
  // Returns dL/dquery; accumulates dL/d(augmented) and dL/d(raw).
  Vector BackwardHead(AttentionHead& head, std::span<const double> query,
                      const SequenceCache& seq, const HeadCache& hc,
                      std::span<const double> grad_pooled,
                      Matrix& grad_augmented, Matrix& grad_raw);

  ModelConfig config_;
  std::size_t n_user_ = 0;
  std::size_t n_item_ = 0;
  std::size_t user_width_ = 0;
  std::size_t item_width_ = 0;
  EmbeddingTable user_table_;
  EmbeddingTable item_table_;
  ConfidenceTable user_confidence_;  // width n_i * H_i
  ConfidenceTable item_confidence_;  // width H_u
  std::array<AttentionHead, 4> heads_;
  std::array<Dense, 4> integrate_;
  FfnParams mlp_;
  std::uint64_t version_ = 0;
};

// Mean binary cross-entropy over a batch of clamped probabilities.
double LogLoss(std::span<const double> probabilities,
               std::span<const int> labels);

// d(per-instance log loss)/d(logit), scaled by `scale` (1/n for a batch mean).
// Zero when the sigmoid output was clamped.
double LogLossGradLogit(const ForwardCache& cache, int label, double scale);

// Signs of every leaky-relu pre-activation plus the clamp state, used to
// detect finite-difference probes that cross a kink.
std::vector<std::uint8_t> ActivationPattern(const ForwardCache& cache);

}  // namespace pigat

#endif  // PIGAT_MODEL_H_
