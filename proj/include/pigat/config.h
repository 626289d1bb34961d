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

// Training configuration and its `key = value` file format.

#ifndef PIGAT_CONFIG_H_
#define PIGAT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pigat/confidence.h"
#include "pigat/model.h"

namespace pigat {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraphMode { kDynamic, kStatic };

std::string_view ToString(GraphMode m);
GraphMode ParseGraphMode(std::string_view s);

struct TrainConfig {
  double learning_rate = 1e-3;
  double decay_rate = 1.0;
  int decay_every = 1;  // epochs between decays
  double l2 = 1e-5;
  double dropout = 0.0;
  std::size_t batch_size = 256;
  int epochs = 10;
  std::uint64_t seed = 1;
  ConfidenceVariant confidence = ConfidenceVariant::kCe;
  AttentionKind attention = AttentionKind::kFfn3;
  GraphMode graph_mode = GraphMode::kDynamic;
  PoolingMode pooling = PoolingMode::kAttention;
  std::size_t max_neighbors = 10;
  std::size_t embed_user = 16;
  std::size_t embed_item = 16;
  std::size_t integrate_width = 64;
  bool confidence_in_pooling = true;
  bool user_query_all_heads = false;
  bool include_negative_neighbors = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
  ModelConfig ToModelConfig() const;

  // Parses `key = value` lines ('#' comments). Unknown keys are errors;
  // absent keys keep their defaults.
  static TrainConfig Parse(std::istream& in);
  static TrainConfig Load(const std::string& path);
  // Applies one `key = value` assignment.
  void Set(const std::string& key, const std::string& value);
  // Writes every key, defaults included, in a fixed order.
  void Write(std::ostream& out) const;
  std::string Fingerprint() const;

  static const std::vector<std::string>& Keys();
};

// Splits `key = value` lines into ordered pairs; shared by every plain-text
// config format in the project.
std::vector<std::pair<std::string, std::string>> ReadKeyValues(
    std::istream& in);

}  // namespace pigat

#endif  // PIGAT_CONFIG_H_
