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

// Latent-factor interaction generator.
//
// Items belong to categories and sit near their category's center. Users own
// one or more interest vectors; affinity to an item is the best inner product
// over them. Each event picks a user uniformly, draws candidate items from a
// power-law popularity distribution, chooses one by softmax over affinity and
// labels it Bernoulli(sigmoid(label_scale * affinity + label_bias)). After
// acting, the user's interests drift. Diffuse drift moves every interest by
// u <- sqrt(1 - r^2) u + r xi; jump drift, with probability r, redraws one
// interest from scratch.

#ifndef PIGAT_SYNTHETIC_H_
#define PIGAT_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pigat/features.h"
#include "pigat/graph.h"
#include "pigat/numeric.h"

namespace pigat {

enum class DriftMode { kDiffuse, kJump };

struct SyntheticSpec {
  std::size_t users = 200;
  std::size_t items = 2000;
  std::size_t events = 10000;
  std::size_t dim = 8;
  double drift = 0.0;  // r, per event of the acting user
  DriftMode drift_mode = DriftMode::kDiffuse;
  double popularity_exponent = 1.0;
  std::size_t categories = 10;
  double category_spread = 0.5;
  std::size_t interests = 1;
  // Interests start (and jump) near a random category center.
  bool anchored_interests = false;
  // Candidates per event; 1 means choice by popularity alone.
  std::size_t candidates = 1;
  double choice_sharpness = 0.0;
  double label_scale = 1.0;
  double label_bias = 0.0;
  // Pairs users (2j, 2j+1) with opposite interest vectors.
  bool mirror_users = false;
  std::uint64_t seed = 1;

  void Validate() const;
  // `key = value` lines; unknown keys are errors.
  static SyntheticSpec Parse(std::istream& in);
  static SyntheticSpec Load(const std::string& path);
  void Write(std::ostream& out) const;
};

struct SyntheticEvent {
  Timestamp timestamp = 0;
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  int label = 0;
  double affinity = 0.0;
};

struct SyntheticData {
  SyntheticSpec spec;
  std::vector<SyntheticEvent> events;
  std::vector<std::uint32_t> item_category;
  std::vector<std::uint32_t> user_taste;  // nearest category at t = 0
  Matrix item_latent;                     // items x dim
  Matrix user_initial;                    // (users * interests) x dim
  Matrix user_final;

  // Schema of the emitted files: user fields uid, taste; item fields iid,
  // cat; binary signal.
  FeatureSchema Schema() const;
  void WriteInteractions(std::ostream& out) const;
  void WriteLatents(std::ostream& out) const;
  // Interaction count per item over all events.
  std::vector<std::size_t> ItemDegrees() const;
};

SyntheticData GenerateSynthetic(const SyntheticSpec& spec, Rng& rng);

struct DegreeSummary {
  std::size_t items = 0;
  std::size_t touched_items = 0;
  std::size_t max_degree = 0;
  std::size_t at_most_3 = 0;
  double longtail_fraction = 0.0;  // share of items with degree <= 3
  double positive_rate = 0.0;
};

DegreeSummary SummarizeDegrees(const SyntheticData& data);

}  // namespace pigat

#endif  // PIGAT_SYNTHETIC_H_
