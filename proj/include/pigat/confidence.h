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

// Interaction-confidence vectors added to neighbor embedding sequences.
//
// Positions are window-relative: in a sequence of L live neighbors, the
// oldest has l = 1 and the newest l = L. Because the decaying variants depend
// on both l and L, every table is stored as k*k rows indexed by (L, l) with
// row = (L - 1) * k + (l - 1); rows with l > L are unused.

#ifndef PIGAT_CONFIDENCE_H_
#define PIGAT_CONFIDENCE_H_

#include <cstddef>
#include <string>
#include <string_view>

#include "pigat/numeric.h"

namespace pigat {

enum class ConfidenceVariant { kNone, kPe, kFce, kRce, kCe };

std::string_view ToString(ConfidenceVariant v);
ConfidenceVariant ParseConfidenceVariant(std::string_view s);

// exp(l - L - 1) * cos((i - 1) * pi / H) with 1-based l and i.
double DecayingConfidence(std::size_t l, std::size_t L, std::size_t i,
                          std::size_t H);

// Sinusoidal positional encoding at 0-based position `pos`, unit `i`
// (0-based) of width H.
double PositionalEncoding(std::size_t pos, std::size_t i, std::size_t H);

inline constexpr double kRandomConfidenceInit = 0.01;

struct ConfidenceTable {
  ConfidenceVariant variant = ConfidenceVariant::kNone;
  std::size_t max_len = 0;  // k
  std::size_t width = 0;    // H
  Param table;              // k*k x H; empty for kNone

  bool trainable() const {
    return variant == ConfidenceVariant::kRce ||
           variant == ConfidenceVariant::kCe;
  }
  std::size_t RowIndex(std::size_t l, std::size_t L) const {
    return (L - 1) * max_len + (l - 1);
  }
};

ConfidenceTable BuildConfidence(ConfidenceVariant variant, std::size_t k,
                                std::size_t width, Rng& rng,
                                std::string name = "confidence");

// Adds the confidence row of every live position 1..live_len to `neighbors`
// (k x H). Dead rows are left untouched.
void ApplyConfidence(const ConfidenceTable& table, Matrix& neighbors,
                     std::size_t live_len);

// Accumulates dL/d(table) from dL/d(augmented neighbors) when trainable.
void ConfidenceBackward(ConfidenceTable& table, const Matrix& grad_neighbors,
                        std::size_t live_len);

}  // namespace pigat

#endif  // PIGAT_CONFIDENCE_H_
