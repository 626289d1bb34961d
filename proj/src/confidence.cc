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

#include "pigat/confidence.h"

#include <cmath>
#include <numbers>

namespace pigat {

std::string_view ToString(ConfidenceVariant v) {
  switch (v) {
    case ConfidenceVariant::kNone:
      return "none";
    case ConfidenceVariant::kPe:
      return "pe";
    case ConfidenceVariant::kFce:
      return "fce";
    case ConfidenceVariant::kRce:
      return "rce";
    case ConfidenceVariant::kCe:
      return "ce";
  }
  return "?";
}

ConfidenceVariant ParseConfidenceVariant(std::string_view s) {
  for (auto v : {ConfidenceVariant::kNone, ConfidenceVariant::kPe,
                 ConfidenceVariant::kFce, ConfidenceVariant::kRce,
                 ConfidenceVariant::kCe}) {
    if (ToString(v) == s) return v;
  }
  throw DomainError("unknown confidence variant '" + std::string(s) +
                    "' (expected none|pe|fce|rce|ce)");
}

double DecayingConfidence(std::size_t l, std::size_t L, std::size_t i,
                          std::size_t H) {
  const double order = static_cast<double>(l) - static_cast<double>(L) - 1.0;
  return std::exp(order) * std::cos(static_cast<double>(i - 1) *
                                    std::numbers::pi / static_cast<double>(H));
}

double PositionalEncoding(std::size_t pos, std::size_t i, std::size_t H) {
  const double pair = static_cast<double>(i - i % 2);
  const double angle = static_cast<double>(pos) /
                       std::pow(10000.0, pair / static_cast<double>(H));
  return i % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

ConfidenceTable BuildConfidence(ConfidenceVariant variant, std::size_t k,
                                std::size_t width, Rng& rng, std::string name) {
  if (k == 0 || width == 0) {
    throw DomainError("confidence table needs k >= 1 and H >= 1");
  }
  ConfidenceTable t;
  t.variant = variant;
  t.max_len = k;
  t.width = width;
  if (variant == ConfidenceVariant::kNone) {
    t.table = Param(std::move(name), 0, width, false);
    return t;
  }
  t.table = Param(std::move(name), k * k, width, t.trainable());
  for (std::size_t L = 1; L <= k; ++L) {
    for (std::size_t l = 1; l <= k; ++l) {
      auto row = t.table.value.row(t.RowIndex(l, L));
      for (std::size_t i = 1; i <= width; ++i) {
        double v = 0.0;
        switch (variant) {
          case ConfidenceVariant::kFce:
          case ConfidenceVariant::kCe:
            v = DecayingConfidence(l, L, i, width);
            break;
          case ConfidenceVariant::kPe:
            v = PositionalEncoding(l - 1, i - 1, width);
            break;
          case ConfidenceVariant::kRce:
            v = UniformReal(rng, -kRandomConfidenceInit, kRandomConfidenceInit);
            break;
          case ConfidenceVariant::kNone:
            break;
        }
        row[i - 1] = v;
      }
    }
  }
  return t;
}

void ApplyConfidence(const ConfidenceTable& table, Matrix& neighbors,
                     std::size_t live_len) {
  if (table.variant == ConfidenceVariant::kNone || live_len == 0) return;
  if (neighbors.cols() != table.width) {
    throw ShapeError("confidence width " + std::to_string(table.width) +
                     " vs neighbor width " + std::to_string(neighbors.cols()));
  }
  if (live_len > table.max_len || live_len > neighbors.rows()) {
    throw ShapeError("live length " + std::to_string(live_len) +
                     " exceeds the confidence window");
  }
  for (std::size_t l = 1; l <= live_len; ++l) {
    Axpy(1.0, table.table.value.row(table.RowIndex(l, live_len)),
         neighbors.row(l - 1));
  }
}

void ConfidenceBackward(ConfidenceTable& table, const Matrix& grad_neighbors,
                        std::size_t live_len) {
  if (!table.trainable() || live_len == 0) return;
  if (grad_neighbors.cols() != table.width) {
    throw ShapeError("confidence backward: width mismatch");
  }
  for (std::size_t l = 1; l <= live_len; ++l) {
    Axpy(1.0, grad_neighbors.row(l - 1),
         table.table.grad.row(table.RowIndex(l, live_len)));
  }
}

}  // namespace pigat
