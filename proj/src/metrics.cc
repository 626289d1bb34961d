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

#include "pigat/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

namespace pigat {

void ScoredSet::Validate() const {
  if (scores.size() != labels.size() ||
      (!item_degrees.empty() && item_degrees.size() != scores.size())) {
    throw std::invalid_argument("scored set columns differ in length");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("non-binary label");
  }
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(labels.size()) +
                                " labels");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Sum of the (1-based, tie-averaged) ranks of the positives. Ranks are
  // doubled so that tie averages stay integral and the sum stays exact.
  std::size_t positives = 0;
  std::uint64_t doubled_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      group_pos += labels[order[j]] == 1 ? 1 : 0;
      ++j;
    }
    // Ranks i+1..j average to (i + 1 + j) / 2.
    doubled_rank_sum += static_cast<std::uint64_t>(group_pos) * (i + 1 + j);
    positives += group_pos;
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedAucError("auc is undefined: " + std::to_string(positives) +
                            " positives, " + std::to_string(negatives) +
                            " negatives");
  }
  // Mann-Whitney U = rank_sum - m+(m+ + 1)/2, a multiple of 1/2.
  const std::uint64_t doubled_u =
      doubled_rank_sum -
      static_cast<std::uint64_t>(positives) * (positives + 1);
  return (static_cast<double>(doubled_u) / 2.0) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

double Auc(const ScoredSet& scored) {
  scored.Validate();
  return Auc(scored.scores, scored.labels);
}

std::optional<double> LongtailAuc(const ScoredSet& scored,
                                  std::size_t max_degree) {
  scored.Validate();
  if (scored.item_degrees.size() != scored.scores.size()) {
    throw std::invalid_argument("long-tail auc needs item degrees");
  }
  std::vector<double> scores;
  std::vector<int> labels;
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    if (scored.item_degrees[i] > max_degree) continue;
    scores.push_back(scored.scores[i]);
    labels.push_back(scored.labels[i]);
    (scored.labels[i] == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) return std::nullopt;
  return Auc(scores, labels);
}

}  // namespace pigat
