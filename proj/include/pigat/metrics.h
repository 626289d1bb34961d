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

#ifndef PIGAT_METRICS_H_
#define PIGAT_METRICS_H_

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pigat {

class UndefinedAucError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;
  // Training-set interaction count of each instance's item.
  std::vector<std::size_t> item_degrees;

  void Validate() const;
};

/// Probability that a random positive outscores a random negative, with ties
/// credited one half. Runs in O(n log n) by averaging ranks within tie
/// groups. Throws UndefinedAucError when either class is empty.
double Auc(std::span<const double> scores, std::span<const int> labels);
double Auc(const ScoredSet& scored);

inline constexpr std::size_t kNoDegreeLimit =
    std::numeric_limits<std::size_t>::max();

/// AUC restricted to instances whose item degree is at most `max_degree`.
/// Returns nullopt when the filtered subset lacks a class.
std::optional<double> LongtailAuc(const ScoredSet& scored,
                                  std::size_t max_degree);

}  // namespace pigat

#endif  // PIGAT_METRICS_H_
