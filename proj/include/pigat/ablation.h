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

// Config-by-seed experiment matrix.
//
// Matrix file: `key = value` lines before the first section form the shared
// base config (plus `seeds = 1,2,3`); each `[name]` section starts from the
// base and applies its own overrides.

#ifndef PIGAT_ABLATION_H_
#define PIGAT_ABLATION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pigat/config.h"
#include "pigat/data.h"

namespace pigat {

inline constexpr std::array<std::size_t, 3> kLongtailThresholds = {3, 5, 10};

struct AblationEntry {
  std::string name;
  TrainConfig config;
};

struct AblationMatrix {
  std::vector<AblationEntry> entries;
  std::vector<std::uint64_t> seeds = {1};

  static AblationMatrix Parse(std::istream& in);
  static AblationMatrix Load(const std::string& path);
};

struct AblationResult {
  std::string name;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::optional<double> test_auc;
  std::array<std::optional<double>, kLongtailThresholds.size()> longtail;
  double wall_seconds = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct AblationSummary {
  std::string name;
  std::size_t runs = 0;  // successful runs with a defined test AUC
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample standard deviation; 0 for a single run
  std::array<std::optional<double>, kLongtailThresholds.size()> mean_longtail;
  std::array<std::optional<double>, kLongtailThresholds.size()> std_longtail;
};

using ResultCallback = std::function<void(const AblationResult&)>;

// Trains every entry once per seed (the seed overrides the entry's own) and
// scores the test split. A failed run is recorded with its message.
std::vector<AblationResult> RunAblation(
    const AblationMatrix& matrix, const Dataset& data,
    const ResultCallback& on_result = nullptr);

// Trains one config and scores its test split.
AblationResult RunOne(const std::string& name, const TrainConfig& config,
                      const FeatureSchema& schema,
                      const InstanceSet& instances);

std::vector<AblationSummary> Summarize(
    const std::vector<AblationResult>& results);

// Header, one row per run, then `mean` and `std` rows per config.
void WriteAblationTable(std::ostream& out,
                        const std::vector<AblationResult>& results);

}  // namespace pigat

#endif  // PIGAT_ABLATION_H_
