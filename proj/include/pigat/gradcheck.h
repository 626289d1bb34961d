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

// Full-model gradient verification against central finite differences.
//
// The relative error of one coordinate is
//   |analytic - numeric| / max(|analytic|, |numeric|, abs_floor).
// A probe whose +h or -h evaluation flips the sign of any leaky-relu
// pre-activation (or the probability clamp) straddles a point where the
// loss is not differentiable; such probes are counted and skipped.

#ifndef PIGAT_GRADCHECK_H_
#define PIGAT_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pigat/features.h"
#include "pigat/model.h"

namespace pigat {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  double abs_floor = 1e-6;
  // Coordinates sampled per parameter tensor; half are drawn from the
  // coordinates with a nonzero analytic gradient.
  std::size_t coords_per_param = 8;
  // A check with more skipped probes than this fraction fails.
  double max_skip_fraction = 0.05;
  std::uint64_t seed = 0;
};

struct ParamCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Mean log loss of `batch` in eval mode.
double BatchLoss(const PigatModel& model,
                 std::span<const EncodedInstance> batch);

// Fills every parameter's gradient with d(BatchLoss)/d(param).
void ComputeBatchGradients(PigatModel& model,
                           std::span<const EncodedInstance> batch);

using GradientFn =
    std::function<void(PigatModel&, std::span<const EncodedInstance>)>;

GradCheckReport CheckGradients(
    PigatModel& model, std::span<const EncodedInstance> batch,
    const GradCheckOptions& options,
    const GradientFn& analytic = ComputeBatchGradients);

// Small fixed schema: user fields uid/6 and ugroup/3, item fields iid/8 and
// icat/4, both tables `width` wide.
FeatureSchema MakeToySchema(std::size_t width = 8);

// Random instances over `schema` with live lengths spread over 0..k and
// both labels present.
std::vector<EncodedInstance> MakeToyBatch(const FeatureSchema& schema,
                                          std::size_t max_neighbors,
                                          std::size_t count, Rng& rng);

struct GradCheckSuiteResult {
  std::vector<GradCheckReport> reports;  // one per seed
  bool passed = false;
  double max_rel_error = 0.0;
};

// Builds a fresh toy model per seed under `config`, fills its all-zero
// parameters with small random values and checks it.
GradCheckSuiteResult RunGradCheckSuite(
    const ModelConfig& config, std::size_t seeds, std::size_t batch_size = 4,
    GradCheckOptions options = {},
    const GradientFn& analytic = ComputeBatchGradients);

}  // namespace pigat

#endif  // PIGAT_GRADCHECK_H_
