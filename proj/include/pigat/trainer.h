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

#ifndef PIGAT_TRAINER_H_
#define PIGAT_TRAINER_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pigat/config.h"
#include "pigat/data.h"
#include "pigat/features.h"
#include "pigat/model.h"

namespace pigat {

// Raised when the training loss stops being finite.
class TrainingAborted : public NumericError {
 public:
  using NumericError::NumericError;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;        // mean over the epoch's instances
  std::optional<double> val_auc;  // empty when val lacks a class
  double learning_rate = 0.0;     // rate used during the epoch
};

struct TrainResult {
  FeatureSchema schema;  // frozen, widths applied
  PigatModel model;      // parameters of the best-val-AUC epoch
  std::vector<EpochMetrics> log;
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Copies `schema`, applies the configured widths and freezes it.
FeatureSchema ResolveSchema(const FeatureSchema& schema,
                            const TrainConfig& config);

TrainResult Train(const TrainConfig& config, const FeatureSchema& schema,
                  const InstanceSet& instances,
                  const EpochCallback& on_epoch = nullptr);

// Eval-mode probabilities.
std::vector<double> Predict(const PigatModel& model,
                            std::span<const EncodedInstance> instances);

std::vector<int> Labels(std::span<const EncodedInstance> instances);

// `epoch<TAB>train_loss<TAB>val_auc<TAB>lr`, one line per epoch; an
// undefined val AUC is written as `nan`.
void WriteMetricsLog(std::ostream& out, const std::vector<EpochMetrics>& log);

}  // namespace pigat

#endif  // PIGAT_TRAINER_H_
