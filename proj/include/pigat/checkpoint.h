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

// Self-describing text checkpoints.
//
//   PIGAT-CHECKPOINT 1
//   schema_hash <16 hex digits>
//   model key=value ...
//   schema_begin
//   <schema file lines>
//   vocab <side> <field index> <count>
//   <one value per line>
//   schema_end
//   params <count>
//   param <name> <rows> <cols> <trainable>
//   <values as C99 hex floats>
//   end
//
// Hex floats make a save/load round trip bit-exact.

#ifndef PIGAT_CHECKPOINT_H_
#define PIGAT_CHECKPOINT_H_

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "pigat/features.h"
#include "pigat/model.h"

namespace pigat {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  FeatureSchema schema;
  PigatModel model;
};

void SaveCheckpoint(std::ostream& out, const FeatureSchema& schema,
                    const PigatModel& model);
void SaveCheckpoint(const std::string& path, const FeatureSchema& schema,
                    const PigatModel& model);
Checkpoint LoadCheckpoint(std::istream& in);
Checkpoint LoadCheckpoint(const std::string& path);

std::string ModelConfigLine(const ModelConfig& config);
ModelConfig ParseModelConfigLine(const std::string& line);

}  // namespace pigat

#endif  // PIGAT_CHECKPOINT_H_
