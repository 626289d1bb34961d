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

// Interaction-file ingestion, chronological splitting and instance building.
//
// Interactions file: one record per line,
//   timestamp<TAB>user_field=value;...<TAB>item_field=value;...<TAB>signal
// The first user field and the first item field identify the graph nodes.

#ifndef PIGAT_DATA_H_
#define PIGAT_DATA_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pigat/config.h"
#include "pigat/features.h"
#include "pigat/graph.h"

namespace pigat {

struct Dataset {
  FeatureSchema schema;                // vocabularies grown by ingestion
  std::vector<EncodedRecord> records;  // sorted by (timestamp, file order)
  Vocabulary user_nodes;
  Vocabulary item_nodes;
};

// Ratings strictly above this value are positive.
inline constexpr double kRatingThreshold = 3.0;

// Reads records, maps every field through `schema` (growing unfrozen
// vocabularies in file order) and stable-sorts by timestamp. Malformed lines
// raise IngestionError naming the line; so does an empty input.
Dataset Ingest(std::istream& in, FeatureSchema schema,
               const std::string& source = "<input>");
Dataset IngestFile(const std::string& path, FeatureSchema schema);

struct DatasetSplit {
  std::size_t train_end = 0;  // records [0, train_end) are train
  std::size_t val_end = 0;    // [train_end, val_end) val, the rest test
  std::size_t total = 0;

  std::size_t train_count() const { return train_end; }
  std::size_t val_count() const { return val_end - train_end; }
  std::size_t test_count() const { return total - val_end; }
};

// First 80% by count are train, the next 10% val, the rest test.
DatasetSplit TimelineSplit(std::span<const EncodedRecord> records,
                           double train_fraction = 0.8,
                           double val_fraction = 0.1);

struct InstanceSet {
  std::vector<EncodedInstance> train;
  std::vector<EncodedInstance> val;
  std::vector<EncodedInstance> test;
  // Training-period interaction count of each val/test instance's item.
  std::vector<std::size_t> val_item_degrees;
  std::vector<std::size_t> test_item_degrees;
};

struct InstanceOptions {
  GraphMode mode = GraphMode::kDynamic;
  std::size_t max_neighbors = 10;
  bool include_negative_neighbors = true;
};

// Dynamic mode encodes each record against the graph of all strictly earlier
// records and then inserts it. Static mode encodes every record against the
// graph of the training records.
InstanceSet BuildInstances(const Dataset& data, const DatasetSplit& split,
                           const InstanceOptions& options);

// Per-item interaction counts over the first `end` records.
std::vector<std::size_t> ItemDegrees(const Dataset& data, std::size_t end);

}  // namespace pigat

#endif  // PIGAT_DATA_H_
