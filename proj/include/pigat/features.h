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

// Categorical feature schema, embedding tables and instance encoding.
//
// Each side (user, item) owns a single embedding table covering all of its
// fields. Field f occupies a contiguous block of rows: its vocabulary slots
// followed by one trainable out-of-vocabulary row. The final row of the table
// is the padding row; it is pinned to zero and never receives gradient.
//
// The user-neighbor sequence is looked up in the item table and the
// item-neighbor sequence in the user table (user-ID field only), so graph
// features and profile features share parameters.

#ifndef PIGAT_FEATURES_H_
#define PIGAT_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pigat/graph.h"
#include "pigat/numeric.h"

namespace pigat {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense first-seen 0..N-1 mapping from raw strings.
class Vocabulary {
 public:
  std::optional<std::uint32_t> Find(std::string_view value) const;
  std::uint32_t Add(std::string_view value);
  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& values() const { return values_; }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct FieldSpec {
  std::string name;
  // Declared cardinality; 0 means "as many as the data has".
  std::size_t cardinality = 0;
  Vocabulary vocab;

  std::size_t slots() const {
    return cardinality > 0 ? cardinality : vocab.size();
  }
};

enum class OovPolicy { kReserve, kError };
enum class SignalKind { kBinary, kRating };

class FeatureSchema {
 public:
  std::vector<FieldSpec> user_fields;
  std::vector<FieldSpec> item_fields;
  std::size_t user_width = 16;  // H_u
  std::size_t item_width = 16;  // H_i
  OovPolicy oov = OovPolicy::kReserve;
  SignalKind signal = SignalKind::kBinary;

  // Plain-text schema: `side field_name cardinality` per field plus
  // `embed user H` / `embed item H`, optional `signal binary|rating` and
  // `oov reserve|error`. '#' starts a comment.
  static FeatureSchema Parse(std::istream& in);
  static FeatureSchema Load(const std::string& path);
  void Write(std::ostream& out) const;

  const std::vector<FieldSpec>& fields(Part side) const {
    return side == Part::kUser ? user_fields : item_fields;
  }
  std::vector<FieldSpec>& fields(Part side) {
    return side == Part::kUser ? user_fields : item_fields;
  }
  std::size_t width(Part side) const {
    return side == Part::kUser ? user_width : item_width;
  }

  // After freezing, unseen values map to the field's OOV row.
  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // Maps a raw value to a global row of the side's table, growing the
  // vocabulary while unfrozen and under the declared cardinality.
  std::uint32_t MapValue(Part side, std::size_t field, std::string_view value);
  // Global row of local id `local` (may equal slots() for OOV).
  std::uint32_t GlobalId(Part side, std::size_t field,
                         std::uint32_t local) const;
  std::uint32_t OovId(Part side, std::size_t field) const;
  std::uint32_t PaddingId(Part side) const;
  std::size_t TableRows(Part side) const;

  void Validate() const;
  // Stable fingerprint of fields, slots, widths and vocabularies.
  std::uint64_t Hash() const;

 private:
  std::size_t Offset(Part side, std::size_t field) const;
  bool frozen_ = false;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // `rows` includes the padding row, which is the last one.
  EmbeddingTable(std::string name, std::size_t rows, std::size_t width,
                 Rng& rng);

  std::size_t width() const { return param_.value.cols(); }
  std::size_t count() const { return param_.value.rows(); }
  std::uint32_t padding_id() const {
    return static_cast<std::uint32_t>(count() - 1);
  }

  // Concatenation [e_{k_1} ... e_{k_n}]; the padding id yields zeros.
  Vector Lookup(std::span<const std::uint32_t> ids) const;
  void LookupInto(std::span<const std::uint32_t> ids,
                  std::span<double> out) const;
  // Adds consecutive width-sized slices of `upstream` to the rows of `ids`.
  // Repeated ids accumulate; the padding slice is dropped.
  void ScatterGradient(std::span<const std::uint32_t> ids,
                       std::span<const double> upstream);
  void PinPadding();

  Param& param() { return param_; }
  const Param& param() const { return param_; }

 private:
  void CheckId(std::uint32_t id) const;
  Param param_;
};

// A record after vocabulary mapping; the unit the graph and encoder consume.
struct EncodedRecord {
  Timestamp timestamp = 0;
  std::uint32_t user_node = 0;
  std::uint32_t item_node = 0;
  std::vector<std::uint32_t> user_ids;  // global rows, one per user field
  std::vector<std::uint32_t> item_ids;  // global rows, one per item field
  double signal = 0.0;
  int label = 0;
};

struct EncodedInstance {
  std::vector<std::uint32_t> user_profile;  // n_u ids
  std::vector<std::uint32_t> item_profile;  // n_i ids
  // k slots x n_i item-table ids, row-major; dead slots hold padding ids.
  std::vector<std::uint32_t> user_neighbors;
  // k slots x 1 user-table id (user-ID field).
  std::vector<std::uint32_t> item_neighbors;
  Mask user_mask;
  Mask item_mask;
  std::size_t user_len = 0;  // L_u
  std::size_t item_len = 0;  // L_i
  int label = 0;
  Timestamp cutoff = 0;

  std::size_t max_neighbors() const { return user_mask.size(); }
  friend bool operator==(const EncodedInstance&,
                         const EncodedInstance&) = default;
};

// Encodes `records[index]` against `view`. The user-neighbor slots hold the
// item profiles of the user's last-k neighbors and the item-neighbor slots
// the user IDs of the item's last-k neighbors, both in interaction order.
// Graph event payloads must be indices into `records`.
EncodedInstance EncodeInstance(const FeatureSchema& schema,
                               std::span<const EncodedRecord> records,
                               std::size_t index, const GraphSnapshot& view,
                               std::size_t max_neighbors);

}  // namespace pigat

#endif  // PIGAT_FEATURES_H_
