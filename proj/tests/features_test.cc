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

#include "pigat/features.h"

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pigat/graph.h"
#include "pigat/model.h"

namespace pigat {
namespace {

FeatureSchema ParseSchema(const std::string& text) {
  std::istringstream in(text);
  return FeatureSchema::Parse(in);
}

// user: uid; item: iid, icat. One record per (user, item, category).
struct Fixture {
  FeatureSchema schema = ParseSchema(
      "user uid 0\nitem iid 0\nitem icat 0\nembed user 4\nembed item 3\n");
  std::vector<EncodedRecord> records;
  InteractionGraph graph;

  void Add(int user, int item, Timestamp t, int label = 1) {
    EncodedRecord r;
    r.timestamp = t;
    r.user_ids = {schema.MapValue(Part::kUser, 0, "u" + std::to_string(user))};
    r.item_ids = {
        schema.MapValue(Part::kItem, 0, "i" + std::to_string(item)),
        schema.MapValue(Part::kItem, 1, "c" + std::to_string(item % 3))};
    r.user_node = static_cast<std::uint32_t>(user);
    r.item_node = static_cast<std::uint32_t>(item);
    r.label = label;
    records.push_back(r);
  }

  // Encodes record `index` against the graph of every earlier record.
  EncodedInstance EncodeAt(std::size_t index, std::size_t k) {
    InteractionGraph g;
    for (std::size_t j = 0; j < index; ++j) {
      InteractionEvent e;
      e.user = records[j].user_node;
      e.item = records[j].item_node;
      e.timestamp = records[j].timestamp;
      e.payload = j;
      g.Insert(e);
    }
    return EncodeInstance(schema, records, index,
                          g.SnapshotAt(records[index].timestamp), k);
  }
};

TEST(SchemaTest, ParseAndWriteRoundTrip) {
  FeatureSchema s = ParseSchema(
      "# comment\nuser uid 5\nuser dev 2\nitem iid 0\nembed user 8\n"
      "embed item 6\nsignal rating\noov error\n");
  EXPECT_EQ(s.user_fields.size(), 2u);
  EXPECT_EQ(s.item_fields.size(), 1u);
  EXPECT_EQ(s.user_width, 8u);
  EXPECT_EQ(s.item_width, 6u);
  EXPECT_EQ(s.signal, SignalKind::kRating);
  EXPECT_EQ(s.oov, OovPolicy::kError);
  std::stringstream out;
  s.Write(out);
  FeatureSchema t = FeatureSchema::Parse(out);
  EXPECT_EQ(t.Hash(), s.Hash());
}

TEST(SchemaTest, RejectsBadLines) {
  EXPECT_THROW(ParseSchema("user uid x\nitem iid 1\n"), SchemaError);
  EXPECT_THROW(ParseSchema("user uid 1\n"), SchemaError);
  EXPECT_THROW(ParseSchema("side uid 1\nitem iid 1\n"), SchemaError);
  EXPECT_THROW(ParseSchema("user a 1\nuser a 2\nitem b 1\n"), SchemaError);
  EXPECT_THROW(ParseSchema("user a 1\nitem b 1\nembed user 0\n"), SchemaError);
}

TEST(SchemaTest, VocabularyIsFirstSeenDense) {
  FeatureSchema s = ParseSchema("user uid 0\nitem iid 0\n");
  EXPECT_EQ(s.MapValue(Part::kUser, 0, "b"), 0u);
  EXPECT_EQ(s.MapValue(Part::kUser, 0, "a"), 1u);
  EXPECT_EQ(s.MapValue(Part::kUser, 0, "b"), 0u);
  EXPECT_EQ(s.user_fields[0].vocab.values(),
            (std::vector<std::string>{"b", "a"}));
}

TEST(SchemaTest, FrozenSchemaMapsUnseenToOov) {
  FeatureSchema s = ParseSchema("user uid 0\nuser g 0\nitem iid 0\n");
  s.MapValue(Part::kUser, 0, "a");
  s.MapValue(Part::kUser, 1, "x");
  s.Freeze();
  const std::uint32_t oov = s.MapValue(Part::kUser, 0, "zzz");
  EXPECT_EQ(oov, s.OovId(Part::kUser, 0));
  EXPECT_NE(oov, s.PaddingId(Part::kUser));
  // uid: 1 slot + OOV, g: 1 slot + OOV, padding.
  EXPECT_EQ(s.TableRows(Part::kUser), 5u);
  s.oov = OovPolicy::kError;
  EXPECT_THROW(s.MapValue(Part::kUser, 0, "zzz"), SchemaError);
}

TEST(EmbeddingTableTest, LookupExamples) {
  Rng rng(1);
  EmbeddingTable table("t", 4, 3, rng);
  for (std::size_t c = 0; c < 3; ++c) table.param().value(0, c) = 0.1;
  const std::uint32_t zero = 0;
  EXPECT_EQ(table.Lookup({&zero, 1}), (Vector{0.1, 0.1, 0.1}));
  const std::uint32_t pad = table.padding_id();
  EXPECT_EQ(table.Lookup({&pad, 1}), (Vector{0, 0, 0}));
  const std::vector<std::uint32_t> two = {2, 1};
  const Vector joint = table.Lookup(two);
  ASSERT_EQ(joint.size(), 6u);
  const Vector a = table.Lookup({&two[0], 1});
  const Vector b = table.Lookup({&two[1], 1});
  EXPECT_EQ(Vector(joint.begin(), joint.begin() + 3), a);
  EXPECT_EQ(Vector(joint.begin() + 3, joint.end()), b);
  const std::uint32_t bad = 9;
  EXPECT_THROW(table.Lookup({&bad, 1}), ShapeError);
}

TEST(EmbeddingTableTest, ScatterAccumulatesAndSkipsPadding) {
  Rng rng(1);
  EmbeddingTable table("t", 5, 2, rng);
  const std::vector<std::uint32_t> ids = {3, 3};
  table.ScatterGradient(ids, Vector{1, 2, 10, 20});
  EXPECT_EQ(table.param().grad(3, 0), 11.0);
  EXPECT_EQ(table.param().grad(3, 1), 22.0);
  const std::vector<std::uint32_t> pad = {table.padding_id()};
  table.ScatterGradient(pad, Vector{5, 5});
  EXPECT_EQ(table.param().grad(table.padding_id(), 0), 0.0);
  EXPECT_THROW(table.ScatterGradient(ids, Vector{1, 2, 3}), ShapeError);
}

TEST(EmbeddingTableTest, SgdStepTouchesOnlyLookedUpRows) {
  Rng rng(2);
  EmbeddingTable table("t", 6, 3, rng);
  const Matrix before = table.param().value;
  const std::vector<std::uint32_t> ids = {1, 4};
  // Loss = sum of the looked-up values, so the upstream gradient is all ones.
  table.ScatterGradient(ids, Vector(6, 1.0));
  const double lr = 0.1;
  auto values = table.param().value.values();
  auto grads = table.param().grad.values();
  for (std::size_t j = 0; j < values.size(); ++j) values[j] -= lr * grads[j];
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (r == 1 || r == 4) {
        EXPECT_DOUBLE_EQ(table.param().value(r, c), before(r, c) - lr);
      } else {
        EXPECT_EQ(table.param().value(r, c), before(r, c));
      }
    }
  }
}

TEST(EncodeTest, ColdUserIsFullyMasked) {
  Fixture f;
  f.Add(0, 0, 1);
  const EncodedInstance inst = f.EncodeAt(0, 4);
  EXPECT_EQ(inst.user_len, 0u);
  EXPECT_EQ(inst.item_len, 0u);
  EXPECT_EQ(inst.user_mask, Mask(4, 0));
  for (std::uint32_t id : inst.user_neighbors) {
    EXPECT_EQ(id, f.schema.PaddingId(Part::kItem));
  }
  for (std::uint32_t id : inst.item_neighbors) {
    EXPECT_EQ(id, f.schema.PaddingId(Part::kUser));
  }
}

TEST(EncodeTest, PriorItemsAppearAsProfilesInOrder) {
  Fixture f;
  f.Add(0, 5, 1);
  f.Add(1, 5, 2);
  f.Add(0, 7, 3);
  f.Add(0, 9, 4);
  const EncodedInstance inst = f.EncodeAt(3, 4);
  ASSERT_EQ(inst.user_len, 2u);
  EXPECT_EQ(inst.user_mask, (Mask{1, 1, 0, 0}));
  EXPECT_EQ(inst.user_neighbors[0], f.records[0].item_ids[0]);
  EXPECT_EQ(inst.user_neighbors[1], f.records[0].item_ids[1]);
  EXPECT_EQ(inst.user_neighbors[2], f.records[2].item_ids[0]);
  EXPECT_EQ(inst.user_neighbors[3], f.records[2].item_ids[1]);
  EXPECT_EQ(inst.user_profile, f.records[3].user_ids);
  EXPECT_EQ(inst.item_profile, f.records[3].item_ids);

  const EncodedInstance item_side = f.EncodeAt(1, 4);
  ASSERT_EQ(item_side.item_len, 1u);
  EXPECT_EQ(item_side.item_neighbors[0], f.records[0].user_ids[0]);
}

TEST(EncodeTest, WindowKeepsLastK) {
  Fixture f;
  for (int j = 0; j < 13; ++j) f.Add(0, j, j);
  const EncodedInstance inst = f.EncodeAt(12, 10);
  ASSERT_EQ(inst.user_len, 10u);
  for (std::size_t l = 0; l < 10; ++l) {
    // Slot l holds interaction l + 3 (1-based), i.e. record l + 2.
    EXPECT_EQ(inst.user_neighbors[l * 2], f.records[l + 2].item_ids[0]);
  }
}

TEST(EncodeTest, FutureEventsDoNotChangeEncoding) {
  Fixture f;
  Rng rng(3);
  for (int j = 0; j < 60; ++j) {
    f.Add(static_cast<int>(UniformIndex(rng, 5)),
          static_cast<int>(UniformIndex(rng, 7)), j / 2);
  }
  InteractionGraph full;
  for (std::size_t j = 0; j < f.records.size(); ++j) {
    InteractionEvent e;
    e.user = f.records[j].user_node;
    e.item = f.records[j].item_node;
    e.timestamp = f.records[j].timestamp;
    e.payload = j;
    full.Insert(e);
  }
  for (std::size_t j = 0; j < f.records.size(); ++j) {
    const EncodedInstance with_future = EncodeInstance(
        f.schema, f.records, j, full.SnapshotAt(f.records[j].timestamp), 4);
    // Oracle: only strictly earlier timestamps in the graph.
    InteractionGraph prefix;
    for (std::size_t p = 0; p < f.records.size(); ++p) {
      if (f.records[p].timestamp >= f.records[j].timestamp) break;
      InteractionEvent e;
      e.user = f.records[p].user_node;
      e.item = f.records[p].item_node;
      e.timestamp = f.records[p].timestamp;
      e.payload = p;
      prefix.Insert(e);
    }
    const Timestamp t = f.records[j].timestamp;
    EXPECT_EQ(with_future,
              EncodeInstance(f.schema, f.records, j, prefix.SnapshotAt(t), 4));
  }
}

TEST(EncodeTest, ZeroWindowRejected) {
  Fixture f;
  f.Add(0, 0, 1);
  InteractionGraph g;
  EXPECT_THROW(EncodeInstance(f.schema, f.records, 0, g.Live(), 0),
               DomainError);
}

// The user-neighbor sequence reads the item table and the item-neighbor
// sequence the user table.
TEST(TableSharingTest, NeighborGradientReachesProfileRows) {
  Fixture f;
  f.Add(0, 1, 1);
  f.Add(1, 1, 2);
  f.Add(1, 2, 3);
  f.schema.Freeze();
  ModelConfig config;
  config.max_neighbors = 4;
  config.integrate_width = 6;
  config.confidence = ConfidenceVariant::kNone;
  Rng rng(4);
  PigatModel model(f.schema, config, rng);
  // Instance for record 2: user 1 has neighbor item 1, item 2 has none.
  const EncodedInstance inst = f.EncodeAt(2, 4);
  ASSERT_EQ(inst.user_len, 1u);
  const std::uint32_t neighbor_item_row = inst.user_neighbors[0];
  ASSERT_EQ(neighbor_item_row, f.records[0].item_ids[0]);
  // Item 1 is not part of this instance's profiles, so any gradient on its
  // row must have come through the neighbor slot.
  ASSERT_NE(inst.item_profile[0], neighbor_item_row);

  ForwardCache cache;
  model.ZeroGrad();
  model.Forward(inst, Mode::kTrain, &rng, &cache);
  model.Backward(inst, cache, 1.0);
  double norm = 0;
  for (double g : model.item_table().param().grad.row(neighbor_item_row)) {
    norm += g * g;
  }
  EXPECT_GT(norm, 0.0);

  const Vector before(
      model.item_table().param().value.row(neighbor_item_row).begin(),
      model.item_table().param().value.row(neighbor_item_row).end());
  AdamOptions opt;
  opt.learning_rate = 0.01;
  AdamState adam(model.Parameters(), opt);
  model.ApplyOptimizerStep(adam);
  const auto after = model.item_table().param().value.row(neighbor_item_row);
  EXPECT_NE(before, Vector(after.begin(), after.end()));
}

}  // namespace
}  // namespace pigat
