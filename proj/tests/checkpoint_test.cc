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

#include "pigat/checkpoint.h"

#include <cstring>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "pigat/trainer.h"
#include "pipeline_fixture.h"

namespace pigat {
namespace {

struct Trained {
  TrainResult result;
  InstanceSet set;
};

const Trained& SmallModel() {
  static const Trained t = [] {
    const Dataset data = testing::SyntheticDataset(testing::ParseSpec(
        "users = 30\nitems = 80\nevents = 600\ndim = 4\ncategories = 6\n"));
    TrainConfig c;
    c.embed_user = 6;
    c.embed_item = 6;
    c.integrate_width = 8;
    c.confidence = ConfidenceVariant::kCe;
    c.attention = AttentionKind::kFfn2;
    c.epochs = 2;
    c.batch_size = 32;
    InstanceSet set = testing::InstancesFor(data, c);
    TrainResult r = Train(c, data.schema, set);
    return Trained{std::move(r), std::move(set)};
  }();
  return t;
}

std::string Save(const FeatureSchema& schema, const PigatModel& model) {
  std::ostringstream out;
  SaveCheckpoint(out, schema, model);
  return out.str();
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  const Trained& t = SmallModel();
  const std::string text = Save(t.result.schema, t.result.model);
  std::istringstream in(text);
  const Checkpoint ck = LoadCheckpoint(in);
  EXPECT_EQ(ck.schema.Hash(), t.result.schema.Hash());
  auto a = t.result.model.Parameters();
  auto b = ck.model.Parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->trainable, b[i]->trainable);
    ASSERT_EQ(a[i]->value.values().size(), b[i]->value.values().size());
    EXPECT_EQ(
        std::memcmp(a[i]->value.values().data(), b[i]->value.values().data(),
                    a[i]->value.values().size() * sizeof(double)),
        0)
        << a[i]->name;
  }
  EXPECT_EQ(Save(ck.schema, ck.model), text);
}

TEST(CheckpointTest, LoadedModelPredictsIdentically) {
  const Trained& t = SmallModel();
  std::istringstream in(Save(t.result.schema, t.result.model));
  const Checkpoint ck = LoadCheckpoint(in);
  const std::vector<double> before = Predict(t.result.model, t.set.test);
  const std::vector<double> after = Predict(ck.model, t.set.test);
  EXPECT_EQ(before, after);
}

TEST(CheckpointTest, CorruptionIsDetected) {
  const Trained& t = SmallModel();
  const std::string text = Save(t.result.schema, t.result.model);
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return LoadCheckpoint(in);
  };
  EXPECT_THROW(load(""), CheckpointError);
  EXPECT_THROW(load("NOT-A-CHECKPOINT 1\n"), CheckpointError);
  EXPECT_THROW(load(text.substr(0, text.size() / 2)), CheckpointError);

  std::string bad_hash = text;
  const std::size_t h = bad_hash.find("schema_hash ") + 12;
  bad_hash[h] = bad_hash[h] == '0' ? '1' : '0';
  EXPECT_THROW(load(bad_hash), CheckpointError);

  std::string no_end = text.substr(0, text.rfind("end"));
  EXPECT_THROW(load(no_end), CheckpointError);

  std::string bad_version = text;
  bad_version.replace(0, bad_version.find('\n'), "PIGAT-CHECKPOINT 99");
  EXPECT_THROW(load(bad_version), CheckpointError);
}

TEST(CheckpointTest, MissingFile) {
  EXPECT_THROW(LoadCheckpoint("/nonexistent/checkpoint.txt"), CheckpointError);
}

TEST(ModelConfigLineTest, RoundTrip) {
  ModelConfig c;
  c.attention = AttentionKind::kScaledDot;
  c.confidence = ConfidenceVariant::kRce;
  c.pooling = PoolingMode::kAverage;
  c.confidence_in_pooling = false;
  c.user_query_all_heads = true;
  c.max_neighbors = 7;
  c.integrate_width = 13;
  c.mlp_hidden = {9, 5, 3};
  c.dropout = 0.1;
  c.leaky_slope = 1.0 / 3.0;
  const std::string line = ModelConfigLine(c);
  const ModelConfig back = ParseModelConfigLine(line);
  EXPECT_EQ(ModelConfigLine(back), line);
  EXPECT_EQ(back.mlp_hidden, c.mlp_hidden);
  EXPECT_EQ(back.leaky_slope, c.leaky_slope);
  EXPECT_EQ(back.dropout, c.dropout);
  EXPECT_TRUE(back.user_query_all_heads);
  EXPECT_FALSE(back.confidence_in_pooling);
}

}  // namespace
}  // namespace pigat
