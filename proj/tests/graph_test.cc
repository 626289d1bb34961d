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

#include "pigat/graph.h"

#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "pigat/numeric.h"

namespace pigat {
namespace {

InteractionEvent Ev(std::uint32_t u, std::uint32_t i, Timestamp t) {
  InteractionEvent e;
  e.user = u;
  e.item = i;
  e.timestamp = t;
  return e;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> TailsAndOrders(
    const std::vector<Neighbor>& ns) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const Neighbor& n : ns) out.emplace_back(n.tail.index, n.order);
  return out;
}

// Naive neighbor list built directly from an event prefix.
std::vector<std::pair<std::uint32_t, std::uint32_t>> Rebuild(
    const std::vector<InteractionEvent>& events, Timestamp cutoff, NodeId v,
    std::size_t k) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> all;
  std::uint32_t order = 0;
  for (const InteractionEvent& e : events) {
    if (e.timestamp >= cutoff) continue;
    if (v.part == Part::kUser && e.user == v.index) {
      all.emplace_back(e.item, ++order);
    } else if (v.part == Part::kItem && e.item == v.index) {
      all.emplace_back(e.user, ++order);
    }
  }
  if (all.size() > k) all.erase(all.begin(), all.end() - k);
  return all;
}

TEST(GraphTest, InsertReturnsHeadRelativeOrders) {
  InteractionGraph g;
  EXPECT_EQ(g.Insert(Ev(1, 1, 10)), (EdgeOrders{1, 1}));
  EXPECT_EQ(g.Insert(Ev(1, 2, 20)), (EdgeOrders{2, 1}));
  EXPECT_EQ(g.Insert(Ev(2, 2, 30)), (EdgeOrders{1, 2}));
}

TEST(GraphTest, TwelveInsertsGiveOrdersOneToTwelve) {
  InteractionGraph g;
  for (std::uint32_t j = 0; j < 12; ++j) g.Insert(Ev(0, j, j));
  const auto ns = g.OrderedNeighbors(NodeId::User(0));
  ASSERT_EQ(ns.size(), 12u);
  for (std::uint32_t j = 0; j < 12; ++j) {
    EXPECT_EQ(ns[j].order, j + 1);
    EXPECT_EQ(ns[j].tail, NodeId::Item(j));
  }
}

TEST(GraphTest, OrderedNeighborsExamples) {
  InteractionGraph g;
  g.Insert(Ev(1, 1, 10));
  g.Insert(Ev(1, 2, 20));
  using P = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  EXPECT_EQ(TailsAndOrders(g.OrderedNeighbors(NodeId::User(1))),
            (P{{1, 1}, {2, 2}}));
  EXPECT_EQ(TailsAndOrders(g.SnapshotAt(15).OrderedNeighbors(NodeId::User(1))),
            (P{{1, 1}}));
  for (const Neighbor& n : g.OrderedNeighbors(NodeId::Item(2))) {
    EXPECT_EQ(n.tail.part, Part::kUser);
  }
}

TEST(GraphTest, LastKWindow) {
  InteractionGraph g;
  for (std::uint32_t j = 0; j < 12; ++j) g.Insert(Ev(0, j, j));
  const auto ns = g.OrderedNeighbors(NodeId::User(0), 10);
  ASSERT_EQ(ns.size(), 10u);
  for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(ns[j].order, j + 3);
  EXPECT_EQ(g.Degree(NodeId::User(0)), 12u);
}

TEST(GraphTest, MissingNodeIsEmpty) {
  InteractionGraph g;
  g.Insert(Ev(0, 0, 1));
  EXPECT_TRUE(g.OrderedNeighbors(NodeId::User(7)).empty());
  EXPECT_EQ(g.Degree(NodeId::Item(9)), 0u);
}

TEST(GraphTest, SnapshotSemantics) {
  InteractionGraph g;
  g.Insert(Ev(0, 0, 5));
  g.Insert(Ev(0, 1, 8));
  const GraphSnapshot zero = g.SnapshotAt(0);
  EXPECT_TRUE(zero.OrderedNeighbors(NodeId::User(0)).empty());
  EXPECT_EQ(zero.Degree(NodeId::User(0)), 0u);

  const GraphSnapshot inf = g.SnapshotAt(kEndOfTime);
  EXPECT_EQ(inf.OrderedNeighbors(NodeId::User(0)),
            g.OrderedNeighbors(NodeId::User(0)));

  const GraphSnapshot at9 = g.SnapshotAt(9);
  const auto before = at9.OrderedNeighbors(NodeId::User(0));
  g.Insert(Ev(0, 2, 9));
  g.Insert(Ev(0, 3, 12));
  EXPECT_EQ(at9.OrderedNeighbors(NodeId::User(0)), before);
  EXPECT_EQ(at9.Degree(NodeId::User(0)), 2u);
  EXPECT_EQ(g.SnapshotAt(9).Degree(NodeId::User(0)), 2u);
  EXPECT_EQ(g.Degree(NodeId::User(0)), 4u);
  // A cutoff snapshot taken before an equal-timestamp insert stays stable too.
  const GraphSnapshot at13 = g.SnapshotAt(13);
  g.Insert(Ev(0, 4, 12));
  EXPECT_EQ(at13.Degree(NodeId::User(0)), 4u);
}

TEST(GraphTest, RejectsOutOfOrderAndNegativeTimestamps) {
  InteractionGraph g;
  g.Insert(Ev(0, 0, 10));
  EXPECT_THROW(g.Insert(Ev(0, 1, 9)), IngestionError);
  EXPECT_THROW(InteractionGraph().Insert(Ev(0, 0, -1)), IngestionError);
}

TEST(GraphTest, FrozenVocabularyRejectsOutOfRangeIds) {
  InteractionGraph g(2, 3);
  g.Insert(Ev(1, 2, 0));
  EXPECT_THROW(g.Insert(Ev(2, 0, 1)), IngestionError);
  EXPECT_THROW(g.Insert(Ev(0, 3, 1)), IngestionError);
}

TEST(GraphTest, RandomHistoriesMatchRebuildOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    InteractionGraph g;
    std::vector<InteractionEvent> log;
    std::vector<std::pair<GraphSnapshot, std::size_t>> snaps;
    Timestamp t = 0;
    for (int step = 0; step < 150; ++step) {
      if (UniformIndex(rng, 5) == 0) {
        const Timestamp cutoff =
            t - static_cast<Timestamp>(UniformIndex(rng, 4));
        snaps.emplace_back(g.SnapshotAt(cutoff), log.size());
      }
      t += static_cast<Timestamp>(UniformIndex(rng, 3));
      const InteractionEvent e =
          Ev(static_cast<std::uint32_t>(UniformIndex(rng, 6)),
             static_cast<std::uint32_t>(UniformIndex(rng, 8)), t);
      const EdgeOrders o = g.Insert(e);
      log.push_back(e);
      EXPECT_EQ(o.user_side, g.Degree(NodeId::User(e.user)));
      EXPECT_EQ(o.item_side, g.Degree(NodeId::Item(e.item)));
    }
    for (const auto& [snap, prefix] : snaps) {
      const std::vector<InteractionEvent> seen(log.begin(),
                                               log.begin() + prefix);
      for (std::uint32_t v = 0; v < 8; ++v) {
        for (NodeId node : {NodeId::User(v % 6), NodeId::Item(v)}) {
          for (std::size_t k : {std::size_t{3}, std::size_t{10}, SIZE_MAX}) {
            EXPECT_EQ(TailsAndOrders(snap.OrderedNeighbors(node, k)),
                      Rebuild(seen, snap.cutoff(), node, k))
                << "seed " << seed;
          }
          EXPECT_EQ(snap.Degree(node),
                    Rebuild(seen, snap.cutoff(), node, SIZE_MAX).size());
        }
      }
    }
    // Per-head orders are gapless and truncation is a suffix.
    for (std::uint32_t u = 0; u < 6; ++u) {
      const auto full = g.OrderedNeighbors(NodeId::User(u));
      for (std::size_t j = 0; j < full.size(); ++j) {
        EXPECT_EQ(full[j].order, j + 1);
        EXPECT_EQ(full[j].tail.part, Part::kItem);
      }
      const auto cut = g.OrderedNeighbors(NodeId::User(u), 4);
      const std::size_t n = std::min<std::size_t>(4, full.size());
      ASSERT_EQ(cut.size(), n);
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(cut[j], full[full.size() - n + j]);
      }
    }
  }
}

TEST(GraphTest, EventLogRoundTrip) {
  InteractionGraph g;
  g.Insert(Ev(0, 1, 3));
  g.Insert(Ev(2, 1, 3));
  g.Insert(Ev(0, 0, 7));
  std::stringstream ss;
  g.WriteEventLog(ss);
  const InteractionGraph h = InteractionGraph::ReadEventLog(ss);
  std::stringstream again;
  h.WriteEventLog(again);
  std::stringstream first;
  g.WriteEventLog(first);
  EXPECT_EQ(first.str(), again.str());
  EXPECT_EQ(TailsAndOrders(h.OrderedNeighbors(NodeId::Item(1))),
            TailsAndOrders(g.OrderedNeighbors(NodeId::Item(1))));
}

TEST(GraphTest, EventLogRejectsMalformedLine) {
  std::stringstream ss("1\tuser=0\titem=x\t1\n");
  EXPECT_THROW(InteractionGraph::ReadEventLog(ss), IngestionError);
  std::stringstream short_line("1\tuser=0\n");
  EXPECT_THROW(InteractionGraph::ReadEventLog(short_line), IngestionError);
}

}  // namespace
}  // namespace pigat
