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

// Dynamic user-item interaction graph.
//
// The graph is an append-only event log plus one adjacency list per node. Each
// interaction creates two directed edges, user->item and item->user, and each
// edge carries its order relative to its head: the k-th interaction of a node
// has order k. Snapshots are cutoff filters over the same storage, so taking
// one is O(1) and later inserts never change what an existing snapshot sees.
//
// Concurrency: single writer, many readers between writes.

#ifndef PIGAT_GRAPH_H_
#define PIGAT_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pigat {

enum class Part : std::uint8_t { kUser = 0, kItem = 1 };

struct NodeId {
  Part part = Part::kUser;
  std::uint32_t index = 0;

  static NodeId User(std::uint32_t i) { return {Part::kUser, i}; }
  static NodeId Item(std::uint32_t i) { return {Part::kItem, i}; }
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

using Timestamp = std::int64_t;
inline constexpr Timestamp kEndOfTime = std::numeric_limits<Timestamp>::max();

struct InteractionEvent {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  Timestamp timestamp = 0;
  // Caller-owned reference (typically the record index) and label.
  std::size_t payload = 0;
  int label = 0;
};

struct Neighbor {
  NodeId tail;
  std::uint32_t order = 0;  // 1-based, relative to the head
  std::size_t event = 0;    // index into the graph's event log
  std::size_t payload = 0;  // the event's payload
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct EdgeOrders {
  std::uint32_t user_side = 0;
  std::uint32_t item_side = 0;
  friend bool operator==(const EdgeOrders&, const EdgeOrders&) = default;
};

class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InteractionGraph;

// Read-only view of the events with timestamp < cutoff that existed when the
// snapshot was taken. Valid as long as the graph is alive.
class GraphSnapshot {
 public:
  Timestamp cutoff() const { return cutoff_; }

  // Last min(L, max_len) neighbors of `v`, in ascending order.
  std::vector<Neighbor> OrderedNeighbors(NodeId v,
                                         std::size_t max_len = SIZE_MAX) const;
  // Untruncated interaction count L of `v` within the view.
  std::size_t Degree(NodeId v) const;

 private:
  friend class InteractionGraph;
  GraphSnapshot(const InteractionGraph* graph, Timestamp cutoff,
                std::size_t visible_events)
      : graph_(graph), cutoff_(cutoff), visible_events_(visible_events) {}

  std::size_t VisiblePrefix(const std::vector<std::uint32_t>& adjacency) const;

  const InteractionGraph* graph_;
  Timestamp cutoff_;
  std::size_t visible_events_;
};

class InteractionGraph {
 public:
  InteractionGraph() = default;
  // Frozen vocabularies: node indices at or above these bounds are rejected.
  InteractionGraph(std::size_t max_users, std::size_t max_items)
      : max_users_(max_users), max_items_(max_items) {}

  // Appends an interaction. Timestamps must be non-decreasing; ties keep
  // insertion order. Returns the head-relative orders of the two new edges.
  EdgeOrders Insert(const InteractionEvent& e);

  GraphSnapshot SnapshotAt(Timestamp t) const;
  GraphSnapshot Live() const { return SnapshotAt(kEndOfTime); }

  std::vector<Neighbor> OrderedNeighbors(NodeId v,
                                         std::size_t max_len = SIZE_MAX) const;
  std::size_t Degree(NodeId v) const;

  const std::vector<InteractionEvent>& events() const { return events_; }
  std::size_t user_count() const { return user_adjacency_.size(); }
  std::size_t item_count() const { return item_adjacency_.size(); }

  // Event-log dump in the interactions file format, one line per event:
  // `timestamp<TAB>user=<index><TAB>item=<index><TAB>label`.
  void WriteEventLog(std::ostream& out) const;
  static InteractionGraph ReadEventLog(std::istream& in);

 private:
  friend class GraphSnapshot;
  const std::vector<std::uint32_t>* Adjacency(NodeId v) const;

  std::optional<std::size_t> max_users_;
  std::optional<std::size_t> max_items_;
  std::vector<InteractionEvent> events_;
  // Event indices per node, in insertion order.
  std::vector<std::vector<std::uint32_t>> user_adjacency_;
  std::vector<std::vector<std::uint32_t>> item_adjacency_;
};

}  // namespace pigat

#endif  // PIGAT_GRAPH_H_
