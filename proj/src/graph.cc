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

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pigat {

EdgeOrders InteractionGraph::Insert(const InteractionEvent& e) {
  if (e.timestamp < 0) {
    throw IngestionError("negative timestamp " + std::to_string(e.timestamp));
  }
  if (!events_.empty() && e.timestamp < events_.back().timestamp) {
    throw IngestionError("out-of-order timestamp " +
                         std::to_string(e.timestamp) + " after " +
                         std::to_string(events_.back().timestamp) +
                         "; sort events before inserting");
  }
  if (max_users_ && e.user >= *max_users_) {
    throw IngestionError("user index " + std::to_string(e.user) +
                         " outside a vocabulary of " +
                         std::to_string(*max_users_));
  }
  if (max_items_ && e.item >= *max_items_) {
    throw IngestionError("item index " + std::to_string(e.item) +
                         " outside a vocabulary of " +
                         std::to_string(*max_items_));
  }
  if (e.user >= user_adjacency_.size()) user_adjacency_.resize(e.user + 1);
  if (e.item >= item_adjacency_.size()) item_adjacency_.resize(e.item + 1);

  const auto index = static_cast<std::uint32_t>(events_.size());
  events_.push_back(e);
  auto& user_edges = user_adjacency_[e.user];
  auto& item_edges = item_adjacency_[e.item];
  user_edges.push_back(index);
  item_edges.push_back(index);
  return {static_cast<std::uint32_t>(user_edges.size()),
          static_cast<std::uint32_t>(item_edges.size())};
}

const std::vector<std::uint32_t>* InteractionGraph::Adjacency(NodeId v) const {
  const auto& table = v.part == Part::kUser ? user_adjacency_ : item_adjacency_;
  if (v.index >= table.size()) return nullptr;
  return &table[v.index];
}

GraphSnapshot InteractionGraph::SnapshotAt(Timestamp t) const {
  return GraphSnapshot(this, t, events_.size());
}

std::vector<Neighbor> InteractionGraph::OrderedNeighbors(
    NodeId v, std::size_t max_len) const {
  return Live().OrderedNeighbors(v, max_len);
}

std::size_t InteractionGraph::Degree(NodeId v) const {
  return Live().Degree(v);
}

std::size_t GraphSnapshot::VisiblePrefix(
    const std::vector<std::uint32_t>& adjacency) const {
  // Event indices and their timestamps both increase along the list, so the
  // visible edges form a prefix.
  const auto& events = graph_->events_;
  auto it = std::partition_point(
      adjacency.begin(), adjacency.end(), [&](std::uint32_t e) {
        return e < visible_events_ && events[e].timestamp < cutoff_;
      });
  return static_cast<std::size_t>(it - adjacency.begin());
}

std::vector<Neighbor> GraphSnapshot::OrderedNeighbors(
    NodeId v, std::size_t max_len) const {
  std::vector<Neighbor> out;
  const auto* adjacency = graph_->Adjacency(v);
  if (adjacency == nullptr) return out;
  const std::size_t live = VisiblePrefix(*adjacency);
  const std::size_t first = live > max_len ? live - max_len : 0;
  out.reserve(live - first);
  for (std::size_t j = first; j < live; ++j) {
    const std::uint32_t e = (*adjacency)[j];
    const auto& event = graph_->events_[e];
    const NodeId tail = v.part == Part::kUser ? NodeId::Item(event.item)
                                              : NodeId::User(event.user);
    assert(tail.part != v.part);
    out.push_back({tail, static_cast<std::uint32_t>(j + 1), e, event.payload});
  }
  return out;
}

std::size_t GraphSnapshot::Degree(NodeId v) const {
  const auto* adjacency = graph_->Adjacency(v);
  return adjacency == nullptr ? 0 : VisiblePrefix(*adjacency);
}

void InteractionGraph::WriteEventLog(std::ostream& out) const {
  for (const auto& e : events_) {
    out << e.timestamp << "\tuser=" << e.user << "\titem=" << e.item << '\t'
        << e.label << '\n';
  }
}

namespace {

std::uint32_t ParseIndexField(const std::string& field, const char* key,
                              std::size_t line_no) {
  const std::string prefix = std::string(key) + "=";
  if (field.rfind(prefix, 0) != 0) {
    throw IngestionError("event log line " + std::to_string(line_no) +
                         ": expected " + prefix + "<index>");
  }
  return static_cast<std::uint32_t>(std::stoul(field.substr(prefix.size())));
}

}  // namespace

InteractionGraph InteractionGraph::ReadEventLog(std::istream& in) {
  InteractionGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 4) {
      throw IngestionError("event log line " + std::to_string(line_no) +
                           ": expected 4 tab-separated columns");
    }
    try {
      InteractionEvent e;
      e.timestamp = std::stoll(cols[0]);
      e.user = ParseIndexField(cols[1], "user", line_no);
      e.item = ParseIndexField(cols[2], "item", line_no);
      e.label = std::stoi(cols[3]);
      e.payload = g.events_.size();
      g.Insert(e);
    } catch (const std::logic_error&) {
      throw IngestionError("event log line " + std::to_string(line_no) +
                           ": malformed number");
    }
  }
  return g;
}

}  // namespace pigat
