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

#include "pigat/data.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <string_view>

namespace pigat {
namespace {

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct ParsedLine {
  Timestamp timestamp = 0;
  std::vector<std::string> user_values;
  std::vector<std::string> item_values;
  double signal = 0.0;
};

class LineParser {
 public:
  LineParser(const FeatureSchema& schema, const std::string& source)
      : schema_(schema), source_(source) {}

  ParsedLine Parse(std::string_view line, std::size_t line_no) const {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto cols = Split(line, '\t');
    if (cols.size() != 4) {
      Fail(line_no, "expected 4 tab-separated columns, found " +
                        std::to_string(cols.size()));
    }
    ParsedLine out;
    out.timestamp = ParseInt(cols[0], line_no);
    out.user_values = ParseFields(Part::kUser, cols[1], line_no);
    out.item_values = ParseFields(Part::kItem, cols[2], line_no);
    out.signal = ParseSignal(cols[3], line_no);
    return out;
  }

  [[noreturn]] void Fail(std::size_t line_no, const std::string& what) const {
    throw IngestionError(source_ + ":" + std::to_string(line_no) + ": " + what);
  }

 private:
  Timestamp ParseInt(std::string_view s, std::size_t line_no) const {
    const std::string text(s);
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0') {
      Fail(line_no, "bad timestamp '" + text + "'");
    }
    if (v < 0) Fail(line_no, "negative timestamp");
    return v;
  }

  double ParseSignal(std::string_view s, std::size_t line_no) const {
    const std::string text(s);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || !std::isfinite(v)) {
      Fail(line_no, "bad signal '" + text + "'");
    }
    if (schema_.signal == SignalKind::kBinary && v != 0.0 && v != 1.0) {
      Fail(line_no, "binary signal must be 0 or 1, got '" + text + "'");
    }
    return v;
  }

  std::vector<std::string> ParseFields(Part side, std::string_view column,
                                       std::size_t line_no) const {
    const auto& specs = schema_.fields(side);
    const char* side_name = side == Part::kUser ? "user" : "item";
    std::vector<std::string> values(specs.size());
    std::vector<bool> seen(specs.size(), false);
    for (std::string_view pair : Split(column, ';')) {
      if (pair.empty()) continue;
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos) {
        Fail(line_no, std::string("malformed ") + side_name + " field '" +
                          std::string(pair) + "'");
      }
      const std::string_view name = pair.substr(0, eq);
      const auto it =
          std::find_if(specs.begin(), specs.end(),
                       [&](const auto& f) { return f.name == name; });
      if (it == specs.end()) {
        Fail(line_no, std::string("unknown ") + side_name + " field '" +
                          std::string(name) + "'");
      }
      const std::size_t f = static_cast<std::size_t>(it - specs.begin());
      if (seen[f]) {
        Fail(line_no, std::string("duplicate ") + side_name + " field '" +
                          std::string(name) + "'");
      }
      seen[f] = true;
      values[f] = std::string(pair.substr(eq + 1));
    }
    for (std::size_t f = 0; f < specs.size(); ++f) {
      if (!seen[f]) {
        Fail(line_no, std::string("missing ") + side_name + " field '" +
                          specs[f].name + "'");
      }
    }
    return values;
  }

  const FeatureSchema& schema_;
  const std::string& source_;
};

}  // namespace

Dataset Ingest(std::istream& in, FeatureSchema schema,
               const std::string& source) {
  schema.Validate();
  Dataset data;
  data.schema = std::move(schema);
  const LineParser parser(data.schema, source);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ParsedLine parsed = parser.Parse(line, line_no);
    EncodedRecord r;
    r.timestamp = parsed.timestamp;
    r.signal = parsed.signal;
    r.label = data.schema.signal == SignalKind::kRating
                  ? (parsed.signal > kRatingThreshold ? 1 : 0)
                  : static_cast<int>(parsed.signal);
    try {
      for (std::size_t f = 0; f < parsed.user_values.size(); ++f) {
        r.user_ids.push_back(
            data.schema.MapValue(Part::kUser, f, parsed.user_values[f]));
      }
      for (std::size_t f = 0; f < parsed.item_values.size(); ++f) {
        r.item_ids.push_back(
            data.schema.MapValue(Part::kItem, f, parsed.item_values[f]));
      }
    } catch (const SchemaError& e) {
      parser.Fail(line_no, e.what());
    }
    r.user_node = data.user_nodes.Add(parsed.user_values.front());
    r.item_node = data.item_nodes.Add(parsed.item_values.front());
    data.records.push_back(std::move(r));
  }
  if (data.records.empty()) {
    throw IngestionError(source + ": no interaction records");
  }
  std::stable_sort(data.records.begin(), data.records.end(),
                   [](const EncodedRecord& a, const EncodedRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  return data;
}

Dataset IngestFile(const std::string& path, FeatureSchema schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open interactions file " + path);
  return Ingest(in, std::move(schema), path);
}

DatasetSplit TimelineSplit(std::span<const EncodedRecord> records,
                           double train_fraction, double val_fraction) {
  if (records.size() < 10) {
    throw IngestionError("timeline split needs at least 10 records, got " +
                         std::to_string(records.size()));
  }
  if (!(train_fraction > 0.0) || !(val_fraction > 0.0) ||
      train_fraction + val_fraction >= 1.0) {
    throw DomainError("split fractions must be positive and sum below 1");
  }
  const double n = static_cast<double>(records.size());
  DatasetSplit s;
  s.total = records.size();
  // The small epsilon keeps exact products such as 0.8 * 10 from rounding
  // down to 7.
  s.train_end = static_cast<std::size_t>(std::floor(n * train_fraction + 1e-9));
  s.val_end = static_cast<std::size_t>(
      std::floor(n * (train_fraction + val_fraction) + 1e-9));
  return s;
}

std::vector<std::size_t> ItemDegrees(const Dataset& data, std::size_t end) {
  std::vector<std::size_t> degrees(data.item_nodes.size(), 0);
  for (std::size_t i = 0; i < end && i < data.records.size(); ++i) {
    ++degrees[data.records[i].item_node];
  }
  return degrees;
}

InstanceSet BuildInstances(const Dataset& data, const DatasetSplit& split,
                           const InstanceOptions& options) {
  const auto& records = data.records;
  if (split.total != records.size() || split.train_end > split.val_end ||
      split.val_end > split.total) {
    throw UsageError("split does not describe this dataset");
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp < records[i - 1].timestamp) {
      throw UsageError("records must be sorted by timestamp");
    }
  }

  InteractionGraph graph(data.user_nodes.size(), data.item_nodes.size());
  auto insert = [&](std::size_t i) {
    const EncodedRecord& r = records[i];
    if (r.label == 0 && !options.include_negative_neighbors) return;
    graph.Insert({r.user_node, r.item_node, r.timestamp, i, r.label});
  };
  if (options.mode == GraphMode::kStatic) {
    for (std::size_t i = 0; i < split.train_end; ++i) insert(i);
  }

  InstanceSet out;
  const auto degrees = ItemDegrees(data, split.train_end);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EncodedInstance inst =
        options.mode == GraphMode::kDynamic
            ? EncodeInstance(data.schema, records, i,
                             graph.SnapshotAt(records[i].timestamp),
                             options.max_neighbors)
            : EncodeInstance(data.schema, records, i, graph.Live(),
                             options.max_neighbors);
    if (options.mode == GraphMode::kDynamic) insert(i);
    if (i < split.train_end) {
      out.train.push_back(std::move(inst));
    } else if (i < split.val_end) {
      out.val.push_back(std::move(inst));
      out.val_item_degrees.push_back(degrees[records[i].item_node]);
    } else {
      out.test.push_back(std::move(inst));
      out.test_item_degrees.push_back(degrees[records[i].item_node]);
    }
  }
  return out;
}

}  // namespace pigat
