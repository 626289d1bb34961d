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

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pigat {

std::optional<std::uint32_t> Vocabulary::Find(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::Add(std::string_view value) {
  auto [it, inserted] = index_.try_emplace(
      std::string(value), static_cast<std::uint32_t>(values_.size()));
  if (inserted) values_.emplace_back(value);
  return it->second;
}

namespace {

Part ParseSide(const std::string& side, std::size_t line_no) {
  if (side == "user") return Part::kUser;
  if (side == "item") return Part::kItem;
  throw SchemaError("schema line " + std::to_string(line_no) +
                    ": side must be user or item, got '" + side + "'");
}

const char* SideName(Part side) {
  return side == Part::kUser ? "user" : "item";
}

std::uint64_t Fnv(std::uint64_t h, std::string_view s) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;  // separator
  h *= 0x100000001b3ULL;
  return h;
}

}  // namespace

FeatureSchema FeatureSchema::Parse(std::istream& in) {
  FeatureSchema s;
  s.user_fields.clear();
  s.item_fields.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    std::string a, b, extra;
    ss >> a >> b;
    if (ss >> extra) {
      throw SchemaError("schema line " + std::to_string(line_no) +
                        ": trailing tokens");
    }
    if (head == "signal") {
      if (a == "binary") {
        s.signal = SignalKind::kBinary;
      } else if (a == "rating") {
        s.signal = SignalKind::kRating;
      } else {
        throw SchemaError("schema line " + std::to_string(line_no) +
                          ": signal must be binary or rating");
      }
      continue;
    }
    if (head == "oov") {
      if (a == "reserve") {
        s.oov = OovPolicy::kReserve;
      } else if (a == "error") {
        s.oov = OovPolicy::kError;
      } else {
        throw SchemaError("schema line " + std::to_string(line_no) +
                          ": oov must be reserve or error");
      }
      continue;
    }
    if (a.empty() || b.empty()) {
      throw SchemaError("schema line " + std::to_string(line_no) +
                        ": expected three tokens");
    }
    std::size_t number = 0;
    try {
      std::size_t used = 0;
      number = std::stoul(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw SchemaError("schema line " + std::to_string(line_no) + ": '" + b +
                        "' is not a non-negative integer");
    }
    if (head == "embed") {
      if (number == 0) {
        throw SchemaError("schema line " + std::to_string(line_no) +
                          ": embedding width must be positive");
      }
      (ParseSide(a, line_no) == Part::kUser ? s.user_width : s.item_width) =
          number;
      continue;
    }
    FieldSpec field;
    field.name = a;
    field.cardinality = number;
    s.fields(ParseSide(head, line_no)).push_back(std::move(field));
  }
  s.Validate();
  return s;
}

FeatureSchema FeatureSchema::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path);
  return Parse(in);
}

void FeatureSchema::Write(std::ostream& out) const {
  for (Part side : {Part::kUser, Part::kItem}) {
    for (const auto& f : fields(side)) {
      out << SideName(side) << ' ' << f.name << ' ' << f.cardinality << '\n';
    }
  }
  out << "embed user " << user_width << '\n';
  out << "embed item " << item_width << '\n';
  out << "signal " << (signal == SignalKind::kRating ? "rating" : "binary")
      << '\n';
  out << "oov " << (oov == OovPolicy::kReserve ? "reserve" : "error") << '\n';
}

void FeatureSchema::Validate() const {
  if (user_fields.empty() || item_fields.empty()) {
    throw SchemaError(
        "schema needs at least one user field and one item field");
  }
  if (user_width == 0 || item_width == 0) {
    throw SchemaError("embedding widths must be positive");
  }
  for (Part side : {Part::kUser, Part::kItem}) {
    const auto& fs = fields(side);
    for (std::size_t a = 0; a < fs.size(); ++a) {
      for (std::size_t b = a + 1; b < fs.size(); ++b) {
        if (fs[a].name == fs[b].name) {
          throw SchemaError(std::string("duplicate ") + SideName(side) +
                            " field '" + fs[a].name + "'");
        }
      }
    }
  }
}

std::size_t FeatureSchema::Offset(Part side, std::size_t field) const {
  const auto& fs = fields(side);
  std::size_t offset = 0;
  for (std::size_t f = 0; f < field; ++f) offset += fs[f].slots() + 1;
  return offset;
}

std::uint32_t FeatureSchema::GlobalId(Part side, std::size_t field,
                                      std::uint32_t local) const {
  return static_cast<std::uint32_t>(Offset(side, field) + local);
}

std::uint32_t FeatureSchema::OovId(Part side, std::size_t field) const {
  return GlobalId(side, field,
                  static_cast<std::uint32_t>(fields(side)[field].slots()));
}

std::uint32_t FeatureSchema::PaddingId(Part side) const {
  return static_cast<std::uint32_t>(TableRows(side) - 1);
}

std::size_t FeatureSchema::TableRows(Part side) const {
  return Offset(side, fields(side).size()) + 1;
}

std::uint32_t FeatureSchema::MapValue(Part side, std::size_t field,
                                      std::string_view value) {
  FieldSpec& f = fields(side).at(field);
  if (auto id = f.vocab.Find(value)) return GlobalId(side, field, *id);
  const bool has_room = f.cardinality == 0 || f.vocab.size() < f.cardinality;
  if (!frozen_ && has_room) return GlobalId(side, field, f.vocab.Add(value));
  if (oov == OovPolicy::kError) {
    throw SchemaError(std::string(SideName(side)) + " field '" + f.name +
                      "': value '" + std::string(value) +
                      "' is outside the vocabulary");
  }
  return OovId(side, field);
}

std::uint64_t FeatureSchema::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Part side : {Part::kUser, Part::kItem}) {
    h = Fnv(h, SideName(side));
    h = Fnv(h, std::to_string(width(side)));
    for (const auto& f : fields(side)) {
      h = Fnv(h, f.name);
      h = Fnv(h, std::to_string(f.slots()));
      for (const auto& v : f.vocab.values()) h = Fnv(h, v);
    }
  }
  return h;
}

EmbeddingTable::EmbeddingTable(std::string name, std::size_t rows,
                               std::size_t width, Rng& rng)
    : param_(std::move(name), rows, width) {
  if (rows == 0 || width == 0) {
    throw ShapeError("embedding table needs at least one row and column");
  }
  // A lookup is a linear layer over a one-hot input: one active fan-in.
  XavierUniform(param_.value, 1, width, rng);
  PinPadding();
}

void EmbeddingTable::CheckId(std::uint32_t id) const {
  if (id >= count()) {
    throw ShapeError("embedding id " + std::to_string(id) +
                     " out of range for table " + param_.name + " with " +
                     std::to_string(count()) + " rows");
  }
}

void EmbeddingTable::LookupInto(std::span<const std::uint32_t> ids,
                                std::span<double> out) const {
  const std::size_t h = width();
  if (out.size() != ids.size() * h) {
    throw ShapeError("lookup: output length " + std::to_string(out.size()) +
                     " vs " + std::to_string(ids.size()) + " ids of width " +
                     std::to_string(h));
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    CheckId(ids[k]);
    auto dst = out.subspan(k * h, h);
    if (ids[k] == padding_id()) {
      std::fill(dst.begin(), dst.end(), 0.0);
    } else {
      auto src = param_.value.row(ids[k]);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
}

Vector EmbeddingTable::Lookup(std::span<const std::uint32_t> ids) const {
  Vector out(ids.size() * width());
  LookupInto(ids, out);
  return out;
}

void EmbeddingTable::ScatterGradient(std::span<const std::uint32_t> ids,
                                     std::span<const double> upstream) {
  const std::size_t h = width();
  if (upstream.size() != ids.size() * h) {
    throw ShapeError(
        "scatter: upstream length " + std::to_string(upstream.size()) + " vs " +
        std::to_string(ids.size()) + " ids of width " + std::to_string(h));
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    CheckId(ids[k]);
    if (ids[k] == padding_id()) continue;
    Axpy(1.0, upstream.subspan(k * h, h), param_.grad.row(ids[k]));
  }
}

void EmbeddingTable::PinPadding() {
  auto row = param_.value.row(padding_id());
  std::fill(row.begin(), row.end(), 0.0);
  auto grad = param_.grad.row(padding_id());
  std::fill(grad.begin(), grad.end(), 0.0);
}

EncodedInstance EncodeInstance(const FeatureSchema& schema,
                               std::span<const EncodedRecord> records,
                               std::size_t index, const GraphSnapshot& view,
                               std::size_t max_neighbors) {
  if (max_neighbors == 0) throw DomainError("max_neighbors must be >= 1");
  const EncodedRecord& r = records[index];
  const std::size_t n_i = schema.item_fields.size();
  EncodedInstance inst;
  inst.user_profile = r.user_ids;
  inst.item_profile = r.item_ids;
  inst.label = r.label;
  inst.cutoff = view.cutoff();
  inst.user_neighbors.assign(max_neighbors * n_i,
                             schema.PaddingId(Part::kItem));
  inst.item_neighbors.assign(max_neighbors, schema.PaddingId(Part::kUser));
  inst.user_mask.assign(max_neighbors, 0);
  inst.item_mask.assign(max_neighbors, 0);

  const auto user_side =
      view.OrderedNeighbors(NodeId::User(r.user_node), max_neighbors);
  inst.user_len = user_side.size();
  for (std::size_t l = 0; l < user_side.size(); ++l) {
    const EncodedRecord& source = records[user_side[l].payload];
    if (source.item_ids.size() != n_i) {
      throw ShapeError("neighbor record has the wrong number of item fields");
    }
    std::copy(source.item_ids.begin(), source.item_ids.end(),
              inst.user_neighbors.begin() + l * n_i);
    inst.user_mask[l] = 1;
  }

  const auto item_side =
      view.OrderedNeighbors(NodeId::Item(r.item_node), max_neighbors);
  inst.item_len = item_side.size();
  for (std::size_t l = 0; l < item_side.size(); ++l) {
    inst.item_neighbors[l] = records[item_side[l].payload].user_ids.front();
    inst.item_mask[l] = 1;
  }
  return inst;
}

}  // namespace pigat
