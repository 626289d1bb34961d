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

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace pigat {
namespace {

constexpr const char* kMagic = "PIGAT-CHECKPOINT";
constexpr int kVersion = 1;

std::string HexFloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double ParseDouble(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw CheckpointError("malformed number '" + s + "'");
  }
  return v;
}

std::string ExpectLine(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw CheckpointError(std::string("truncated checkpoint: expected ") +
                          what);
  }
  return line;
}

std::string HashString(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace

std::string ModelConfigLine(const ModelConfig& c) {
  std::ostringstream out;
  out << "attention=" << ToString(c.attention)
      << " confidence=" << ToString(c.confidence)
      << " pooling=" << ToString(c.pooling)
      << " confidence_in_pooling=" << (c.confidence_in_pooling ? 1 : 0)
      << " user_query_all_heads=" << (c.user_query_all_heads ? 1 : 0)
      << " max_neighbors=" << c.max_neighbors
      << " integrate_width=" << c.integrate_width << " mlp_hidden=";
  for (std::size_t i = 0; i < c.mlp_hidden.size(); ++i) {
    out << (i ? "," : "") << c.mlp_hidden[i];
  }
  out << " dropout=" << HexFloat(c.dropout)
      << " leaky_slope=" << HexFloat(c.leaky_slope);
  return out.str();
}

ModelConfig ParseModelConfigLine(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw CheckpointError("model line token '" + token + "' lacks '='");
    }
    kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw CheckpointError(std::string("model line lacks ") + key);
    }
    return it->second;
  };
  ModelConfig c;
  c.attention = ParseAttentionKind(get("attention"));
  c.confidence = ParseConfidenceVariant(get("confidence"));
  c.pooling = ParsePoolingMode(get("pooling"));
  c.confidence_in_pooling = get("confidence_in_pooling") == "1";
  c.user_query_all_heads = get("user_query_all_heads") == "1";
  c.max_neighbors = std::stoul(get("max_neighbors"));
  c.integrate_width = std::stoul(get("integrate_width"));
  c.mlp_hidden.clear();
  std::istringstream hidden(get("mlp_hidden"));
  std::string w;
  while (std::getline(hidden, w, ',')) {
    if (!w.empty()) c.mlp_hidden.push_back(std::stoul(w));
  }
  c.dropout = ParseDouble(get("dropout"));
  c.leaky_slope = ParseDouble(get("leaky_slope"));
  return c;
}

void SaveCheckpoint(std::ostream& out, const FeatureSchema& schema,
                    const PigatModel& model) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "schema_hash " << HashString(schema.Hash()) << '\n';
  out << "model " << ModelConfigLine(model.config()) << '\n';
  out << "schema_begin\n";
  schema.Write(out);
  for (Part side : {Part::kUser, Part::kItem}) {
    const auto& fields = schema.fields(side);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto& values = fields[f].vocab.values();
      out << "vocab " << (side == Part::kUser ? "user" : "item") << ' ' << f
          << ' ' << values.size() << '\n';
      for (const auto& v : values) out << v << '\n';
    }
  }
  out << "schema_end\n";
  const auto params = model.Parameters();
  out << "params " << params.size() << '\n';
  for (const Param* p : params) {
    out << "param " << p->name << ' ' << p->value.rows() << ' '
        << p->value.cols() << ' ' << (p->trainable ? 1 : 0) << '\n';
    bool first = true;
    for (double v : p->value.values()) {
      out << (first ? "" : " ") << HexFloat(v);
      first = false;
    }
    out << '\n';
  }
  out << "end\n";
}

void SaveCheckpoint(const std::string& path, const FeatureSchema& schema,
                    const PigatModel& model) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  SaveCheckpoint(out, schema, model);
  if (!out) throw CheckpointError("error while writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(std::istream& in) {
  {
    std::istringstream header(ExpectLine(in, "header"));
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic) throw CheckpointError("not a checkpoint file");
    if (version != kVersion) {
      throw CheckpointError("unsupported checkpoint version " +
                            std::to_string(version));
    }
  }
  std::string line = ExpectLine(in, "schema_hash");
  if (line.rfind("schema_hash ", 0) != 0) {
    throw CheckpointError("expected schema_hash line");
  }
  const std::string stored_hash = line.substr(12);
  line = ExpectLine(in, "model line");
  if (line.rfind("model ", 0) != 0)
    throw CheckpointError("expected model line");
  const ModelConfig config = ParseModelConfigLine(line.substr(6));

  if (ExpectLine(in, "schema_begin") != "schema_begin") {
    throw CheckpointError("expected schema_begin");
  }
  std::ostringstream schema_text;
  Checkpoint ck;
  std::vector<std::tuple<Part, std::size_t, std::vector<std::string>>> vocabs;
  while (true) {
    line = ExpectLine(in, "schema_end");
    if (line == "schema_end") break;
    if (line.rfind("vocab ", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::string side;
      std::size_t field = 0, count = 0;
      ss >> side >> field >> count;
      std::vector<std::string> values;
      values.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        values.push_back(ExpectLine(in, "vocabulary value"));
      }
      vocabs.emplace_back(side == "user" ? Part::kUser : Part::kItem, field,
                          std::move(values));
      continue;
    }
    schema_text << line << '\n';
  }
  std::istringstream schema_in(schema_text.str());
  ck.schema = FeatureSchema::Parse(schema_in);
  for (auto& [side, field, values] : vocabs) {
    auto& fields = ck.schema.fields(side);
    if (field >= fields.size()) {
      throw CheckpointError("vocabulary for unknown field index");
    }
    for (const auto& v : values) fields[field].vocab.Add(v);
  }
  ck.schema.Freeze();
  if (HashString(ck.schema.Hash()) != stored_hash) {
    throw CheckpointError("schema hash mismatch: stored " + stored_hash +
                          ", recomputed " + HashString(ck.schema.Hash()));
  }

  Rng rng(0);
  ck.model = PigatModel(ck.schema, config, rng);
  auto params = ck.model.Parameters();
  line = ExpectLine(in, "params");
  std::size_t count = 0;
  if (std::sscanf(line.c_str(), "params %zu", &count) != 1 ||
      count != params.size()) {
    throw CheckpointError("parameter count mismatch: file has '" + line +
                          "', model expects " + std::to_string(params.size()));
  }
  for (Param* p : params) {
    std::istringstream ss(ExpectLine(in, "param header"));
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    int trainable = 0;
    ss >> tag >> name >> rows >> cols >> trainable;
    if (tag != "param" || name != p->name || rows != p->value.rows() ||
        cols != p->value.cols()) {
      throw CheckpointError("parameter " + p->name + " (" +
                            p->value.ShapeString() +
                            ") does not match stored '" + name + "' " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::istringstream values(ExpectLine(in, "parameter values"));
    std::string token;
    for (double& v : p->value.values()) {
      if (!(values >> token)) {
        throw CheckpointError("too few values for parameter " + p->name);
      }
      v = ParseDouble(token);
    }
    if (values >> token) {
      throw CheckpointError("too many values for parameter " + p->name);
    }
  }
  if (ExpectLine(in, "end") != "end") throw CheckpointError("expected end");
  return ck;
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  return LoadCheckpoint(in);
}

}  // namespace pigat
