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

#include "pigat/config.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pigat {

std::string_view ToString(GraphMode m) {
  return m == GraphMode::kDynamic ? "dynamic" : "static";
}

GraphMode ParseGraphMode(std::string_view s) {
  if (s == "dynamic") return GraphMode::kDynamic;
  if (s == "static") return GraphMode::kStatic;
  throw ConfigError("unknown graph mode '" + std::string(s) +
                    "' (expected dynamic|static)");
}

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
  return d;
}

long long ToInt(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') {
    throw ConfigError(key + ": '" + v + "' is not an integer");
  }
  return i;
}

std::size_t ToSize(const std::string& key, const std::string& v) {
  const long long i = ToInt(key, v);
  if (i < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::size_t>(i);
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

// Shortest decimal text that parses back to exactly `v`.
std::string Num(double v) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ReadKeyValues(
    std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    out.emplace_back(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return out;
}

const std::vector<std::string>& TrainConfig::Keys() {
  static const std::vector<std::string> keys = {"learning_rate",
                                                "decay_rate",
                                                "decay_every",
                                                "l2",
                                                "dropout",
                                                "batch_size",
                                                "epochs",
                                                "seed",
                                                "confidence",
                                                "attention",
                                                "graph_mode",
                                                "pooling",
                                                "max_neighbors",
                                                "embed_user",
                                                "embed_item",
                                                "integrate_width",
                                                "confidence_in_pooling",
                                                "user_query_all_heads",
                                                "include_negative_neighbors",
                                                "beta1",
                                                "beta2",
                                                "epsilon"};
  return keys;
}

void TrainConfig::Set(const std::string& key, const std::string& v) {
  try {
    if (key == "learning_rate") {
      learning_rate = ToDouble(key, v);
    } else if (key == "decay_rate") {
      decay_rate = ToDouble(key, v);
    } else if (key == "decay_every") {
      decay_every = static_cast<int>(ToInt(key, v));
    } else if (key == "l2") {
      l2 = ToDouble(key, v);
    } else if (key == "dropout") {
      dropout = ToDouble(key, v);
    } else if (key == "batch_size") {
      batch_size = ToSize(key, v);
    } else if (key == "epochs") {
      epochs = static_cast<int>(ToInt(key, v));
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(ToSize(key, v));
    } else if (key == "confidence") {
      confidence = ParseConfidenceVariant(v);
    } else if (key == "attention") {
      attention = ParseAttentionKind(v);
    } else if (key == "graph_mode") {
      graph_mode = ParseGraphMode(v);
    } else if (key == "pooling") {
      pooling = ParsePoolingMode(v);
    } else if (key == "max_neighbors") {
      max_neighbors = ToSize(key, v);
    } else if (key == "embed_user") {
      embed_user = ToSize(key, v);
    } else if (key == "embed_item") {
      embed_item = ToSize(key, v);
    } else if (key == "integrate_width") {
      integrate_width = ToSize(key, v);
    } else if (key == "confidence_in_pooling") {
      confidence_in_pooling = ToBool(key, v);
    } else if (key == "user_query_all_heads") {
      user_query_all_heads = ToBool(key, v);
    } else if (key == "include_negative_neighbors") {
      include_negative_neighbors = ToBool(key, v);
    } else if (key == "beta1") {
      beta1 = ToDouble(key, v);
    } else if (key == "beta2") {
      beta2 = ToDouble(key, v);
    } else if (key == "epsilon") {
      epsilon = ToDouble(key, v);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

TrainConfig TrainConfig::Parse(std::istream& in) {
  TrainConfig c;
  for (const auto& [key, value] : ReadKeyValues(in)) c.Set(key, value);
  c.Validate();
  return c;
}

TrainConfig TrainConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return Parse(in);
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(decay_rate > 0.0 && decay_rate <= 1.0,
          "decay_rate must lie in (0, 1]");
  require(decay_every >= 1, "decay_every must be >= 1");
  require(l2 >= 0.0, "l2 must be non-negative");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(max_neighbors >= 1, "max_neighbors must be >= 1");
  require(embed_user >= 1 && embed_item >= 1, "embedding widths must be >= 1");
  require(integrate_width >= 1, "integrate_width must be >= 1");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be positive");
}

ModelConfig TrainConfig::ToModelConfig() const {
  ModelConfig m;
  m.attention = attention;
  m.confidence = confidence;
  m.pooling = pooling;
  m.confidence_in_pooling = confidence_in_pooling;
  m.user_query_all_heads = user_query_all_heads;
  m.max_neighbors = max_neighbors;
  m.integrate_width = integrate_width;
  m.dropout = dropout;
  return m;
}

void TrainConfig::Write(std::ostream& out) const {
  out << "learning_rate = " << Num(learning_rate) << '\n'
      << "decay_rate = " << Num(decay_rate) << '\n'
      << "decay_every = " << decay_every << '\n'
      << "l2 = " << Num(l2) << '\n'
      << "dropout = " << Num(dropout) << '\n'
      << "batch_size = " << batch_size << '\n'
      << "epochs = " << epochs << '\n'
      << "seed = " << seed << '\n'
      << "confidence = " << ToString(confidence) << '\n'
      << "attention = " << ToString(attention) << '\n'
      << "graph_mode = " << ToString(graph_mode) << '\n'
      << "pooling = " << ToString(pooling) << '\n'
      << "max_neighbors = " << max_neighbors << '\n'
      << "embed_user = " << embed_user << '\n'
      << "embed_item = " << embed_item << '\n'
      << "integrate_width = " << integrate_width << '\n'
      << "confidence_in_pooling = "
      << (confidence_in_pooling ? "true" : "false") << '\n'
      << "user_query_all_heads = " << (user_query_all_heads ? "true" : "false")
      << '\n'
      << "include_negative_neighbors = "
      << (include_negative_neighbors ? "true" : "false") << '\n'
      << "beta1 = " << Num(beta1) << '\n'
      << "beta2 = " << Num(beta2) << '\n'
      << "epsilon = " << Num(epsilon) << '\n';
}

std::string TrainConfig::Fingerprint() const {
  std::ostringstream out;
  out << ToString(attention) << '/' << ToString(confidence) << '/'
      << ToString(graph_mode) << '/' << ToString(pooling)
      << "/lr=" << Num(learning_rate) << "/l2=" << Num(l2)
      << "/drop=" << Num(dropout) << "/bs=" << batch_size << "/ep=" << epochs
      << "/k=" << max_neighbors << "/H=" << embed_user << ',' << embed_item;
  return out.str();
}

}  // namespace pigat
