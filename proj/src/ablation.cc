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

#include "pigat/ablation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "pigat/metrics.h"
#include "pigat/trainer.h"

namespace pigat {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::uint64_t> ParseSeeds(const std::string& v) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    char* end = nullptr;
    const unsigned long long s = std::strtoull(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0' || item[0] == '-') {
      throw ConfigError("seeds: '" + item + "' is not a seed");
    }
    seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("seeds: empty list");
  return seeds;
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", *v);
  return buf;
}

std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

struct MeanStd {
  std::optional<double> mean;
  std::optional<double> std;
};

MeanStd Moments(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  out.mean = mean;
  out.std =
      xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
  return out;
}

}  // namespace

AblationMatrix AblationMatrix::Parse(std::istream& in) {
  AblationMatrix m;
  std::vector<std::pair<std::string, std::string>> base;
  std::vector<
      std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
      sections;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("matrix line " + std::to_string(line_no) +
                          ": malformed section header");
      }
      sections.push_back({Trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("matrix line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    auto kv =
        std::make_pair(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
    if (sections.empty()) {
      if (kv.first == "seeds") {
        m.seeds = ParseSeeds(kv.second);
      } else {
        base.push_back(std::move(kv));
      }
    } else {
      sections.back().second.push_back(std::move(kv));
    }
  }
  for (const auto& [name, overrides] : sections) {
    AblationEntry entry;
    entry.name = name;
    for (const auto& [k, v] : base) entry.config.Set(k, v);
    for (const auto& [k, v] : overrides) entry.config.Set(k, v);
    entry.config.Validate();
    m.entries.push_back(std::move(entry));
  }
  return m;
}

AblationMatrix AblationMatrix::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path);
  return Parse(in);
}

AblationResult RunOne(const std::string& name, const TrainConfig& config,
                      const FeatureSchema& schema,
                      const InstanceSet& instances) {
  AblationResult r;
  r.name = name;
  r.fingerprint = config.Fingerprint();
  r.seed = config.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const TrainResult trained = Train(config, schema, instances);
    ScoredSet scored;
    scored.scores = Predict(trained.model, instances.test);
    scored.labels = Labels(instances.test);
    scored.item_degrees = instances.test_item_degrees;
    try {
      r.test_auc = Auc(scored);
    } catch (const UndefinedAucError&) {
      r.test_auc.reset();
    }
    for (std::size_t t = 0; t < kLongtailThresholds.size(); ++t) {
      r.longtail[t] = LongtailAuc(scored, kLongtailThresholds[t]);
    }
  } catch (const std::exception& e) {
    r.error = Sanitize(e.what());
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return r;
}

std::vector<AblationResult> RunAblation(const AblationMatrix& matrix,
                                        const Dataset& data,
                                        const ResultCallback& on_result) {
  if (matrix.entries.empty()) throw UsageError("ablation matrix is empty");
  if (matrix.seeds.empty())
    throw UsageError("ablation needs at least one seed");
  const DatasetSplit split = TimelineSplit(data.records);
  // Instance sets depend only on the graph settings, so they are shared.
  std::map<std::tuple<int, std::size_t, bool>, InstanceSet> cache;
  std::vector<AblationResult> results;
  for (const auto& entry : matrix.entries) {
    const auto key = std::make_tuple(static_cast<int>(entry.config.graph_mode),
                                     entry.config.max_neighbors,
                                     entry.config.include_negative_neighbors);
    auto it = cache.find(key);
    if (it == cache.end()) {
      InstanceOptions options;
      options.mode = entry.config.graph_mode;
      options.max_neighbors = entry.config.max_neighbors;
      options.include_negative_neighbors =
          entry.config.include_negative_neighbors;
      it = cache.emplace(key, BuildInstances(data, split, options)).first;
    }
    for (std::uint64_t seed : matrix.seeds) {
      TrainConfig config = entry.config;
      config.seed = seed;
      results.push_back(RunOne(entry.name, config, data.schema, it->second));
      if (on_result) on_result(results.back());
    }
  }
  return results;
}

std::vector<AblationSummary> Summarize(
    const std::vector<AblationResult>& results) {
  std::vector<std::string> names;
  for (const auto& r : results) {
    if (std::find(names.begin(), names.end(), r.name) == names.end()) {
      names.push_back(r.name);
    }
  }
  std::vector<AblationSummary> out;
  for (const auto& name : names) {
    AblationSummary s;
    s.name = name;
    std::vector<double> aucs;
    std::array<std::vector<double>, kLongtailThresholds.size()> tails;
    for (const auto& r : results) {
      if (r.name != name || !r.ok()) continue;
      if (r.test_auc) aucs.push_back(*r.test_auc);
      for (std::size_t t = 0; t < tails.size(); ++t) {
        if (r.longtail[t]) tails[t].push_back(*r.longtail[t]);
      }
    }
    const MeanStd auc = Moments(aucs);
    s.runs = aucs.size();
    s.mean_auc = auc.mean.value_or(std::nan(""));
    s.std_auc = auc.std.value_or(std::nan(""));
    for (std::size_t t = 0; t < tails.size(); ++t) {
      const MeanStd m = Moments(tails[t]);
      s.mean_longtail[t] = m.mean;
      s.std_longtail[t] = m.std;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void WriteAblationTable(std::ostream& out,
                        const std::vector<AblationResult>& results) {
  out << "config\tseed\tfingerprint\ttest_auc";
  for (std::size_t k : kLongtailThresholds) out << "\tauc_k" << k;
  out << "\twall_s\tstatus\n";
  char buf[32];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_seconds);
    out << r.name << '\t' << r.seed << '\t' << r.fingerprint << '\t'
        << Cell(r.test_auc);
    for (const auto& t : r.longtail) out << '\t' << Cell(t);
    out << '\t' << buf << '\t' << (r.ok() ? "ok" : "failed: " + r.error)
        << '\n';
  }
  for (const auto& s : Summarize(results)) {
    const std::optional<double> mean =
        s.runs > 0 ? std::optional<double>(s.mean_auc) : std::nullopt;
    const std::optional<double> sd =
        s.runs > 0 ? std::optional<double>(s.std_auc) : std::nullopt;
    out << s.name << "\tmean\t-\t" << Cell(mean);
    for (const auto& t : s.mean_longtail) out << '\t' << Cell(t);
    out << "\t-\t" << s.runs << " runs\n";
    out << s.name << "\tstd\t-\t" << Cell(sd);
    for (const auto& t : s.std_longtail) out << '\t' << Cell(t);
    out << "\t-\t" << s.runs << " runs\n";
  }
}

}  // namespace pigat
