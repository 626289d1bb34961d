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

// pigat: synth | train | eval | gradcheck | ablate
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pigat/ablation.h"
#include "pigat/checkpoint.h"
#include "pigat/config.h"
#include "pigat/data.h"
#include "pigat/gradcheck.h"
#include "pigat/metrics.h"
#include "pigat/synthetic.h"
#include "pigat/trainer.h"

namespace {

using namespace pigat;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  return out;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int RunSynth(const SynthArgs& a) {
  SyntheticSpec spec = SyntheticSpec::Load(a.spec);
  if (a.seed) spec.seed = *a.seed;
  Rng rng(DeriveSeed(spec.seed, "synthetic"));
  const SyntheticData data = GenerateSynthetic(spec, rng);
  const std::filesystem::path dir(a.out);
  {
    auto out = OpenOut(dir / "interactions.tsv");
    data.WriteInteractions(out);
  }
  {
    auto out = OpenOut(dir / "schema.txt");
    data.Schema().Write(out);
  }
  {
    auto out = OpenOut(dir / "latents.tsv");
    data.WriteLatents(out);
  }
  {
    auto out = OpenOut(dir / "spec.txt");
    spec.Write(out);
  }
  const DegreeSummary s = SummarizeDegrees(data);
  std::cout << "events\t" << data.events.size() << '\n'
            << "items\t" << s.items << '\n'
            << "items_touched\t" << s.touched_items << '\n'
            << "max_item_degree\t" << s.max_degree << '\n'
            << "items_degree_le_3\t" << s.at_most_3 << '\n'
            << "longtail_fraction\t" << Fmt(s.longtail_fraction) << '\n'
            << "positive_rate\t" << Fmt(s.positive_rate) << '\n';
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string schema;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int RunTrain(const TrainArgs& a) {
  TrainConfig config = TrainConfig::Load(a.config);
  if (a.seed) config.seed = *a.seed;
  const Dataset data = IngestFile(a.data, FeatureSchema::Load(a.schema));
  const DatasetSplit split = TimelineSplit(data.records);
  InstanceOptions options;
  options.mode = config.graph_mode;
  options.max_neighbors = config.max_neighbors;
  options.include_negative_neighbors = config.include_negative_neighbors;
  const InstanceSet instances = BuildInstances(data, split, options);

  const std::filesystem::path dir(a.out);
  {
    auto out = OpenOut(dir / "config.resolved");
    config.Write(out);
  }
  auto metrics = OpenOut(dir / "metrics.tsv");
  const TrainResult result =
      Train(config, data.schema, instances, [&](const EpochMetrics& m) {
        WriteMetricsLog(metrics, {m});
        metrics.flush();
        if (!a.quiet) {
          std::cerr << "epoch " << m.epoch << " loss " << Fmt(m.train_loss)
                    << " val_auc "
                    << (m.val_auc ? Fmt(*m.val_auc) : std::string("n/a"))
                    << " lr " << m.learning_rate << '\n';
        }
      });
  SaveCheckpoint((dir / "checkpoint.txt").string(), result.schema,
                 result.model);
  std::cout << "train\t" << instances.train.size() << "\tval\t"
            << instances.val.size() << "\ttest\t" << instances.test.size()
            << "\nbest_epoch\t" << result.best_epoch << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string config;
  std::string schema;
  std::string split = "test";
};

int RunEval(const EvalArgs& a) {
  const Checkpoint ck = LoadCheckpoint(a.checkpoint);
  if (!a.schema.empty()) {
    FeatureSchema declared = FeatureSchema::Load(a.schema);
    Dataset fresh = IngestFile(a.data, declared);
    fresh.schema.user_width = ck.schema.user_width;
    fresh.schema.item_width = ck.schema.item_width;
    if (fresh.schema.Hash() != ck.schema.Hash()) {
      throw SchemaError("schema hash mismatch between checkpoint and data");
    }
  }
  TrainConfig config;
  if (!a.config.empty()) config = TrainConfig::Load(a.config);
  const Dataset data = IngestFile(a.data, ck.schema);
  const DatasetSplit split = TimelineSplit(data.records);
  InstanceOptions options;
  options.mode = config.graph_mode;
  options.max_neighbors = ck.model.config().max_neighbors;
  options.include_negative_neighbors = config.include_negative_neighbors;
  const InstanceSet instances = BuildInstances(data, split, options);

  ScoredSet scored;
  const std::vector<EncodedInstance>* chosen = nullptr;
  if (a.split == "test") {
    chosen = &instances.test;
    scored.item_degrees = instances.test_item_degrees;
  } else {
    chosen = &instances.val;
    scored.item_degrees = instances.val_item_degrees;
  }
  scored.scores = Predict(ck.model, *chosen);
  scored.labels = Labels(*chosen);

  std::cout << "split\t" << a.split << "\ninstances\t" << chosen->size()
            << '\n';
  std::string overall;
  try {
    overall = Fmt(Auc(scored));
  } catch (const UndefinedAucError& e) {
    overall = std::string("not applicable (") + e.what() + ")";
  }
  std::cout << "auc\t" << overall << '\n';
  for (std::size_t k : kLongtailThresholds) {
    const auto v = LongtailAuc(scored, k);
    std::cout << "auc_longtail_k" << k << '\t'
              << (v ? Fmt(*v)
                    : std::string("not applicable (slice lacks a class)"))
              << '\n';
  }
  return 0;
}

struct GradcheckArgs {
  std::string config;
  std::size_t seeds = 20;
};

int RunGradcheck(const GradcheckArgs& a) {
  TrainConfig config;
  if (!a.config.empty()) config = TrainConfig::Load(a.config);
  ModelConfig model_config = config.ToModelConfig();
  model_config.max_neighbors = 4;
  const GradCheckSuiteResult suite = RunGradCheckSuite(model_config, a.seeds);
  std::map<std::string, std::pair<double, std::size_t>> groups;
  std::vector<std::string> order;
  std::size_t checked = 0, skipped = 0;
  for (const auto& report : suite.reports) {
    checked += report.checked;
    skipped += report.skipped;
    for (const auto& p : report.params) {
      auto [it, fresh] = groups.try_emplace(p.name, 0.0, 0);
      if (fresh) order.push_back(p.name);
      it->second.first = std::max(it->second.first, p.max_rel_error);
      it->second.second += p.checked;
    }
  }
  std::cout << "param\tmax_rel_error\tprobes\n";
  for (const auto& name : order) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", groups[name].first);
    std::cout << name << '\t' << buf << '\t' << groups[name].second << '\n';
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", suite.max_rel_error);
  std::cout << "seeds\t" << suite.reports.size() << "\nchecked\t" << checked
            << "\nskipped\t" << skipped << "\nmax_rel_error\t" << buf
            << "\nresult\t" << (suite.passed ? "pass" : "fail") << '\n';
  return suite.passed ? 0 : kExitNumeric;
}

struct AblateArgs {
  std::string matrix;
  std::string data;
  std::string schema;
  std::string out;
};

int RunAblate(const AblateArgs& a) {
  const AblationMatrix matrix = AblationMatrix::Load(a.matrix);
  if (matrix.entries.empty()) {
    throw UsageError("matrix " + a.matrix + " defines no configs");
  }
  const Dataset data = IngestFile(a.data, FeatureSchema::Load(a.schema));
  const auto results = RunAblation(matrix, data, [](const AblationResult& r) {
    std::cerr << r.name << " seed " << r.seed << ": "
              << (r.ok() ? (r.test_auc ? Fmt(*r.test_auc) : "n/a")
                         : "failed: " + r.error)
              << '\n';
  });
  auto out = OpenOut(a.out);
  WriteAblationTable(out, results);
  WriteAblationTable(std::cout, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Graph-attention CTR model: data synthesis, training, "
      "evaluation, gradient checks and ablations."};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", synth.spec, "Synthetic spec file")
      ->required()
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Override the spec seed");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train.config, "Training config file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train.data, "Interactions file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--schema", train.schema, "Feature schema file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_flag("--quiet", train.quiet, "No per-epoch progress");

  EvalArgs eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Score a split with a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval.data, "Interactions file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd
      ->add_option("--config", eval.config, "Training config (graph settings)")
      ->check(CLI::ExistingFile);
  eval_cmd
      ->add_option("--schema", eval.schema,
                   "Schema file to verify against the checkpoint")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", eval.split, "Split to score")
      ->check(CLI::IsMember({"test", "val"}));

  GradcheckArgs grad;
  auto* grad_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference check of the config's model variant");
  grad_cmd->add_option("--config", grad.config, "Training config file")
      ->check(CLI::ExistingFile);
  grad_cmd->add_option("--seeds", grad.seeds, "Number of seeds")
      ->check(CLI::PositiveNumber);

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run an ablation matrix");
  ablate_cmd->add_option("--matrix", ablate.matrix, "Matrix file")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--data", ablate.data, "Interactions file")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--schema", ablate.schema, "Feature schema file")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out", ablate.out, "Results table path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*train_cmd) return RunTrain(train);
    if (*eval_cmd) return RunEval(eval);
    if (*grad_cmd) return RunGradcheck(grad);
    if (*ablate_cmd) return RunAblate(ablate);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
