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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pigat/config.h"

namespace pigat {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun Cli(const std::string& args) {
  const std::string cmd =
      std::string(PIGAT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  CliRun r;
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// key<TAB>value lines of a report.
std::map<std::string, std::string> Report(const std::string& out) {
  std::map<std::string, std::string> m;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) m[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return m;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::path(::testing::TempDir()) / "pigat_cli_test");
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
    Spit(*dir_ / "spec.txt",
         "users = 30\nitems = 80\nevents = 600\ndim = 4\ncategories = 6\n"
         "popularity_exponent = 1.1\n");
    Spit(*dir_ / "train.cfg",
         "embed_user = 6\nembed_item = 6\nintegrate_width = 8\nepochs = 2\n"
         "batch_size = 32\n");
    ASSERT_EQ(
        Cli("synth --spec " + Path("spec.txt") + " --out " + Path("data")).code,
        0);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static std::string Path(const std::string& name) {
    return (*dir_ / name).string();
  }
  static std::string DataArgs() {
    return " --data " + Path("data/interactions.tsv") + " --schema " +
           Path("data/schema.txt");
  }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, HelpListsEveryFlag) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"synth", {"--spec", "--out", "--seed"}},
      {"train",
       {"--config", "--data", "--schema", "--out", "--seed", "--quiet"}},
      {"eval", {"--checkpoint", "--data", "--config", "--schema", "--split"}},
      {"gradcheck", {"--config", "--seeds"}},
      {"ablate", {"--matrix", "--data", "--schema", "--out"}},
  };
  for (const auto& [verb, names] : flags) {
    const CliRun r = Cli(verb + " --help");
    EXPECT_EQ(r.code, 0) << verb;
    for (const auto& f : names) {
      EXPECT_NE(r.out.find(f), std::string::npos) << verb << " " << f;
    }
  }
  EXPECT_EQ(Cli("--help").code, 0);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli("").code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
  EXPECT_EQ(Cli("synth --spec " + Path("spec.txt") + " --out " + Path("x") +
                " --colour blue")
                .code,
            1);
  EXPECT_EQ(Cli("synth --spec /nonexistent/spec.txt --out " + Path("x")).code,
            1);
  EXPECT_EQ(Cli("train --config " + Path("train.cfg")).code, 1);
}

TEST_F(CliTest, SynthIsDeterministicAndCountsLongTail) {
  const CliRun again =
      Cli("synth --spec " + Path("spec.txt") + " --out " + Path("data2"));
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(Slurp(Path("data/interactions.tsv")),
            Slurp(Path("data2/interactions.tsv")));
  EXPECT_EQ(Slurp(Path("data/latents.tsv")), Slurp(Path("data2/latents.tsv")));

  // Recount item degrees from the written interactions file.
  std::map<std::string, std::size_t> degree;
  std::istringstream in(Slurp(Path("data/interactions.tsv")));
  for (std::string line; std::getline(in, line);) {
    std::istringstream cols(line);
    std::string ts, user, item;
    std::getline(cols, ts, '\t');
    std::getline(cols, user, '\t');
    std::getline(cols, item, '\t');
    const std::string id = item.substr(0, item.find(';'));
    ++degree[id];
  }
  const auto report = Report(again.out);
  std::size_t at_most_3 = 80 - degree.size();
  for (const auto& [id, d] : degree) at_most_3 += d <= 3;
  EXPECT_EQ(report.at("items_degree_le_3"), std::to_string(at_most_3));
  EXPECT_EQ(report.at("items_touched"), std::to_string(degree.size()));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", at_most_3 / 80.0);
  EXPECT_EQ(report.at("longtail_fraction"), buf);

  const CliRun other = Cli("synth --spec " + Path("spec.txt") +
                           " --seed 7 --out " + Path("data3"));
  ASSERT_EQ(other.code, 0);
  EXPECT_NE(Slurp(Path("data/interactions.tsv")),
            Slurp(Path("data3/interactions.tsv")));
}

TEST_F(CliTest, TrainEvalRoundTrip) {
  const std::string train =
      "train --quiet --config " + Path("train.cfg") + DataArgs() + " --out ";
  const CliRun a = Cli(train + Path("run_a"));
  ASSERT_EQ(a.code, 0);
  const CliRun b = Cli(train + Path("run_b"));
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(Slurp(Path("run_a/metrics.tsv")), Slurp(Path("run_b/metrics.tsv")));
  EXPECT_EQ(Slurp(Path("run_a/checkpoint.txt")),
            Slurp(Path("run_b/checkpoint.txt")));
  EXPECT_EQ(Report(a.out).count("best_epoch"), 1u);

  // Resolved config materializes every key and parses back.
  std::ifstream resolved(Path("run_a/config.resolved"));
  std::set<std::string> keys;
  for (const auto& [k, v] : ReadKeyValues(resolved)) keys.insert(k);
  EXPECT_EQ(keys, std::set<std::string>(TrainConfig::Keys().begin(),
                                        TrainConfig::Keys().end()));
  EXPECT_NO_THROW(TrainConfig::Load(Path("run_a/config.resolved")));

  const CliRun eval =
      Cli("eval --checkpoint " + Path("run_a/checkpoint.txt") + DataArgs());
  ASSERT_EQ(eval.code, 0);
  const auto report = Report(eval.out);
  EXPECT_EQ(report.at("split"), "test");
  const double auc = std::stod(report.at("auc"));
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  for (const char* k :
       {"auc_longtail_k3", "auc_longtail_k5", "auc_longtail_k10"}) {
    ASSERT_EQ(report.count(k), 1u) << k;
    const std::string v = report.at(k);
    EXPECT_TRUE(v.rfind("not applicable", 0) == 0 ||
                (std::stod(v) >= 0 && std::stod(v) <= 1))
        << v;
  }
  EXPECT_EQ(Cli("eval --split val --checkpoint " +
                Path("run_a/checkpoint.txt") + DataArgs())
                .code,
            0);
}

TEST_F(CliTest, EvalRejectsMismatchedSchema) {
  ASSERT_EQ(Cli("train --quiet --config " + Path("train.cfg") + DataArgs() +
                " --out " + Path("run_m"))
                .code,
            0);
  // A different category cardinality changes the schema hash.
  std::string schema = Slurp(Path("data/schema.txt"));
  const std::size_t at = schema.find("item cat 6");
  ASSERT_NE(at, std::string::npos);
  schema.replace(at, 10, "item cat 7");
  Spit(Path("other_schema.txt"), schema);
  const CliRun r = Cli("eval --checkpoint " + Path("run_m/checkpoint.txt") +
                       " --data " + Path("data/interactions.tsv") +
                       " --schema " + Path("other_schema.txt"));
  EXPECT_EQ(r.code, 2);
  // Missing input files are usage errors.
  EXPECT_EQ(Cli("eval --checkpoint /nonexistent/ck.txt" + DataArgs()).code, 1);
}

TEST_F(CliTest, EvalReportsUndefinedAuc) {
  // Every label positive: overall AUC and all slices are not applicable.
  std::string data = Slurp(Path("data/interactions.tsv"));
  std::istringstream in(data);
  std::string positives;
  for (std::string line; std::getline(in, line);) {
    positives += line.substr(0, line.rfind('\t')) + "\t1\n";
  }
  Spit(Path("all_positive.tsv"), positives);
  ASSERT_EQ(Cli("train --quiet --config " + Path("train.cfg") + DataArgs() +
                " --out " + Path("run_p"))
                .code,
            0);
  const CliRun r = Cli("eval --checkpoint " + Path("run_p/checkpoint.txt") +
                       " --data " + Path("all_positive.tsv"));
  ASSERT_EQ(r.code, 0);
  const auto report = Report(r.out);
  EXPECT_EQ(report.at("auc").rfind("not applicable", 0), 0u);
  EXPECT_EQ(report.at("auc_longtail_k3").rfind("not applicable", 0), 0u);
}

TEST_F(CliTest, GradcheckDefaultAndVariantsPass) {
  const CliRun r = Cli("gradcheck --seeds 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Report(r.out).at("result"), "pass");
  for (const char* v : {"none", "pe", "fce", "rce", "ce"}) {
    Spit(Path("gc.cfg"), std::string("confidence = ") + v + "\n");
    EXPECT_EQ(Cli("gradcheck --seeds 2 --config " + Path("gc.cfg")).code, 0)
        << v;
  }
}

TEST_F(CliTest, AblateTwoConfigs) {
  Spit(Path("matrix.txt"),
       "embed_user = 6\nembed_item = 6\nintegrate_width = 8\nepochs = 1\n"
       "batch_size = 32\nseeds = 1,2,3\n[full]\n[plain]\nconfidence = none\n");
  const CliRun r = Cli("ablate --matrix " + Path("matrix.txt") + DataArgs() +
                       " --out " + Path("ablate/results.tsv"));
  ASSERT_EQ(r.code, 0);
  const std::string table = Slurp(Path("ablate/results.tsv"));
  EXPECT_EQ(table, r.out);
  std::size_t rows = 0, summaries = 0;
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const bool summary = line.find("\tmean\t") != std::string::npos ||
                         line.find("\tstd\t") != std::string::npos;
    summaries += summary;
    rows += !summary;
  }
  EXPECT_EQ(rows, 2u * 3u);
  EXPECT_EQ(summaries, 4u);

  Spit(Path("empty.txt"), "epochs = 1\n");
  EXPECT_EQ(Cli("ablate --matrix " + Path("empty.txt") + DataArgs() +
                " --out " + Path("ablate/empty.tsv"))
                .code,
            1);
}

TEST_F(CliTest, DivergentTrainingExitsWithNumericFailure) {
  Spit(Path("wild.cfg"),
       "embed_user = 6\nembed_item = 6\nintegrate_width = 8\nepochs = 3\n"
       "learning_rate = 1e300\n");
  EXPECT_EQ(Cli("train --quiet --config " + Path("wild.cfg") + DataArgs() +
                " --out " + Path("run_w"))
                .code,
            3);
}

}  // namespace
}  // namespace pigat
