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

#include "pigat/metrics.h"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace pigat {
namespace {

// O(n^2) pair count with half credit for ties.
double BruteForceAuc(const std::vector<double>& s, const std::vector<int>& y) {
  double credit = 0;
  double pairs = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (y[a] != 1) continue;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (y[b] != 0) continue;
      pairs += 1;
      if (s[a] > s[b]) {
        credit += 1;
      } else if (s[a] == s[b]) {
        credit += 0.5;
      }
    }
  }
  return credit / pairs;
}

std::optional<double> BruteForceLongtail(const ScoredSet& set, std::size_t k) {
  std::vector<double> s;
  std::vector<int> y;
  bool pos = false, neg = false;
  for (std::size_t j = 0; j < set.scores.size(); ++j) {
    if (set.item_degrees[j] > k) continue;
    s.push_back(set.scores[j]);
    y.push_back(set.labels[j]);
    pos |= set.labels[j] == 1;
    neg |= set.labels[j] == 0;
  }
  if (!pos || !neg) return std::nullopt;
  return BruteForceAuc(s, y);
}

TEST(AucTest, Examples) {
  EXPECT_EQ(Auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(
      Auc(std::vector<double>(6, 0.3), std::vector<int>{1, 0, 1, 0, 0, 1}),
      0.5);
  EXPECT_EQ(Auc(std::vector<double>{0.8, 0.5, 0.5, 0.2},
                std::vector<int>{1, 1, 0, 0}),
            0.875);
}

TEST(AucTest, MissingClassIsUndefined) {
  EXPECT_THROW(Auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
               UndefinedAucError);
  EXPECT_THROW(Auc(std::vector<double>{}, std::vector<int>{}),
               UndefinedAucError);
}

TEST(AucTest, RejectsBadInput) {
  EXPECT_THROW(Auc(std::vector<double>{0.1}, std::vector<int>{1, 0}),
               std::invalid_argument);
  ScoredSet bad{{NAN, 0.2}, {1, 0}, {0, 0}};
  EXPECT_THROW(Auc(bad), std::invalid_argument);
  ScoredSet label{{0.1, 0.2}, {2, 0}, {0, 0}};
  EXPECT_THROW(Auc(label), std::invalid_argument);
}

TEST(AucTest, EqualsBruteForceOnRandomSetsWithTies) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    // Coarse score grid forces many ties.
    const int levels = 1 + static_cast<int>(rng() % 20);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = static_cast<double>(rng() % levels) / levels;
      y[j] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(Auc(s, y), BruteForceAuc(s, y)) << "trial " << trial;
  }
}

TEST(AucTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<double> s(150);
  std::vector<int> y(150);
  for (std::size_t j = 0; j < s.size(); ++j) {
    s[j] = std::round(u(rng) * 4) / 4;
    y[j] = static_cast<int>(rng() % 2);
  }
  std::vector<double> t(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) t[j] = std::exp(2 * s[j]) + 7;
  EXPECT_EQ(Auc(s, y), Auc(t, y));
}

TEST(AucTest, FlippingLabelsComplements) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> s(90);
  std::vector<int> y(90), flipped(90);
  for (std::size_t j = 0; j < s.size(); ++j) {
    s[j] = std::round(u(rng) * 10) / 10;
    y[j] = static_cast<int>(rng() % 2);
    flipped[j] = 1 - y[j];
  }
  EXPECT_NEAR(Auc(s, flipped), 1.0 - Auc(s, y), 1e-15);
}

TEST(AucTest, RandomScoresNearHalf) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t j = 0; j < s.size(); ++j) {
    s[j] = u(rng);
    y[j] = static_cast<int>(rng() % 2);
  }
  EXPECT_NEAR(Auc(s, y), 0.5, 0.05);
}

TEST(LongtailTest, ZeroDegreesEqualsPlainAuc) {
  ScoredSet set{{0.9, 0.4, 0.4, 0.1}, {1, 0, 1, 0}, {0, 0, 0, 0}};
  EXPECT_EQ(LongtailAuc(set, 3), Auc(set));
}

TEST(LongtailTest, UnlimitedEqualsPlainAuc) {
  ScoredSet set{{0.2, 0.7, 0.4, 0.1, 0.9}, {1, 0, 1, 0, 1}, {0, 50, 3, 900, 4}};
  EXPECT_EQ(LongtailAuc(set, kNoDegreeLimit), Auc(set));
}

TEST(LongtailTest, FilterRemovingPositivesIsNotApplicable) {
  ScoredSet set{{0.9, 0.1, 0.3}, {1, 0, 0}, {10, 1, 2}};
  EXPECT_FALSE(LongtailAuc(set, 3).has_value());
}

TEST(LongtailTest, MatchesBruteForceFilter) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    ScoredSet set;
    const std::size_t n = 20 + rng() % 100;
    for (std::size_t j = 0; j < n; ++j) {
      set.scores.push_back(static_cast<double>(rng() % 7));
      set.labels.push_back(static_cast<int>(rng() % 2));
      set.item_degrees.push_back(rng() % 15);
    }
    for (std::size_t k : {0, 3, 5, 10}) {
      EXPECT_EQ(LongtailAuc(set, k), BruteForceLongtail(set, k));
    }
  }
}

TEST(LongtailTest, NeedsDegrees) {
  ScoredSet set{{0.9, 0.1}, {1, 0}, {}};
  EXPECT_THROW(LongtailAuc(set, 3), std::invalid_argument);
}

}  // namespace
}  // namespace pigat
