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

#include "pigat/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "pigat/config.h"

namespace pigat {
namespace {

std::size_t ToSize(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || i < 0) {
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(i);
}

double ToDouble(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
  return d;
}

// Fills `row` with i.i.d. normals of standard deviation `scale`.
void FillNormal(std::span<double> row, double scale, Rng& rng) {
  for (double& x : row) x = scale * StandardNormal(rng);
}

}  // namespace

void SyntheticSpec::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok)
      throw DomainError(std::string("degenerate synthetic spec: ") + what);
  };
  require(users >= 1, "users must be >= 1");
  require(items >= 2, "items must be >= 2");
  require(events >= 1, "events must be >= 1");
  require(dim >= 1, "dim must be >= 1");
  require(drift >= 0.0 && drift <= 1.0, "drift must lie in [0, 1]");
  require(popularity_exponent >= 0.0, "popularity_exponent must be >= 0");
  require(categories >= 1 && categories <= items,
          "categories must lie in [1, items]");
  require(category_spread >= 0.0, "category_spread must be >= 0");
  require(interests >= 1, "interests must be >= 1");
  require(candidates >= 1, "candidates must be >= 1");
  require(std::isfinite(choice_sharpness) && std::isfinite(label_scale) &&
              std::isfinite(label_bias),
          "rates must be finite");
  require(!mirror_users || users % 2 == 0,
          "mirror_users needs an even number of users");
}

SyntheticSpec SyntheticSpec::Parse(std::istream& in) {
  SyntheticSpec s;
  for (const auto& [key, v] : ReadKeyValues(in)) {
    if (key == "users") {
      s.users = ToSize(key, v);
    } else if (key == "items") {
      s.items = ToSize(key, v);
    } else if (key == "events") {
      s.events = ToSize(key, v);
    } else if (key == "dim") {
      s.dim = ToSize(key, v);
    } else if (key == "drift") {
      s.drift = ToDouble(key, v);
    } else if (key == "popularity_exponent") {
      s.popularity_exponent = ToDouble(key, v);
    } else if (key == "categories") {
      s.categories = ToSize(key, v);
    } else if (key == "category_spread") {
      s.category_spread = ToDouble(key, v);
    } else if (key == "interests") {
      s.interests = ToSize(key, v);
    } else if (key == "candidates") {
      s.candidates = ToSize(key, v);
    } else if (key == "choice_sharpness") {
      s.choice_sharpness = ToDouble(key, v);
    } else if (key == "label_scale") {
      s.label_scale = ToDouble(key, v);
    } else if (key == "label_bias") {
      s.label_bias = ToDouble(key, v);
    } else if (key == "mirror_users") {
      if (v != "true" && v != "false") {
        throw ConfigError("mirror_users: expected true or false");
      }
      s.mirror_users = v == "true";
    } else if (key == "drift_mode") {
      if (v == "diffuse") {
        s.drift_mode = DriftMode::kDiffuse;
      } else if (v == "jump") {
        s.drift_mode = DriftMode::kJump;
      } else {
        throw ConfigError("drift_mode: expected diffuse or jump");
      }
    } else if (key == "anchored_interests") {
      if (v != "true" && v != "false") {
        throw ConfigError("anchored_interests: expected true or false");
      }
      s.anchored_interests = v == "true";
    } else if (key == "seed") {
      s.seed = ToSize(key, v);
    } else {
      throw ConfigError("unknown synthetic spec key '" + key + "'");
    }
  }
  s.Validate();
  return s;
}

SyntheticSpec SyntheticSpec::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic spec " + path);
  return Parse(in);
}

void SyntheticSpec::Write(std::ostream& out) const {
  out << "users = " << users << "\nitems = " << items << "\nevents = " << events
      << "\ndim = " << dim << "\ndrift = " << drift
      << "\npopularity_exponent = " << popularity_exponent
      << "\ncategories = " << categories
      << "\ncategory_spread = " << category_spread
      << "\ninterests = " << interests << "\ncandidates = " << candidates
      << "\nchoice_sharpness = " << choice_sharpness
      << "\nlabel_scale = " << label_scale << "\nlabel_bias = " << label_bias
      << "\ndrift_mode = "
      << (drift_mode == DriftMode::kJump ? "jump" : "diffuse")
      << "\nanchored_interests = " << (anchored_interests ? "true" : "false")
      << "\nmirror_users = " << (mirror_users ? "true" : "false")
      << "\nseed = " << seed << '\n';
}

SyntheticData GenerateSynthetic(const SyntheticSpec& spec, Rng& rng) {
  spec.Validate();
  SyntheticData out;
  out.spec = spec;
  const std::size_t d = spec.dim;
  // Latent coordinates have variance 1/sqrt(d) so inner products have
  // roughly unit variance regardless of d.
  const double scale = std::pow(static_cast<double>(d), -0.25);

  Matrix centers(spec.categories, d);
  for (std::size_t c = 0; c < spec.categories; ++c) {
    FillNormal(centers.row(c), scale, rng);
  }
  out.item_latent = Matrix(spec.items, d);
  out.item_category.resize(spec.items);
  for (std::size_t j = 0; j < spec.items; ++j) {
    const auto c =
        static_cast<std::uint32_t>(UniformIndex(rng, spec.categories));
    out.item_category[j] = c;
    auto row = out.item_latent.row(j);
    FillNormal(row, scale * spec.category_spread, rng);
    Axpy(1.0, centers.row(c), row);
  }

  auto fresh_interest = [&](std::span<double> row) {
    if (spec.anchored_interests) {
      FillNormal(row, scale * spec.category_spread, rng);
      Axpy(1.0, centers.row(UniformIndex(rng, spec.categories)), row);
    } else {
      FillNormal(row, scale, rng);
    }
  };
  const std::size_t m = spec.interests;
  Matrix users(spec.users * m, d);
  for (std::size_t u = 0; u < spec.users; ++u) {
    for (std::size_t k = 0; k < m; ++k) {
      auto row = users.row(u * m + k);
      if (spec.mirror_users && u % 2 == 1) {
        const auto twin = users.row((u - 1) * m + k);
        for (std::size_t x = 0; x < d; ++x) row[x] = -twin[x];
      } else {
        fresh_interest(row);
      }
    }
  }
  out.user_initial = users;
  out.user_taste.resize(spec.users);
  for (std::size_t u = 0; u < spec.users; ++u) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < spec.categories; ++c) {
      const double s = Dot(users.row(u * m), centers.row(c));
      if (s > best) {
        best = s;
        out.user_taste[u] = static_cast<std::uint32_t>(c);
      }
    }
  }

  // Popularity ranks are a random permutation so item ids carry no signal.
  std::vector<std::size_t> rank(spec.items);
  std::iota(rank.begin(), rank.end(), 0);
  Shuffle(rank, rng);
  std::vector<double> cumulative(spec.items);
  double total = 0.0;
  for (std::size_t j = 0; j < spec.items; ++j) {
    total +=
        std::pow(static_cast<double>(rank[j] + 1), -spec.popularity_exponent);
    cumulative[j] = total;
  }
  auto draw_item = [&]() {
    const double r = UniformReal(rng, 0.0, total);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cumulative.begin(), spec.items - 1));
  };
  auto affinity = [&](std::size_t u, std::size_t j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      best = std::max(best, Dot(users.row(u * m + k), out.item_latent.row(j)));
    }
    return best;
  };

  const double keep = std::sqrt(1.0 - spec.drift * spec.drift);
  std::vector<std::size_t> cand(spec.candidates);
  std::vector<double> logits(spec.candidates);
  Vector noise(d);
  out.events.reserve(spec.events);
  for (std::size_t e = 0; e < spec.events; ++e) {
    const std::size_t u = UniformIndex(rng, spec.users);
    for (std::size_t c = 0; c < spec.candidates; ++c) {
      cand[c] = draw_item();
      logits[c] = spec.choice_sharpness * affinity(u, cand[c]);
    }
    std::size_t chosen = cand[0];
    if (spec.candidates > 1) {
      const Vector p = Softmax(logits);
      double r = UniformReal(rng, 0.0, 1.0);
      chosen = cand.back();
      for (std::size_t c = 0; c < spec.candidates; ++c) {
        r -= p[c];
        if (r < 0.0) {
          chosen = cand[c];
          break;
        }
      }
    }
    const double a = affinity(u, chosen);
    const double p_pos = Sigmoid(spec.label_scale * a + spec.label_bias);
    SyntheticEvent ev;
    ev.timestamp = static_cast<Timestamp>(e);
    ev.user = static_cast<std::uint32_t>(u);
    ev.item = static_cast<std::uint32_t>(chosen);
    ev.label = UniformReal(rng, 0.0, 1.0) < p_pos ? 1 : 0;
    ev.affinity = a;
    out.events.push_back(ev);

    if (spec.drift > 0.0 && spec.drift_mode == DriftMode::kJump) {
      if (UniformReal(rng, 0.0, 1.0) < spec.drift) {
        fresh_interest(users.row(u * m + UniformIndex(rng, m)));
      }
    } else if (spec.drift > 0.0) {
      for (std::size_t k = 0; k < m; ++k) {
        FillNormal(noise, scale, rng);
        auto row = users.row(u * m + k);
        for (std::size_t x = 0; x < d; ++x) {
          row[x] = keep * row[x] + spec.drift * noise[x];
        }
      }
    }
  }
  out.user_final = std::move(users);
  return out;
}

FeatureSchema SyntheticData::Schema() const {
  FeatureSchema s;
  s.user_fields.push_back({"uid", spec.users, {}});
  s.user_fields.push_back({"taste", spec.categories, {}});
  s.item_fields.push_back({"iid", spec.items, {}});
  s.item_fields.push_back({"cat", spec.categories, {}});
  s.signal = SignalKind::kBinary;
  return s;
}

void SyntheticData::WriteInteractions(std::ostream& out) const {
  for (const auto& e : events) {
    out << e.timestamp << "\tuid=u" << e.user << ";taste=c"
        << user_taste[e.user] << "\tiid=i" << e.item << ";cat=c"
        << item_category[e.item] << '\t' << e.label << '\n';
  }
}

void SyntheticData::WriteLatents(std::ostream& out) const {
  auto write_row = [&](const char* kind, std::size_t id,
                       std::span<const double> row) {
    out << kind << '\t' << id;
    char buf[32];
    for (double x : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << '\t' << buf;
    }
    out << '\n';
  };
  for (std::size_t j = 0; j < item_latent.rows(); ++j) {
    write_row("item", j, item_latent.row(j));
  }
  for (std::size_t r = 0; r < user_initial.rows(); ++r) {
    write_row("user_initial", r, user_initial.row(r));
  }
  for (std::size_t r = 0; r < user_final.rows(); ++r) {
    write_row("user_final", r, user_final.row(r));
  }
  for (const auto& e : events) {
    const double a = e.affinity;
    write_row("event_affinity", static_cast<std::size_t>(e.timestamp),
              std::span<const double>(&a, 1));
  }
}

std::vector<std::size_t> SyntheticData::ItemDegrees() const {
  std::vector<std::size_t> degrees(spec.items, 0);
  for (const auto& e : events) ++degrees[e.item];
  return degrees;
}

DegreeSummary SummarizeDegrees(const SyntheticData& data) {
  DegreeSummary s;
  const auto degrees = data.ItemDegrees();
  s.items = degrees.size();
  for (std::size_t deg : degrees) {
    if (deg > 0) ++s.touched_items;
    if (deg <= 3) ++s.at_most_3;
    s.max_degree = std::max(s.max_degree, deg);
  }
  s.longtail_fraction =
      static_cast<double>(s.at_most_3) / static_cast<double>(s.items);
  std::size_t positives = 0;
  for (const auto& e : data.events) positives += e.label;
  s.positive_rate = data.events.empty()
                        ? 0.0
                        : static_cast<double>(positives) /
                              static_cast<double>(data.events.size());
  return s;
}

}  // namespace pigat
