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

#include "pigat/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace pigat {
namespace {

// Loss plus the concatenated activation pattern of the whole batch.
double LossAndPattern(const PigatModel& model,
                      std::span<const EncodedInstance> batch,
                      std::vector<std::uint8_t>* pattern) {
  std::vector<double> probs;
  std::vector<int> labels;
  ForwardCache cache;
  pattern->clear();
  for (const auto& inst : batch) {
    probs.push_back(model.Forward(inst, Mode::kEval, nullptr, &cache));
    labels.push_back(inst.label);
    const auto p = ActivationPattern(cache);
    pattern->insert(pattern->end(), p.begin(), p.end());
  }
  return LogLoss(probs, labels);
}

std::vector<std::size_t> SampleCoordinates(const Param& p, std::size_t count,
                                           Rng& rng) {
  const std::size_t n = p.value.size();
  if (n <= count) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::size_t> nonzero;
  const auto grad = p.grad.values();
  for (std::size_t i = 0; i < n; ++i) {
    if (grad[i] != 0.0) nonzero.push_back(i);
  }
  std::vector<std::size_t> out;
  Shuffle(nonzero, rng);
  for (std::size_t i = 0; i < nonzero.size() && out.size() < count / 2; ++i) {
    out.push_back(nonzero[i]);
  }
  while (out.size() < count) {
    const std::size_t c = UniformIndex(rng, n);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double BatchLoss(const PigatModel& model,
                 std::span<const EncodedInstance> batch) {
  std::vector<std::uint8_t> unused;
  return LossAndPattern(model, batch, &unused);
}

void ComputeBatchGradients(PigatModel& model,
                           std::span<const EncodedInstance> batch) {
  model.ZeroGrad();
  const double scale = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  for (const auto& inst : batch) {
    model.Forward(inst, Mode::kEval, nullptr, &cache);
    model.Backward(inst, cache, LogLossGradLogit(cache, inst.label, scale));
  }
}

GradCheckReport CheckGradients(PigatModel& model,
                               std::span<const EncodedInstance> batch,
                               const GradCheckOptions& options,
                               const GradientFn& analytic) {
  analytic(model, batch);
  Rng rng(options.seed);
  std::vector<std::uint8_t> base_pattern, up_pattern, down_pattern;
  LossAndPattern(model, batch, &base_pattern);

  GradCheckReport report;
  for (Param* p : model.Parameters()) {
    if (!p->trainable || p->value.empty()) continue;
    ParamCheck check;
    check.name = p->name;
    auto values = p->value.values();
    const auto grads = p->grad.values();
    for (std::size_t i : SampleCoordinates(*p, options.coords_per_param, rng)) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = LossAndPattern(model, batch, &up_pattern);
      values[i] = saved - options.step;
      const double down = LossAndPattern(model, batch, &down_pattern);
      values[i] = saved;
      if (up_pattern != base_pattern || down_pattern != base_pattern) {
        ++check.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = grads[i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      check.max_rel_error = std::max(check.max_rel_error, rel);
      ++check.checked;
    }
    report.checked += check.checked;
    report.skipped += check.skipped;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.params.push_back(std::move(check));
  }
  const double probes = static_cast<double>(report.checked + report.skipped);
  report.passed =
      report.checked > 0 && report.max_rel_error < options.tolerance &&
      static_cast<double>(report.skipped) <= options.max_skip_fraction * probes;
  return report;
}

FeatureSchema MakeToySchema(std::size_t width) {
  FeatureSchema s;
  s.user_fields.push_back({"uid", 6, {}});
  s.user_fields.push_back({"ugroup", 3, {}});
  s.item_fields.push_back({"iid", 8, {}});
  s.item_fields.push_back({"icat", 4, {}});
  s.user_width = width;
  s.item_width = width;
  s.Validate();
  s.Freeze();
  return s;
}

std::vector<EncodedInstance> MakeToyBatch(const FeatureSchema& schema,
                                          std::size_t max_neighbors,
                                          std::size_t count, Rng& rng) {
  // Any in-range row except padding, OOV rows included.
  auto random_id = [&](Part side, std::size_t field) {
    const auto& f = schema.fields(side)[field];
    return schema.GlobalId(
        side, field,
        static_cast<std::uint32_t>(UniformIndex(rng, f.slots() + 1)));
  };
  const std::size_t n_u = schema.user_fields.size();
  const std::size_t n_i = schema.item_fields.size();
  std::vector<EncodedInstance> batch;
  for (std::size_t b = 0; b < count; ++b) {
    EncodedInstance inst;
    for (std::size_t f = 0; f < n_u; ++f) {
      inst.user_profile.push_back(random_id(Part::kUser, f));
    }
    for (std::size_t f = 0; f < n_i; ++f) {
      inst.item_profile.push_back(random_id(Part::kItem, f));
    }
    inst.user_len = (b * 3 + 1 + UniformIndex(rng, 2)) % (max_neighbors + 1);
    inst.item_len = (b * 2 + 2 + UniformIndex(rng, 2)) % (max_neighbors + 1);
    inst.user_neighbors.assign(max_neighbors * n_i,
                               schema.PaddingId(Part::kItem));
    inst.item_neighbors.assign(max_neighbors, schema.PaddingId(Part::kUser));
    inst.user_mask.assign(max_neighbors, 0);
    inst.item_mask.assign(max_neighbors, 0);
    for (std::size_t l = 0; l < inst.user_len; ++l) {
      for (std::size_t f = 0; f < n_i; ++f) {
        inst.user_neighbors[l * n_i + f] = random_id(Part::kItem, f);
      }
      inst.user_mask[l] = 1;
    }
    for (std::size_t l = 0; l < inst.item_len; ++l) {
      inst.item_neighbors[l] = random_id(Part::kUser, 0);
      inst.item_mask[l] = 1;
    }
    inst.label = static_cast<int>(b % 2);
    batch.push_back(std::move(inst));
  }
  return batch;
}

GradCheckSuiteResult RunGradCheckSuite(const ModelConfig& config,
                                       std::size_t seeds,
                                       std::size_t batch_size,
                                       GradCheckOptions options,
                                       const GradientFn& analytic) {
  GradCheckSuiteResult result;
  result.passed = true;
  const FeatureSchema schema = MakeToySchema();
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(DeriveSeed(s, "gradcheck"));
    PigatModel model(schema, config, rng);
    // Zero-initialised biases put empty-sequence instances exactly on a
    // leaky-relu kink; move them to a generic point first.
    for (Param* p : model.Parameters()) {
      auto values = p->value.values();
      if (!p->trainable || std::any_of(values.begin(), values.end(),
                                       [](double v) { return v != 0.0; })) {
        continue;
      }
      for (double& v : values) v = UniformReal(rng, -0.1, 0.1);
    }
    const auto batch =
        MakeToyBatch(schema, config.max_neighbors, batch_size, rng);
    options.seed = DeriveSeed(s, "gradcheck-probes");
    GradCheckReport report = CheckGradients(model, batch, options, analytic);
    result.passed = result.passed && report.passed;
    result.max_rel_error = std::max(result.max_rel_error, report.max_rel_error);
    result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace pigat
