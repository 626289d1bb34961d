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

#include "pigat/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pigat/metrics.h"

namespace pigat {
namespace {

std::optional<double> TryAuc(const PigatModel& model,
                             std::span<const EncodedInstance> instances) {
  if (instances.empty()) return std::nullopt;
  const auto scores = Predict(model, instances);
  const auto labels = Labels(instances);
  try {
    return Auc(scores, labels);
  } catch (const UndefinedAucError&) {
    return std::nullopt;
  }
}

[[noreturn]] void Abort(PigatModel& model, int epoch, std::size_t batch,
                        double loss) {
  std::ostringstream msg;
  msg << "non-finite training loss " << loss << " at epoch " << epoch
      << ", batch " << batch << "; parameter norms:";
  for (const Param* p : model.Parameters()) {
    double sq = 0.0;
    for (double v : p->value.values()) sq += v * v;
    msg << ' ' << p->name << '=' << std::sqrt(sq);
  }
  throw TrainingAborted(msg.str());
}

}  // namespace

FeatureSchema ResolveSchema(const FeatureSchema& schema,
                            const TrainConfig& config) {
  FeatureSchema out = schema;
  out.user_width = config.embed_user;
  out.item_width = config.embed_item;
  out.Validate();
  out.Freeze();
  return out;
}

std::vector<double> Predict(const PigatModel& model,
                            std::span<const EncodedInstance> instances) {
  std::vector<double> out;
  out.reserve(instances.size());
  ForwardCache cache;
  for (const auto& inst : instances) {
    out.push_back(model.Forward(inst, Mode::kEval, nullptr, &cache));
  }
  return out;
}

std::vector<int> Labels(std::span<const EncodedInstance> instances) {
  std::vector<int> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(inst.label);
  return out;
}

TrainResult Train(const TrainConfig& config, const FeatureSchema& schema,
                  const InstanceSet& instances, const EpochCallback& on_epoch) {
  config.Validate();
  if (instances.train.empty()) throw UsageError("no training instances");

  TrainResult result;
  result.schema = ResolveSchema(schema, config);
  Rng init_rng(DeriveSeed(config.seed, "init"));
  Rng shuffle_rng(DeriveSeed(config.seed, "shuffle"));
  Rng dropout_rng(DeriveSeed(config.seed, "dropout"));

  PigatModel model(result.schema, config.ToModelConfig(), init_rng);
  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  adam_options.beta1 = config.beta1;
  adam_options.beta2 = config.beta2;
  adam_options.epsilon = config.epsilon;
  adam_options.l2 = config.l2;
  AdamState adam(model.Parameters(), adam_options);

  const auto& train = instances.train;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  ForwardCache cache;
  std::optional<double> best_auc;
  bool have_best = false;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      model.ZeroGrad();
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const EncodedInstance& inst = train[order[b]];
        const double p =
            model.Forward(inst, Mode::kTrain, &dropout_rng, &cache);
        batch_loss -= inst.label == 1 ? std::log(p) : std::log(1.0 - p);
        model.Backward(inst, cache, LogLossGradLogit(cache, inst.label, scale));
      }
      if (!std::isfinite(batch_loss)) {
        Abort(model, epoch, batch_index, batch_loss);
      }
      loss_sum += batch_loss;
      model.ApplyOptimizerStep(adam);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(train.size());
    m.learning_rate = adam.options().learning_rate;
    m.val_auc = TryAuc(model, instances.val);
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);

    // The first epoch always seeds the best; afterwards only a strictly
    // better defined val AUC replaces it.
    const bool better =
        !have_best || (m.val_auc && (!best_auc || *m.val_auc > *best_auc));
    if (better) {
      have_best = true;
      best_auc = m.val_auc;
      result.model = model;
      result.best_epoch = epoch;
    }
    if (epoch % config.decay_every == 0) {
      adam.options().learning_rate *= config.decay_rate;
    }
  }
  return result;
}

void WriteMetricsLog(std::ostream& out, const std::vector<EpochMetrics>& log) {
  char buf[128];
  for (const auto& m : log) {
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\t%.17g\n", m.epoch,
                  m.train_loss, m.val_auc ? *m.val_auc : std::nan(""),
                  m.learning_rate);
    out << buf;
  }
}

}  // namespace pigat
