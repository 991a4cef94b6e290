/*
 * Copyright 2026 The salcard Authors.
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

#include "salcard/train.h"

#include <cmath>

#include "salcard/autodiff.h"
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard {

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorKind::kPrecondition, "epochs must be >= 1");
  if (batch_size < 1) {
    throw Error(ErrorKind::kPrecondition, "batch_size must be >= 1");
  }
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "learning_rate must be > 0");
  }
}

double Accuracy(const Model& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    if (ArgMax(Logits(model, data.inputs[i])) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

TrainResult RunSgd(const Model& arch, const Dataset& data,
                   const TrainConfig& cfg) {
  cfg.Validate();
  if (data.size() == 0) {
    throw Error(ErrorKind::kPrecondition, "training set is empty");
  }
  for (int label : data.labels) {
    if (label < 0 || label >= arch.class_count()) {
      throw Error(ErrorKind::kIndex, "label " + std::to_string(label) +
                                         " outside the model's classes");
    }
  }
  Model model = arch;
  const std::vector<int> params = model.ParameterizedLayers();
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.UniformInt(i)]);
    }
    epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Tensor> weight_acc, bias_acc;
      for (size_t k = start; k < end; ++k) {
        const size_t n = order[k];
        ForwardResult fwd = Forward(model, data.inputs[n]);
        Tensor probs = Softmax(fwd.logits);
        const double loss = -std::log(std::max(probs[data.labels[n]], 1e-300));
        if (!std::isfinite(loss)) {
          throw Error(ErrorKind::kTraining, "loss became non-finite in epoch " +
                                                std::to_string(epoch));
        }
        epoch_loss += loss;
        probs[data.labels[n]] -= 1.0;
        BackwardResult grads = BackwardAll(fwd.tape, probs, ReluRule::kStandard,
                                           /*parameter_grads=*/true);
        if (weight_acc.empty()) {
          weight_acc = std::move(grads.weight_grads);
          bias_acc = std::move(grads.bias_grads);
          continue;
        }
        for (int l : params) {
          std::span<double> w = weight_acc[l].mutable_values();
          std::span<const double> g = grads.weight_grads[l].values();
          for (size_t i = 0; i < w.size(); ++i) w[i] += g[i];
          std::span<double> b = bias_acc[l].mutable_values();
          std::span<const double> gb = grads.bias_grads[l].values();
          for (size_t i = 0; i < b.size(); ++i) b[i] += gb[i];
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      for (int l : params) {
        std::span<double> w = model.mutable_weights(l).mutable_values();
        std::span<const double> g = weight_acc[l].values();
        for (size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
        std::span<double> b = model.mutable_bias(l).mutable_values();
        std::span<const double> gb = bias_acc[l].values();
        for (size_t i = 0; i < b.size(); ++i) b[i] -= step * gb[i];
      }
      for (int l : params) {
        for (double v : model.layers()[l].weights.values()) {
          if (!std::isfinite(v)) {
            throw Error(ErrorKind::kTraining,
                        "weights diverged in epoch " + std::to_string(epoch));
          }
        }
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::kTraining, "loss diverged");
    }
  }
  TrainResult result{model, Accuracy(model, data), epoch_loss};
  return result;
}

}  // namespace

TrainResult Train(const Model& arch, const Dataset& data,
                  const TrainConfig& cfg) {
  try {
    return RunSgd(arch, data, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumeric) throw;
    throw Error(ErrorKind::kTraining, std::string("diverged: ") + e.what());
  }
}

}  // namespace salcard
