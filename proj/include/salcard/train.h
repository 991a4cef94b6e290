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

#ifndef SALCARD_TRAIN_H_
#define SALCARD_TRAIN_H_

#include <cstdint>

#include "salcard/data.h"
#include "salcard/model.h"

namespace salcard {

// Minibatch SGD on softmax cross-entropy. Fixed optimizer, no schedule.
struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 0.05;
  uint64_t seed = 0;

  void Validate() const;
};

struct TrainResult {
  Model model;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
};

// Starts from the parameters already in `arch`. Deterministic in
// (arch, data order, cfg).
TrainResult Train(const Model& arch, const Dataset& data,
                  const TrainConfig& cfg);

double Accuracy(const Model& model, const Dataset& data);

}  // namespace salcard

#endif  // SALCARD_TRAIN_H_
