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

#ifndef SALCARD_FIXTURES_H_
#define SALCARD_FIXTURES_H_

#include <cstdint>
#include <vector>

#include "salcard/data.h"
#include "salcard/model.h"
#include "salcard/train.h"

namespace salcard {

// Dense 3 -> 2 with weight rows (1, -2, 3) and (0, 0, 0), zero bias.
Model Lin3();

// (side, side) -> conv(1->32, 3) -> relu -> conv(32->8, 3) -> relu ->
// flatten -> dense(8 * side * side -> classes). Parameters are zero.
Model CnnArch(int side = 16, int classes = 4);

// (side, side) -> flatten -> dense(side^2 -> hidden) -> relu ->
// dense(hidden -> classes). Parameters are zero.
Model MlpArch(int side = 16, int hidden = 32, int classes = 4);

// Dense/ReLU stack on a rank-1 input with freshly drawn parameters and
// small random biases.
Model RandomReluNet(uint64_t seed, int inputs, const std::vector<int>& hidden,
                    int classes);

// A pinned synthetic ground-truth task and a model trained on it.
struct SynthFixture {
  SynthConfig data_config;
  TrainConfig train_config;
  Dataset train;
  Dataset test;
  Model model;
  double test_accuracy = 0.0;
};

SynthConfig FixtureDataConfig(uint64_t seed = 11);
TrainConfig FixtureTrainConfig(uint64_t seed = 5);

// Trains `arch` from InitializeParameters(arch, init_seed) on 400 synthetic
// images and holds out a separate 200-image test set.
SynthFixture MakeSynthFixture(const Model& arch, uint64_t init_seed = 3);

}  // namespace salcard

#endif  // SALCARD_FIXTURES_H_
