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

#include "salcard/fixtures.h"

#include "salcard/random.h"

namespace salcard {

Model Lin3() {
  Layer dense = DenseLayer(3, 2);
  dense.weights = Tensor({2, 3}, {1.0, -2.0, 3.0, 0.0, 0.0, 0.0});
  return Model({3}, 2, {dense});
}

Model CnnArch(int side, int classes) {
  return Model({side, side}, classes,
               {Conv2dLayer(1, 32, 3), ReluLayer(), Conv2dLayer(32, 8, 3),
                ReluLayer(), FlattenLayer(),
                DenseLayer(8 * side * side, classes)});
}

Model MlpArch(int side, int hidden, int classes) {
  return Model({side, side}, classes,
               {FlattenLayer(), DenseLayer(side * side, hidden), ReluLayer(),
                DenseLayer(hidden, classes)});
}

Model RandomReluNet(uint64_t seed, int inputs, const std::vector<int>& hidden,
                    int classes) {
  std::vector<Layer> layers;
  int width = inputs;
  for (int h : hidden) {
    layers.push_back(DenseLayer(width, h));
    layers.push_back(ReluLayer());
    width = h;
  }
  layers.push_back(DenseLayer(width, classes));
  Model model = InitializeParameters(Model({inputs}, classes, layers), seed);
  Rng rng(DeriveSeed(seed, 0xb1a5));
  for (int i : model.ParameterizedLayers()) {
    for (double& b : model.mutable_bias(i).mutable_values()) {
      b = rng.Normal(0.0, 0.1);
    }
  }
  return model;
}

SynthConfig FixtureDataConfig(uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  return cfg;
}

TrainConfig FixtureTrainConfig(uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  cfg.seed = seed;
  return cfg;
}

SynthFixture MakeSynthFixture(const Model& arch, uint64_t init_seed) {
  const SynthConfig data_cfg = FixtureDataConfig();
  const TrainConfig train_cfg = FixtureTrainConfig();
  Dataset train = SynthGroundTruth(data_cfg);
  SynthConfig test_cfg = data_cfg;
  test_cfg.count = 200;
  test_cfg.seed = DeriveSeed(data_cfg.seed, 1);
  Dataset test = SynthGroundTruth(test_cfg);
  Model model =
      Train(InitializeParameters(arch, init_seed), train, train_cfg).model;
  const double accuracy = Accuracy(model, test);
  return {data_cfg,         train_cfg,        std::move(train),
          std::move(test),  std::move(model), accuracy};
}

}  // namespace salcard
