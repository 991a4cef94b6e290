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

#ifndef SALCARD_BATTERY_H_
#define SALCARD_BATTERY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "salcard/data.h"
#include "salcard/eval_sensitivity.h"
#include "salcard/evaluation.h"
#include "salcard/model.h"
#include "salcard/profiler.h"
#include "salcard/train.h"

namespace salcard {

// Every knob of the evaluation battery. Keys in the JSON form mirror the
// field names.
struct BatteryConfig {
  std::string preset = "standard";
  std::vector<std::string> metrics;
  std::map<std::string, ThresholdSpec> thresholds;
  // Per-method parameter overrides, keyed by method id.
  std::map<std::string, std::map<std::string, ParamValue>> method_params;
  SimilarityMetric similarity = SimilarityMetric::kSpearman;

  int probe_count = 20;
  std::vector<uint64_t> randomization_seeds = {1, 2, 3};
  double deletion_step = 0.05;
  int deletion_images = 20;
  double sensitivity_radius = 0.05;
  int sensitivity_samples = 10;
  int sensitivity_images = 5;
  double infidelity_noise = 0.1;
  int infidelity_samples = 500;
  int infidelity_images = 10;
  std::vector<double> roar_fractions = {0.0, 0.1, 0.3};
  int roar_images = 200;
  TrainConfig train;
  TrainConfig memorize;
  int memorize_images = 100;
  double minimality_threshold = 0.9;
  double minimality_quantile = 0.1;
  int minimality_images = 10;
  int localization_images = 50;
  double localization_min_accuracy = 0.95;
  ProfileOptions profile;
};

BatteryConfig DefaultBatteryConfig();
// Monte-Carlo budgets divided by ten, for continuous integration.
BatteryConfig QuickPreset(const BatteryConfig& base);

nlohmann::ordered_json BatteryConfigToJson(const BatteryConfig& config);
// Absent keys keep their defaults; unknown keys are format errors.
BatteryConfig BatteryConfigFromJson(const nlohmann::ordered_json& j);
BatteryConfig LoadBatteryConfigFile(const std::string& path);

// Method parameters from the config with the dataset mean as reference.
MethodRef ConfiguredMethod(const std::string& method_id,
                           const BatteryConfig& config,
                           const Dataset& data);

struct BatteryRun {
  std::vector<EvalResult> results;
  std::optional<Profile> profile;
  // Metrics that could not run here, with the reason.
  std::vector<std::string> skipped;
};

struct BatteryOptions {
  uint64_t seed = 0;
  int jobs = 1;
  bool timing = true;
  bool profile = true;
};

// Runs the configured metrics for one method against a model and dataset.
// Jobs may run concurrently; results come back in metric order and are
// identical for any job count.
BatteryRun RunBattery(const std::string& method_id, const Model& model,
                      const Dataset& data, const BatteryConfig& config,
                      const BatteryOptions& options);

}  // namespace salcard

#endif  // SALCARD_BATTERY_H_
