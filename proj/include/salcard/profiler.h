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

#ifndef SALCARD_PROFILER_H_
#define SALCARD_PROFILER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "salcard/eval_sensitivity.h"
#include "salcard/model.h"
#include "salcard/saliency.h"

namespace salcard {

// Maps whose pairwise L-infinity distance stays below this are identical.
inline constexpr double kDeterminismTolerance = 1e-9;

struct DeterminismReport {
  double max_deviation = 0.0;
  bool deterministic = true;
  bool declared_deterministic = true;
  // Observed classification disagrees with the descriptor.
  bool mismatch = false;
  std::vector<uint64_t> seeds;
};

// Runs the method once per seed on every input. Throws kPrecondition for
// fewer than two seeds.
DeterminismReport DeterminismProbe(const MethodRef& method, const Model& model,
                                   const std::vector<Tensor>& inputs,
                                   const std::vector<int>& targets,
                                   const std::vector<uint64_t>& seeds);

using SweepGrid = std::map<std::string, std::vector<ParamValue>>;

// Sweep values declared by the descriptor; conv_layer_index ranges over the
// model's other conv layers.
SweepGrid DefaultSweepGrid(const MethodDescriptor& descriptor,
                           const Model& model);

struct SweepReport {
  // Mean (1 - similarity) between the default map and each variant.
  std::map<std::string, double> per_param_dispersion;
  // Mean over parameters; 0 for an empty grid.
  double overall = 0.0;
};

// Throws kPrecondition for parameters the method does not declare.
SweepReport HyperparameterSweep(const MethodRef& method, const Model& model,
                                const std::vector<Tensor>& inputs,
                                const std::vector<int>& targets,
                                const SweepGrid& grid, uint64_t seed);

// floor(log10(seconds)).
int OrderOfMagnitude(double seconds);

struct EfficiencyReport {
  double median_seconds = 0.0;
  int order_of_magnitude = 0;
  int repetitions = 0;
};

// One warm-up call, then the median wall-clock time of `repetitions` calls.
// Throws kPrecondition for fewer than three repetitions.
EfficiencyReport EfficiencyProbe(const MethodRef& method, const Model& model,
                                 const Tensor& input, int target,
                                 int repetitions, uint64_t seed);

struct AgnosticismReport {
  AccessRequirement access = AccessRequirement::kGradients;
  std::string text;
  // Set when a black-box method was rerun against an outputs-only view and
  // reproduced the full-access map exactly.
  std::optional<bool> black_box_verified;
};

AgnosticismReport ReportAgnosticism(const MethodDescriptor& descriptor);
// Also runs the outputs-only check for black-box methods.
AgnosticismReport ReportAgnosticism(const MethodDescriptor& descriptor,
                                    const MethodRef& method,
                                    const Model& model, const Tensor& input,
                                    int target, uint64_t seed);

struct Profile {
  std::string method_id;
  DeterminismReport determinism;
  SweepReport hyperparameters;
  std::optional<EfficiencyReport> efficiency;  // absent with timing disabled
  AgnosticismReport agnosticism;
  std::string semantic_directness;
};

struct ProfileOptions {
  std::vector<uint64_t> seeds = {0, 1, 2};
  int probe_inputs = 4;
  int sweep_inputs = 4;
  bool timing = true;
  int repetitions = 5;
};

// Probes use the first inputs with their argmax class as target.
Profile ProfileMethod(const MethodRef& method, const Model& model,
                      const std::vector<Tensor>& inputs,
                      const ProfileOptions& options);

// [{metric_id: determinism|hyperparameter|efficiency|agnosticism, ...}].
nlohmann::ordered_json ProfileToJson(const Profile& profile);

}  // namespace salcard

#endif  // SALCARD_PROFILER_H_
