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

#ifndef SALCARD_EVAL_SENSITIVITY_H_
#define SALCARD_EVAL_SENSITIVITY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "salcard/data.h"
#include "salcard/evaluation.h"
#include "salcard/model.h"
#include "salcard/saliency.h"
#include "salcard/train.h"

namespace salcard {

// A saliency method with its configuration.
struct MethodRef {
  std::string id;
  Params params;

  SaliencyMap Run(const Model& model, const Tensor& input, int target,
                  uint64_t seed) const {
    return Explain(id, model, input, target, params, seed);
  }
};

struct DeletionInsertion {
  double deletion_auc = 0.0;
  double insertion_auc = 0.0;
  std::vector<double> fractions;
  std::vector<double> deletion_curve;
  std::vector<double> insertion_curve;
};

// Features are taken in RankByMagnitude order of `saliency`, step_fraction
// of them at a time. Deletion replaces them in `input`; insertion restores
// them into `replacement`. Curves hold prob_target; AUC is the trapezoid rule
// over the fraction of features changed.
DeletionInsertion DeletionInsertionCurves(const Model& model,
                                          const Tensor& input, int target,
                                          const Tensor& saliency,
                                          double step_fraction,
                                          const Tensor& replacement);

// |sum(map) - (logit_target(x) - logit_target(baseline))|.
double CompletenessGap(const Model& model, const Tensor& input, int target,
                       const Tensor& map, const Tensor& baseline);

// max over `samples` draws of ||map(x + d) - map(x)||_2 / ||map(x)||_2 with
// d uniform in [-radius, radius]^n. Every explanation uses `explain_seed`.
// When map(x) is zero the unnormalized change is reported.
double MaxSensitivity(const MethodRef& method, const Model& model,
                      const Tensor& input, int target, double radius,
                      int samples, uint64_t seed, uint64_t explain_seed);

struct InfidelityResult {
  double infidelity = 0.0;
  // infidelity / mean((f(x) - f(x - I))^2); 1 for the zero map.
  double normalized = 0.0;
};

// Monte-Carlo mean of (I . map - (f(x) - f(x - I)))^2 with I ~ N(0, s^2)
// per feature and f = logit_target.
InfidelityResult Infidelity(const Model& model, const Tensor& input,
                            int target, const Tensor& map, double noise_std,
                            int samples, uint64_t seed);

struct RoarResult {
  std::vector<double> fractions;
  std::vector<double> method_accuracy;
  std::vector<double> random_accuracy;
  double baseline_accuracy = 0.0;
};

// Trains `arch` from a fresh initialization on `train`, computes the
// method's map for every image (target = label), then for each fraction
// masks the top features of both splits and retrains from the same
// initialization. A random map gives the control curve. Fractions lie in
// [0, 1).
RoarResult RoarLite(const MethodRef& method, const Model& arch,
                    const Dataset& train, const Dataset& test,
                    const TrainConfig& cfg,
                    const std::vector<double>& fractions,
                    const Tensor& replacement, uint64_t seed);

// Copy of `model` whose first dense layer absorbs a shift of the input:
// f2(x + shift) == f(x). Throws kUnsupportedArchitecture unless every layer
// before the first dense layer is a flatten.
Model AbsorbInputShift(const Model& model, const Tensor& shift);

struct InvarianceResult {
  double similarity = 0.0;
  // max |f2(x + m) - f(x)| over probes and logits.
  double max_logit_error = 0.0;
};

InvarianceResult InputInvarianceCheck(const MethodRef& method,
                                      const Model& model,
                                      const std::vector<Tensor>& probes,
                                      const Tensor& shift, uint64_t seed,
                                      SimilarityMetric metric =
                                          SimilarityMetric::kSpearman);

struct DataRandomizationResult {
  double similarity = 0.0;
  double true_label_accuracy = 0.0;
  double random_label_accuracy = 0.0;
};

// Model A learns the true labels, model B a permutation of them (memorized
// with `memorize_cfg`); both start from the same initialization. Similarity
// is the mean over the first `probe_count` inputs, target = true label.
DataRandomizationResult DataRandomizationTest(
    const MethodRef& method, const Model& arch, const Dataset& data,
    const TrainConfig& cfg, const TrainConfig& memorize_cfg, int probe_count,
    uint64_t seed, SimilarityMetric metric = SimilarityMetric::kSpearman);

struct RandomizationDepth {
  // Parameterized layer indices randomized at this depth.
  std::vector<int> layers;
  double similarity = 0.0;
  int degenerate = 0;
};

struct ModelRandomizationResult {
  RandomizationMode mode = RandomizationMode::kCascading;
  // Cascading: depth 0 (original) to full, top layer first. Independent:
  // depth 0 followed by one entry per parameterized layer.
  std::vector<RandomizationDepth> depths;
  // Cascading: full-depth similarity. Independent: mean over layers.
  double score = 0.0;
  double degenerate_fraction = 0.0;
};

// `targets` parallels `probes`; one randomized model per seed.
ModelRandomizationResult ModelRandomizationTest(
    const MethodRef& method, const Model& model, RandomizationMode mode,
    const std::vector<Tensor>& probes, const std::vector<int>& targets,
    const std::vector<uint64_t>& seeds,
    SimilarityMetric metric = SimilarityMetric::kSpearman);

struct RepeatabilityResult {
  double similarity = 0.0;
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double accuracy_gap = 0.0;
};

// Trains `arch` from two initializations and minibatch orders (seed_a,
// seed_b) and compares maps on the first `probe_count` inputs.
RepeatabilityResult RepeatabilityTest(const MethodRef& method,
                                      const Model& arch, const Dataset& data,
                                      const TrainConfig& cfg, int probe_count,
                                      uint64_t seed_a, uint64_t seed_b,
                                      SimilarityMetric metric =
                                          SimilarityMetric::kSpearman);

}  // namespace salcard

#endif  // SALCARD_EVAL_SENSITIVITY_H_
