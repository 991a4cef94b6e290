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

#ifndef SALCARD_EVAL_PERCEPTIBILITY_H_
#define SALCARD_EVAL_PERCEPTIBILITY_H_

#include <vector>

#include "salcard/model.h"
#include "salcard/tensor.h"

namespace salcard {

// max|v| / mean|v|. Throws kDegenerate for an all-zero map.
double SparsityRatio(const Tensor& map);

// Features with |v| at or above the magnitude of the ceil(q * n)-th ranked
// feature; zeros never qualify.
std::vector<size_t> SalientFeatures(const Tensor& map, double quantile);

struct MinimalityResult {
  size_t salient_count = 0;
  // Salient features that can be masked alone while prob_target stays >= tau.
  size_t removable_count = 0;
  // prob_target of the input restricted to the salient set.
  double salient_confidence = 0.0;
};

// Context is the input restricted to the salient set (all other features
// take the replacement). Throws kPrecondition when tau > prob_target(x).
MinimalityResult SisMinimalityCheck(const Tensor& map, const Model& model,
                                    const Tensor& input, int target,
                                    double tau, const Tensor& replacement,
                                    double quantile = 0.1);

// Hit iff the first feature in RankByMagnitude order lies inside the mask.
bool PointingGame(const Tensor& map, const Tensor& mask);
double HitRate(const std::vector<Tensor>& maps,
               const std::vector<Tensor>& masks);

// IoU of the mask with the map's top-k features, k = mask area.
double MeanIou(const Tensor& map, const Tensor& mask);
double MeanIou(const std::vector<Tensor>& maps,
               const std::vector<Tensor>& masks);

// Spearman correlation of per-map max-normalized |map| against |importance|,
// pooled over all features of all inputs.
double LuminosityCalibration(const std::vector<Tensor>& maps,
                             const std::vector<Tensor>& importances);

}  // namespace salcard

#endif  // SALCARD_EVAL_PERCEPTIBILITY_H_
