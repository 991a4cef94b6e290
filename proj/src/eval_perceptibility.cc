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

#include "salcard/eval_perceptibility.h"

#include <algorithm>
#include <cmath>

#include "salcard/error.h"
#include "salcard/evaluation.h"
#include "salcard/saliency.h"

namespace salcard {

namespace {

void RequireMask(const Tensor& map, const Tensor& mask) {
  RequireSameShape(map, mask, "ground-truth mask");
  for (double v : mask.values()) {
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorKind::kPrecondition, "mask must be binary");
    }
  }
  if (Sum(mask) == 0.0) {
    throw Error(ErrorKind::kPrecondition, "mask is empty");
  }
}

void RequirePairs(size_t a, size_t b) {
  if (a != b || a == 0) {
    throw Error(ErrorKind::kPrecondition,
                "need equally many maps and masks, at least one");
  }
}

}  // namespace

double SparsityRatio(const Tensor& map) {
  const double mean = Mean(Abs(map));
  if (mean == 0.0) {
    throw Error(ErrorKind::kDegenerate,
                "sparsity undefined for an all-zero map");
  }
  return MaxAbs(map) / mean;
}

std::vector<size_t> SalientFeatures(const Tensor& map, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw Error(ErrorKind::kPrecondition, "quantile must lie in (0, 1]");
  }
  const std::vector<size_t> ranking = RankByMagnitude(map);
  const size_t k = std::max<size_t>(
      1, static_cast<size_t>(std::ceil(quantile * map.size() - 1e-9)));
  const double cut = std::fabs(map[ranking[std::min(k, map.size()) - 1]]);
  std::vector<size_t> out;
  for (size_t i : ranking) {
    const double m = std::fabs(map[i]);
    if (m == 0.0 || m < cut) break;
    out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MinimalityResult SisMinimalityCheck(const Tensor& map, const Model& model,
                                    const Tensor& input, int target,
                                    double tau, const Tensor& replacement,
                                    double quantile) {
  RequireSameShape(map, input, "minimality map");
  RequireSameShape(replacement, input, "minimality replacement");
  if (Predict(model, input)[target] < tau) {
    throw Error(ErrorKind::kPrecondition,
                "threshold unreachable: tau exceeds prob_target(x)");
  }
  const std::vector<size_t> salient = SalientFeatures(map, quantile);
  Tensor context = replacement;
  for (size_t i : salient) context[i] = input[i];

  MinimalityResult out;
  out.salient_count = salient.size();
  out.salient_confidence = Predict(model, context)[target];
  for (size_t i : salient) {
    Tensor probe = context;
    probe[i] = replacement[i];
    if (Predict(model, probe)[target] >= tau) ++out.removable_count;
  }
  return out;
}

bool PointingGame(const Tensor& map, const Tensor& mask) {
  RequireMask(map, mask);
  return mask[RankByMagnitude(map).front()] == 1.0;
}

double HitRate(const std::vector<Tensor>& maps,
               const std::vector<Tensor>& masks) {
  RequirePairs(maps.size(), masks.size());
  double hits = 0.0;
  for (size_t n = 0; n < maps.size(); ++n) {
    hits += PointingGame(maps[n], masks[n]) ? 1.0 : 0.0;
  }
  return hits / maps.size();
}

double MeanIou(const Tensor& map, const Tensor& mask) {
  RequireMask(map, mask);
  const size_t area = static_cast<size_t>(Sum(mask));
  const std::vector<size_t> ranking = RankByMagnitude(map);
  size_t overlap = 0;
  for (size_t j = 0; j < area; ++j) overlap += mask[ranking[j]] == 1.0;
  return static_cast<double>(overlap) / (2 * area - overlap);
}

double MeanIou(const std::vector<Tensor>& maps,
               const std::vector<Tensor>& masks) {
  RequirePairs(maps.size(), masks.size());
  double total = 0.0;
  for (size_t n = 0; n < maps.size(); ++n) total += MeanIou(maps[n], masks[n]);
  return total / maps.size();
}

double LuminosityCalibration(const std::vector<Tensor>& maps,
                             const std::vector<Tensor>& importances) {
  RequirePairs(maps.size(), importances.size());
  std::vector<double> shown;
  std::vector<double> truth;
  for (size_t n = 0; n < maps.size(); ++n) {
    RequireSameShape(maps[n], importances[n], "importance");
    const double peak = MaxAbs(maps[n]);
    for (size_t i = 0; i < maps[n].size(); ++i) {
      shown.push_back(peak > 0.0 ? std::fabs(maps[n][i]) / peak : 0.0);
      truth.push_back(std::fabs(importances[n][i]));
    }
  }
  return SpearmanCorrelation(shown, truth);
}

}  // namespace salcard
