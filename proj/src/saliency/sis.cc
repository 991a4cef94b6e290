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

#include <algorithm>
#include <cmath>

#include "methods.h"
#include "salcard/autodiff.h"
#include "salcard/error.h"

namespace salcard::internal {

namespace {

struct SisState {
  const Model& model;
  const Tensor& x;
  const Tensor& fill;
  int target;

  Tensor Masked(const std::vector<char>& kept) const {
    Tensor z = x;
    for (size_t i = 0; i < z.size(); ++i) {
      if (!kept[i]) z[i] = fill[i];
    }
    return z;
  }

  double Confidence(const std::vector<char>& kept) const {
    return Predict(model, Masked(kept))[target];
  }

  // |d prob_target / d z| at the current masked input.
  std::vector<double> GradientMagnitudes(const std::vector<char>& kept) const {
    ForwardResult fwd = Forward(model, Masked(kept));
    const Tensor prob = Softmax(fwd.logits);
    Tensor seed(prob.shape(), 0.0);
    for (size_t k = 0; k < prob.size(); ++k) {
      seed[k] = prob[target] * ((static_cast<int>(k) == target ? 1.0 : 0.0) -
                                prob[k]);
    }
    const Tensor grad = BackwardFromSeed(fwd.tape, seed);
    std::vector<double> out(grad.size());
    for (size_t i = 0; i < grad.size(); ++i) out[i] = std::fabs(grad[i]);
    return out;
  }
};

}  // namespace

Tensor Sis(const Model& model, const Tensor& x, int target,
           const ParamReader& p) {
  const double threshold = p.Number("confidence_threshold");
  const double fraction = p.Number("batch_fraction");
  if (!(threshold > 0.0 && threshold < 1.0) ||
      !(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kPrecondition,
                "sis needs confidence_threshold in (0, 1) and batch_fraction "
                "in (0, 1]");
  }
  const Tensor fill = p.Fill("replacement", x);
  const SisState state{model, x, fill, target};
  std::vector<char> kept(x.size(), 1);
  if (state.Confidence(kept) < threshold) {
    throw Error(ErrorKind::kPrecondition,
                "input not confidently classified: confidence below sis "
                "threshold");
  }

  size_t remaining = x.size();
  size_t batch_cap = remaining;
  while (remaining > 0) {
    const std::vector<double> magnitude = state.GradientMagnitudes(kept);
    std::vector<size_t> order;
    for (size_t i = 0; i < kept.size(); ++i) {
      if (kept[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return magnitude[a] < magnitude[b];
    });
    size_t batch = std::max<size_t>(
        1, static_cast<size_t>(fraction * static_cast<double>(remaining)));
    batch = std::min(batch, batch_cap);
    std::vector<char> trial = kept;
    for (size_t j = 0; j < batch; ++j) trial[order[j]] = 0;
    if (state.Confidence(trial) >= threshold) {
      kept = std::move(trial);
      remaining -= batch;
      continue;
    }
    if (batch == 1) break;
    batch_cap = batch / 2;
  }

  // Single-feature pruning until no kept feature can be masked.
  bool changed = remaining > 0;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < kept.size(); ++i) {
      if (!kept[i]) continue;
      kept[i] = 0;
      if (state.Confidence(kept) >= threshold) {
        --remaining;
        changed = true;
      } else {
        kept[i] = 1;
      }
    }
  }
  Tensor out(x.shape(), 0.0);
  for (size_t i = 0; i < kept.size(); ++i) out[i] = kept[i] ? 1.0 : 0.0;
  return out;
}

}  // namespace salcard::internal
