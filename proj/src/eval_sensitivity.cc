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

#include "salcard/eval_sensitivity.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard {

namespace {

double Trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (size_t i = 1; i < x.size(); ++i) {
    area += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return area;
}

void RequireProbes(size_t probe_count, size_t available) {
  if (probe_count == 0) {
    throw Error(ErrorKind::kPrecondition, "probe set is empty");
  }
  if (probe_count > available) {
    throw Error(ErrorKind::kPrecondition,
                "probe set larger than the dataset");
  }
}

// Replaces the top `count` features of `ranking` with `replacement`.
Tensor MaskTop(const Tensor& input, const std::vector<size_t>& ranking,
               size_t count, const Tensor& replacement) {
  Tensor out = input;
  for (size_t j = 0; j < count; ++j) out[ranking[j]] = replacement[ranking[j]];
  return out;
}

Dataset MaskDataset(const Dataset& data,
                    const std::vector<std::vector<size_t>>& rankings,
                    double fraction, const Tensor& replacement) {
  Dataset out = data;
  for (size_t n = 0; n < data.size(); ++n) {
    const size_t count = static_cast<size_t>(
        std::llround(fraction * static_cast<double>(data.inputs[n].size())));
    out.inputs[n] = MaskTop(data.inputs[n], rankings[n], count, replacement);
  }
  return out;
}

std::vector<std::vector<size_t>> MethodRankings(const MethodRef& method,
                                                const Model& model,
                                                const Dataset& data,
                                                uint64_t seed) {
  std::vector<std::vector<size_t>> rankings;
  rankings.reserve(data.size());
  for (size_t n = 0; n < data.size(); ++n) {
    const SaliencyMap map = method.Run(model, data.inputs[n], data.labels[n],
                                       DeriveSeed(seed, n));
    rankings.push_back(RankByMagnitude(map.values));
  }
  return rankings;
}

std::vector<std::vector<size_t>> RandomRankings(const Dataset& data,
                                                uint64_t seed) {
  std::vector<std::vector<size_t>> rankings;
  Rng rng(seed);
  for (size_t n = 0; n < data.size(); ++n) {
    std::vector<size_t> order(data.inputs[n].size());
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.UniformInt(i)]);
    }
    rankings.push_back(std::move(order));
  }
  return rankings;
}

TrainConfig WithSeed(TrainConfig cfg, uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

}  // namespace

DeletionInsertion DeletionInsertionCurves(const Model& model,
                                          const Tensor& input, int target,
                                          const Tensor& saliency,
                                          double step_fraction,
                                          const Tensor& replacement) {
  if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
    throw Error(ErrorKind::kPrecondition, "step_fraction must lie in (0, 1]");
  }
  RequireSameShape(input, saliency, "deletion saliency");
  RequireSameShape(input, replacement, "deletion replacement");
  const std::vector<size_t> ranking = RankByMagnitude(saliency);
  const size_t n = input.size();
  const int steps = static_cast<int>(std::ceil(1.0 / step_fraction - 1e-12));

  DeletionInsertion out;
  Tensor deleted = input;
  Tensor inserted = replacement;
  size_t done = 0;
  for (int j = 0; j <= steps; ++j) {
    const size_t upto = std::min(
        n, static_cast<size_t>(std::llround(j * step_fraction * n)));
    for (; done < upto; ++done) {
      deleted[ranking[done]] = replacement[ranking[done]];
      inserted[ranking[done]] = input[ranking[done]];
    }
    out.fractions.push_back(static_cast<double>(upto) / n);
    out.deletion_curve.push_back(Predict(model, deleted)[target]);
    out.insertion_curve.push_back(Predict(model, inserted)[target]);
  }
  out.deletion_auc = Trapezoid(out.fractions, out.deletion_curve);
  out.insertion_auc = Trapezoid(out.fractions, out.insertion_curve);
  return out;
}

double CompletenessGap(const Model& model, const Tensor& input, int target,
                       const Tensor& map, const Tensor& baseline) {
  RequireSameShape(input, map, "completeness map");
  RequireSameShape(input, baseline, "completeness baseline");
  const double delta =
      Logits(model, input)[target] - Logits(model, baseline)[target];
  return std::fabs(Sum(map) - delta);
}

double MaxSensitivity(const MethodRef& method, const Model& model,
                      const Tensor& input, int target, double radius,
                      int samples, uint64_t seed, uint64_t explain_seed) {
  if (!(radius >= 0.0) || samples < 1) {
    throw Error(ErrorKind::kPrecondition,
                "max_sensitivity needs radius >= 0 and samples >= 1");
  }
  const Tensor base = method.Run(model, input, target, explain_seed).values;
  const double norm = L2Norm(base);
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Tensor moved = input;
    for (double& v : moved.mutable_values()) v += rng.Uniform(-radius, radius);
    const Tensor map = method.Run(model, moved, target, explain_seed).values;
    const double change = L2Norm(map - base);
    worst = std::max(worst, norm > 0.0 ? change / norm : change);
  }
  return worst;
}

InfidelityResult Infidelity(const Model& model, const Tensor& input,
                            int target, const Tensor& map, double noise_std,
                            int samples, uint64_t seed) {
  if (!(noise_std > 0.0) || samples < 1) {
    throw Error(ErrorKind::kPrecondition,
                "infidelity needs noise_std > 0 and samples >= 1");
  }
  RequireSameShape(input, map, "infidelity map");
  const double fx = Logits(model, input)[target];
  Rng rng(seed);
  double residual = 0.0;
  double energy = 0.0;
  for (int s = 0; s < samples; ++s) {
    Tensor noise(input.shape(), 0.0);
    for (double& v : noise.mutable_values()) v = rng.Normal(0.0, noise_std);
    const double change = fx - Logits(model, input - noise)[target];
    const double r = Dot(noise, map) - change;
    residual += r * r;
    energy += change * change;
  }
  InfidelityResult out;
  out.infidelity = residual / samples;
  out.normalized = energy > 0.0 ? residual / energy : out.infidelity;
  return out;
}

RoarResult RoarLite(const MethodRef& method, const Model& arch,
                    const Dataset& train, const Dataset& test,
                    const TrainConfig& cfg,
                    const std::vector<double>& fractions,
                    const Tensor& replacement, uint64_t seed) {
  if (fractions.empty()) {
    throw Error(ErrorKind::kPrecondition, "roar needs at least one fraction");
  }
  for (double f : fractions) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw Error(ErrorKind::kPrecondition,
                  "roar fractions must lie in [0, 1)");
    }
  }
  const Model init = InitializeParameters(arch, DeriveSeed(seed, 0));
  const TrainConfig run = WithSeed(cfg, DeriveSeed(seed, 1));
  const Model original = Train(init, train, run).model;

  RoarResult out;
  out.fractions = fractions;
  out.baseline_accuracy = Accuracy(original, test);
  const auto method_train = MethodRankings(method, original, train, seed);
  const auto method_test =
      MethodRankings(method, original, test, DeriveSeed(seed, 2));
  const auto random_train = RandomRankings(train, DeriveSeed(seed, 3));
  const auto random_test = RandomRankings(test, DeriveSeed(seed, 4));
  for (double f : fractions) {
    const Model by_method =
        Train(init, MaskDataset(train, method_train, f, replacement), run)
            .model;
    out.method_accuracy.push_back(
        Accuracy(by_method, MaskDataset(test, method_test, f, replacement)));
    const Model by_random =
        Train(init, MaskDataset(train, random_train, f, replacement), run)
            .model;
    out.random_accuracy.push_back(
        Accuracy(by_random, MaskDataset(test, random_test, f, replacement)));
  }
  return out;
}

Model AbsorbInputShift(const Model& model, const Tensor& shift) {
  if (ShapeSize(shift.shape()) != ShapeSize(model.input_shape())) {
    throw Error(ErrorKind::kShape, "shift does not match the input");
  }
  int first = -1;
  for (size_t i = 0; i < model.layer_count(); ++i) {
    const LayerKind kind = model.layers()[i].kind;
    if (kind == LayerKind::kDense) {
      first = static_cast<int>(i);
      break;
    }
    if (kind != LayerKind::kFlatten) break;
  }
  if (first < 0) {
    throw Error(ErrorKind::kUnsupportedArchitecture,
                "input invariance needs a dense first parameterized layer");
  }
  Model out = model;
  const Tensor& w = model.layers()[first].weights;
  Tensor& bias = out.mutable_bias(first);
  const int rows = w.shape()[0];
  const int cols = w.shape()[1];
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += w[r * cols + c] * shift[c];
    bias[r] -= acc;
  }
  return out;
}

InvarianceResult InputInvarianceCheck(const MethodRef& method,
                                      const Model& model,
                                      const std::vector<Tensor>& probes,
                                      const Tensor& shift, uint64_t seed,
                                      SimilarityMetric metric) {
  RequireProbes(probes.size(), probes.size());
  const Model shifted = AbsorbInputShift(model, shift);
  const Tensor m = shift.Reshaped(model.input_shape());
  InvarianceResult out;
  double total = 0.0;
  for (size_t n = 0; n < probes.size(); ++n) {
    const Tensor& x = probes[n];
    const Tensor moved = x + m;
    out.max_logit_error =
        std::max(out.max_logit_error,
                 MaxAbsDiff(Logits(shifted, moved), Logits(model, x)));
    const int target = ArgMax(Logits(model, x));
    const uint64_t s = DeriveSeed(seed, n);
    total += SaliencySimilarity(method.Run(model, x, target, s).values,
                                method.Run(shifted, moved, target, s).values,
                                metric);
  }
  if (out.max_logit_error > 1e-9) {
    throw Error(ErrorKind::kNumeric,
                "shifted model deviates from the original by more than 1e-9");
  }
  out.similarity = total / probes.size();
  return out;
}

DataRandomizationResult DataRandomizationTest(
    const MethodRef& method, const Model& arch, const Dataset& data,
    const TrainConfig& cfg, const TrainConfig& memorize_cfg, int probe_count,
    uint64_t seed, SimilarityMetric metric) {
  RequireProbes(probe_count < 0 ? 0 : probe_count, data.size());
  const Model init = InitializeParameters(arch, DeriveSeed(seed, 0));
  const Model a = Train(init, data, WithSeed(cfg, DeriveSeed(seed, 1))).model;
  const Dataset shuffled = RandomizeLabels(data, DeriveSeed(seed, 2));
  const Model b =
      Train(init, shuffled, WithSeed(memorize_cfg, DeriveSeed(seed, 3))).model;

  DataRandomizationResult out;
  out.true_label_accuracy = Accuracy(a, data);
  out.random_label_accuracy = Accuracy(b, shuffled);
  double total = 0.0;
  for (int n = 0; n < probe_count; ++n) {
    const Tensor& x = data.inputs[n];
    const int target = data.labels[n];
    const uint64_t s = DeriveSeed(seed, 100 + n);
    total += SaliencySimilarity(method.Run(a, x, target, s).values,
                                method.Run(b, x, target, s).values, metric);
  }
  out.similarity = total / probe_count;
  return out;
}

ModelRandomizationResult ModelRandomizationTest(
    const MethodRef& method, const Model& model, RandomizationMode mode,
    const std::vector<Tensor>& probes, const std::vector<int>& targets,
    const std::vector<uint64_t>& seeds, SimilarityMetric metric) {
  RequireProbes(probes.size(), probes.size());
  if (targets.size() != probes.size()) {
    throw Error(ErrorKind::kPrecondition, "one target per probe required");
  }
  if (seeds.empty()) {
    throw Error(ErrorKind::kPrecondition, "at least one seed required");
  }
  const std::vector<int> params = model.ParameterizedLayers();
  const int k = static_cast<int>(params.size());

  // Reference maps, one per (seed, probe).
  std::vector<std::vector<Tensor>> reference(seeds.size());
  for (size_t s = 0; s < seeds.size(); ++s) {
    for (size_t n = 0; n < probes.size(); ++n) {
      reference[s].push_back(
          method.Run(model, probes[n], targets[n], seeds[s]).values);
    }
  }

  ModelRandomizationResult out;
  out.mode = mode;
  int degenerate_total = 0;
  int compared_total = 0;
  auto measure = [&](std::vector<int> layers, int upto) {
    RandomizationDepth depth;
    depth.layers = std::move(layers);
    double total = 0.0;
    int count = 0;
    for (size_t s = 0; s < seeds.size(); ++s) {
      const Model randomized =
          upto < 0 ? model : RandomizeLayers(model, mode, upto, seeds[s]);
      for (size_t n = 0; n < probes.size(); ++n) {
        const Tensor map =
            method.Run(randomized, probes[n], targets[n], seeds[s]).values;
        if (IsConstantMagnitude(map) || IsConstantMagnitude(reference[s][n])) {
          ++depth.degenerate;
        }
        total += SaliencySimilarity(reference[s][n], map, metric);
        ++count;
      }
    }
    depth.similarity = total / count;
    if (upto >= 0) {
      degenerate_total += depth.degenerate;
      compared_total += count;
    }
    out.depths.push_back(std::move(depth));
  };

  measure({}, -1);
  if (mode == RandomizationMode::kCascading) {
    for (int j = 1; j <= k; ++j) {
      measure(std::vector<int>(params.end() - j, params.end()), params[k - j]);
    }
    out.score = out.depths.back().similarity;
  } else {
    double sum = 0.0;
    for (int layer : params) {
      measure({layer}, layer);
      sum += out.depths.back().similarity;
    }
    out.score = k > 0 ? sum / k : out.depths.front().similarity;
  }
  out.degenerate_fraction =
      compared_total > 0
          ? static_cast<double>(degenerate_total) / compared_total
          : 0.0;
  return out;
}

RepeatabilityResult RepeatabilityTest(const MethodRef& method,
                                      const Model& arch, const Dataset& data,
                                      const TrainConfig& cfg, int probe_count,
                                      uint64_t seed_a, uint64_t seed_b,
                                      SimilarityMetric metric) {
  RequireProbes(probe_count < 0 ? 0 : probe_count, data.size());
  const Model a =
      Train(InitializeParameters(arch, seed_a), data, WithSeed(cfg, seed_a))
          .model;
  const Model b =
      Train(InitializeParameters(arch, seed_b), data, WithSeed(cfg, seed_b))
          .model;
  RepeatabilityResult out;
  out.accuracy_a = Accuracy(a, data);
  out.accuracy_b = Accuracy(b, data);
  out.accuracy_gap = std::fabs(out.accuracy_a - out.accuracy_b);
  double total = 0.0;
  for (int n = 0; n < probe_count; ++n) {
    const Tensor& x = data.inputs[n];
    const uint64_t s = DeriveSeed(seed_a, n);
    total += SaliencySimilarity(method.Run(a, x, data.labels[n], s).values,
                                method.Run(b, x, data.labels[n], s).values,
                                metric);
  }
  out.similarity = total / probe_count;
  return out;
}

}  // namespace salcard
