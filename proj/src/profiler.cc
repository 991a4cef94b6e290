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

#include "salcard/profiler.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include "salcard/error.h"
#include "salcard/evaluation.h"

namespace salcard {

using nlohmann::ordered_json;

namespace {

void RequireTargets(const std::vector<Tensor>& inputs,
                    const std::vector<int>& targets) {
  if (inputs.empty() || inputs.size() != targets.size()) {
    throw Error(ErrorKind::kPrecondition,
                "need at least one input and one target per input");
  }
}

}  // namespace

DeterminismReport DeterminismProbe(const MethodRef& method, const Model& model,
                                   const std::vector<Tensor>& inputs,
                                   const std::vector<int>& targets,
                                   const std::vector<uint64_t>& seeds) {
  if (seeds.size() < 2) {
    throw Error(ErrorKind::kPrecondition, "determinism probe needs runs >= 2");
  }
  RequireTargets(inputs, targets);
  DeterminismReport out;
  out.seeds = seeds;
  out.declared_deterministic = Describe(method.id).declared_deterministic;
  for (size_t n = 0; n < inputs.size(); ++n) {
    std::vector<Tensor> maps;
    for (uint64_t s : seeds) {
      maps.push_back(method.Run(model, inputs[n], targets[n], s).values);
    }
    for (size_t a = 0; a < maps.size(); ++a) {
      for (size_t b = a + 1; b < maps.size(); ++b) {
        out.max_deviation =
            std::max(out.max_deviation, MaxAbsDiff(maps[a], maps[b]));
      }
    }
  }
  out.deterministic = out.max_deviation < kDeterminismTolerance;
  out.mismatch = out.deterministic != out.declared_deterministic;
  return out;
}

SweepGrid DefaultSweepGrid(const MethodDescriptor& descriptor,
                           const Model& model) {
  SweepGrid grid;
  for (const Hyperparameter& h : descriptor.hyperparameters) {
    std::vector<ParamValue> values;
    if (h.name == "conv_layer_index") {
      const int last = model.LastConvLayer();
      for (size_t i = 0; i < model.layer_count(); ++i) {
        if (model.layers()[i].kind == LayerKind::kConv2d &&
            static_cast<int>(i) != last) {
          values.push_back(static_cast<double>(i));
        }
      }
    } else {
      for (const std::string& v : h.sweep_values) {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (end != v.c_str() && *end == '\0') {
          values.push_back(d);
        } else {
          values.push_back(v);
        }
      }
    }
    if (!values.empty()) grid[h.name] = std::move(values);
  }
  return grid;
}

SweepReport HyperparameterSweep(const MethodRef& method, const Model& model,
                                const std::vector<Tensor>& inputs,
                                const std::vector<int>& targets,
                                const SweepGrid& grid, uint64_t seed) {
  SweepReport out;
  if (grid.empty()) return out;
  RequireTargets(inputs, targets);
  const MethodDescriptor& d = Describe(method.id);
  for (const auto& [name, values] : grid) {
    if (!d.HasHyperparameter(name)) {
      throw Error(ErrorKind::kPrecondition,
                  method.id + " has no parameter \"" + name + "\"");
    }
    if (values.empty()) {
      throw Error(ErrorKind::kPrecondition,
                  "sweep over \"" + name + "\" lists no values");
    }
  }
  std::vector<Tensor> reference;
  for (size_t n = 0; n < inputs.size(); ++n) {
    reference.push_back(method.Run(model, inputs[n], targets[n], seed).values);
  }
  double sum = 0.0;
  for (const auto& [name, values] : grid) {
    double dispersion = 0.0;
    for (const ParamValue& v : values) {
      MethodRef variant = method;
      variant.params.Set(name, v);
      for (size_t n = 0; n < inputs.size(); ++n) {
        const Tensor map =
            variant.Run(model, inputs[n], targets[n], seed).values;
        dispersion += 1.0 - SaliencySimilarity(reference[n], map);
      }
    }
    dispersion /= static_cast<double>(values.size() * inputs.size());
    out.per_param_dispersion[name] = dispersion;
    sum += dispersion;
  }
  out.overall = sum / static_cast<double>(grid.size());
  return out;
}

int OrderOfMagnitude(double seconds) {
  if (!(seconds > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "duration must be positive");
  }
  return static_cast<int>(std::floor(std::log10(seconds)));
}

EfficiencyReport EfficiencyProbe(const MethodRef& method, const Model& model,
                                 const Tensor& input, int target,
                                 int repetitions, uint64_t seed) {
  if (repetitions < 3) {
    throw Error(ErrorKind::kPrecondition,
                "efficiency probe needs repetitions >= 3");
  }
  using Clock = std::chrono::steady_clock;
  method.Run(model, input, target, seed);
  std::vector<double> times;
  for (int r = 0; r < repetitions; ++r) {
    const Clock::time_point start = Clock::now();
    method.Run(model, input, target, seed);
    times.push_back(
        std::chrono::duration<double>(Clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  const size_t mid = times.size() / 2;
  EfficiencyReport out;
  out.repetitions = repetitions;
  out.median_seconds = times.size() % 2 == 1
                           ? times[mid]
                           : 0.5 * (times[mid - 1] + times[mid]);
  out.order_of_magnitude =
      OrderOfMagnitude(std::max(out.median_seconds, 1e-9));
  return out;
}

AgnosticismReport ReportAgnosticism(const MethodDescriptor& descriptor) {
  return {descriptor.access, descriptor.agnosticism_text, std::nullopt};
}

AgnosticismReport ReportAgnosticism(const MethodDescriptor& descriptor,
                                    const MethodRef& method,
                                    const Model& model, const Tensor& input,
                                    int target, uint64_t seed) {
  AgnosticismReport out = ReportAgnosticism(descriptor);
  if (descriptor.access != AccessRequirement::kBlackBox) return out;
  const FunctionBlackBox outputs_only(
      model.input_shape(), model.class_count(),
      [&model](const Tensor& x) { return Logits(model, x); });
  const Tensor full = method.Run(model, input, target, seed).values;
  const Tensor limited =
      ExplainBlackBox(method.id, outputs_only, input, target, method.params,
                      seed)
          .values;
  out.black_box_verified = full == limited;
  return out;
}

Profile ProfileMethod(const MethodRef& method, const Model& model,
                      const std::vector<Tensor>& inputs,
                      const ProfileOptions& options) {
  const MethodDescriptor& d = Describe(method.id);
  const size_t probe = std::min<size_t>(inputs.size(), options.probe_inputs);
  const size_t sweep = std::min<size_t>(inputs.size(), options.sweep_inputs);
  if (probe == 0) {
    throw Error(ErrorKind::kPrecondition, "profiling needs inputs");
  }
  const size_t used = std::max(probe, sweep);
  std::vector<Tensor> xs(inputs.begin(), inputs.begin() + used);
  std::vector<int> targets;
  for (const Tensor& x : xs) targets.push_back(ArgMax(Logits(model, x)));
  const uint64_t seed = options.seeds.empty() ? 0 : options.seeds.front();

  Profile p;
  p.method_id = method.id;
  p.determinism = DeterminismProbe(
      method, model, std::vector<Tensor>(xs.begin(), xs.begin() + probe),
      std::vector<int>(targets.begin(), targets.begin() + probe),
      options.seeds);
  p.hyperparameters = HyperparameterSweep(
      method, model, std::vector<Tensor>(xs.begin(), xs.begin() + sweep),
      std::vector<int>(targets.begin(), targets.begin() + sweep),
      DefaultSweepGrid(d, model), seed);
  if (options.timing) {
    p.efficiency = EfficiencyProbe(method, model, xs.front(), targets.front(),
                                   options.repetitions, seed);
  }
  p.agnosticism =
      ReportAgnosticism(d, method, model, xs.front(), targets.front(), seed);
  p.semantic_directness = d.semantic_directness_text;
  return p;
}

ordered_json ProfileToJson(const Profile& p) {
  ordered_json out = ordered_json::array();

  ordered_json det;
  det["metric_id"] = "determinism";
  det["scores"] = {{"max_deviation", p.determinism.max_deviation}};
  det["classification"] =
      p.determinism.deterministic ? "deterministic" : "nondeterministic";
  det["declared_deterministic"] = p.determinism.declared_deterministic;
  det["mismatch"] = p.determinism.mismatch;
  det["tolerance"] = kDeterminismTolerance;
  det["seeds"] = p.determinism.seeds;
  out.push_back(det);

  ordered_json hyp;
  hyp["metric_id"] = "hyperparameter";
  ordered_json scores = ordered_json::object();
  for (const auto& [name, v] : p.hyperparameters.per_param_dispersion) {
    scores[name] = v;
  }
  hyp["scores"] = scores;
  hyp["overall"] = p.hyperparameters.overall;
  out.push_back(hyp);

  if (p.efficiency) {
    ordered_json eff;
    eff["metric_id"] = "efficiency";
    eff["scores"] = {{"median_seconds", p.efficiency->median_seconds}};
    eff["order_of_magnitude"] = p.efficiency->order_of_magnitude;
    eff["repetitions"] = p.efficiency->repetitions;
    out.push_back(eff);
  }

  ordered_json agn;
  agn["metric_id"] = "agnosticism";
  agn["access_requirement"] =
      std::string(AccessRequirementName(p.agnosticism.access));
  agn["text"] = p.agnosticism.text;
  if (p.agnosticism.black_box_verified) {
    agn["black_box_verified"] = *p.agnosticism.black_box_verified;
  }
  out.push_back(agn);
  return out;
}

}  // namespace salcard
