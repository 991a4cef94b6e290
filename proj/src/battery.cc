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

#include "salcard/battery.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "salcard/error.h"
#include "salcard/eval_perceptibility.h"
#include "salcard/random.h"

namespace salcard {

using nlohmann::ordered_json;

namespace {

constexpr CompareOp kLt = CompareOp::kLess;
constexpr CompareOp kLe = CompareOp::kLessEqual;
constexpr CompareOp kGt = CompareOp::kGreater;
constexpr CompareOp kGe = CompareOp::kGreaterEqual;

ThresholdSpec Guarded(ThresholdSpec spec, Predicate guard) {
  spec.guards.push_back(std::move(guard));
  return spec;
}

std::map<std::string, ThresholdSpec> DefaultThresholds() {
  std::map<std::string, ThresholdSpec> t;
  t["completeness"] = MakeThreshold("relative_gap", kLt, 0.01, kGt, 0.1);
  t["deletion"] = MakeThreshold("advantage", kGe, 0.05, kLe, 0.0);
  t["insertion"] = MakeThreshold("advantage", kGe, 0.05, kLe, 0.0);
  t["infidelity"] =
      MakeThreshold("normalized_infidelity", kLe, 0.5, kGe, 1.0);
  t["input_invariance"] = MakeThreshold("similarity", kGt, 0.8, kLt, 0.5);
  t["roar"] = MakeThreshold("accuracy_gap", kGe, 0.1, kLe, 0.02);
  t["sensitivity"] = MakeThreshold("max_sensitivity", kLe, 0.2, kGe, 1.0);
  t["data_randomization"] =
      Guarded(MakeThreshold("similarity", kLt, 0.2, kGt, 0.6),
              {"random_label_accuracy", kGe, 0.9});
  t["cascading_model_randomization"] =
      Guarded(MakeThreshold("similarity", kLt, 0.2, kGt, 0.6),
              {"degenerate_fraction", kLe, 0.5});
  t["independent_model_randomization"] =
      Guarded(MakeThreshold("similarity", kLt, 0.2, kGt, 0.6),
              {"degenerate_fraction", kLe, 0.5});
  t["repeatability"] = Guarded(MakeThreshold("similarity", kGt, 0.8, kLt, 0.5),
                               {"accuracy_gap", kLe, 0.02});
  t["minimality"] =
      Guarded(MakeThreshold("removable_count", kLe, 0.0, kGe, 1.0),
              {"sufficient_fraction", kGe, 0.5});
  t["sparsity"] = MakeThreshold("sparsity_ratio", kGe, 10.0, kLe, 3.0);
  t["visual_sharpening"] =
      MakeThreshold("sparsity_gain", kGe, 1.1, kLe, 1.0);
  t["luminosity_calibration"] =
      MakeThreshold("correlation", kGe, 0.5, kLe, 0.2);
  t["mean_iou"] = MakeThreshold("mean_iou", kGe, 0.3, kLe, 0.1);
  t["pointing_game"] = MakeThreshold("hit_rate", kGe, 0.8, kLe, 0.5);
  return t;
}

const std::vector<std::string>& AllMetrics() {
  static const std::vector<std::string> metrics = {
      "completeness",
      "deletion",
      "infidelity",
      "input_invariance",
      "insertion",
      "roar",
      "sensitivity",
      "data_randomization",
      "cascading_model_randomization",
      "independent_model_randomization",
      "repeatability",
      "minimality",
      "sparsity",
      "visual_sharpening",
      "luminosity_calibration",
      "mean_iou",
      "pointing_game",
  };
  return metrics;
}

Attribute MetricAttribute(const std::string& id) {
  static const std::map<std::string, Attribute> attributes = {
      {"completeness", Attribute::kInputSensitivity},
      {"deletion", Attribute::kInputSensitivity},
      {"infidelity", Attribute::kInputSensitivity},
      {"input_invariance", Attribute::kInputSensitivity},
      {"insertion", Attribute::kInputSensitivity},
      {"roar", Attribute::kInputSensitivity},
      {"sensitivity", Attribute::kInputSensitivity},
      {"data_randomization", Attribute::kLabelSensitivity},
      {"cascading_model_randomization", Attribute::kModelSensitivity},
      {"independent_model_randomization", Attribute::kModelSensitivity},
      {"repeatability", Attribute::kModelSensitivity},
      {"minimality", Attribute::kMinimality},
      {"sparsity", Attribute::kMinimality},
      {"visual_sharpening", Attribute::kMinimality},
      {"luminosity_calibration", Attribute::kPerceptualCorrespondence},
      {"mean_iou", Attribute::kPerceptualCorrespondence},
      {"pointing_game", Attribute::kPerceptualCorrespondence},
  };
  auto it = attributes.find(id);
  if (it == attributes.end()) {
    throw Error(ErrorKind::kVocabulary,
                "battery has no metric \"" + id + "\"");
  }
  return it->second;
}

// Monte-Carlo budgets scaled by the quick preset.
struct BudgetParam {
  const char* method;
  const char* param;
};
constexpr BudgetParam kBudgetParams[] = {
    {"rise", "mask_count"},
    {"lime", "sample_count"},
    {"kernel_shap", "coalition_budget"},
    {"smoothgrad", "samples"},
};

int Tenth(int n) { return std::max(1, (n + 9) / 10); }

ordered_json TrainToJson(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

template <typename T>
void Read(const ordered_json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kFormat,
                std::string("config key \"") + key + "\" has the wrong type");
  }
}

void RejectUnknown(const ordered_json& j,
                   std::initializer_list<const char*> known,
                   const std::string& where) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kFormat, where + " must be an object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(known.begin(), known.end(),
                     [&](const char* k) { return it.key() == k; })) {
      throw Error(ErrorKind::kFormat,
                  "unknown config key \"" + it.key() + "\" in " + where);
    }
  }
}

TrainConfig TrainFromJson(const ordered_json& j, TrainConfig c,
                          const std::string& where) {
  RejectUnknown(j, {"epochs", "batch_size", "learning_rate", "seed"}, where);
  Read(j, "epochs", c.epochs);
  Read(j, "batch_size", c.batch_size);
  Read(j, "learning_rate", c.learning_rate);
  Read(j, "seed", c.seed);
  c.Validate();
  return c;
}

ordered_json ParamToJson(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

void RunJobs(std::vector<std::function<void()>>& jobs, int workers) {
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(jobs.size()));
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Errors that make one metric inapplicable to this input rather than
// invalidating the run.
bool IsInapplicable(const Error& e) {
  return e.kind() == ErrorKind::kPrecondition ||
         e.kind() == ErrorKind::kDegenerate;
}

bool UsesSharedMaps(const std::string& id) {
  return id == "completeness" || id == "deletion" || id == "insertion" ||
         id == "infidelity" || id == "minimality" || id == "sparsity" ||
         id == "visual_sharpening" || id == "luminosity_calibration" ||
         id == "mean_iou" || id == "pointing_game";
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Shared read-only state for one battery run.
struct Context {
  const MethodRef& method;
  const Model& model;
  const Dataset& data;
  const BatteryConfig& cfg;
  uint64_t seed;
  Tensor mean;
  std::vector<int> targets;  // argmax class per input
  std::vector<Tensor> maps;  // method maps on the leading inputs
  std::vector<Tensor> vanilla;
  // First failure among the shared maps; empty when all were computed.
  std::string map_failure;

  uint64_t MapSeed(size_t n) const { return DeriveSeed(seed, 1000 + n); }
  size_t Count(int wanted) const {
    return std::min<size_t>(maps.size(), std::max(0, wanted));
  }
};

using MetricFn = std::function<EvalResult(const Context&)>;

EvalResult Finish(const Context& c, const std::string& id, Scores scores,
                  std::vector<uint64_t> seeds,
                  std::vector<std::string> notes = {}) {
  EvalResult r = Conclude(id, MetricAttribute(id), std::move(scores),
                          c.cfg.thresholds.at(id), std::move(seeds));
  r.notes = std::move(notes);
  return r;
}

EvalResult RunCompleteness(const Context& c) {
  const MethodDescriptor& d = Describe(c.method.id);
  ParamValue spec = std::string("zero");
  if (d.HasHyperparameter("baseline")) {
    auto it = c.method.params.values.find("baseline");
    spec = it != c.method.params.values.end()
               ? it->second
               : ParamValue(std::string(
                     std::find_if(d.hyperparameters.begin(),
                                  d.hyperparameters.end(),
                                  [](const Hyperparameter& h) {
                                    return h.name == "baseline";
                                  })
                         ->default_value));
  }
  std::vector<double> gaps, relative;
  const size_t n = c.Count(c.cfg.probe_count);
  for (size_t i = 0; i < n; ++i) {
    const Tensor& x = c.data.inputs[i];
    const Tensor baseline = ResolveFill(spec, x, c.mean);
    const double gap =
        CompletenessGap(c.model, x, c.targets[i], c.maps[i], baseline);
    const double delta = std::fabs(Logits(c.model, x)[c.targets[i]] -
                                   Logits(c.model, baseline)[c.targets[i]]);
    gaps.push_back(gap);
    relative.push_back(gap / std::max(delta, 1e-12));
  }
  return Finish(c, "completeness",
                {{"gap", Mean(gaps)}, {"relative_gap", Mean(relative)}},
                {c.seed},
                {"Baseline: " + ParamToString(spec) + "."});
}

EvalResult RunDeletionInsertion(const Context& c, bool deletion) {
  std::vector<double> method_auc, random_auc;
  const size_t n = c.Count(c.cfg.deletion_images);
  const uint64_t random_seed = DeriveSeed(c.seed, deletion ? 21 : 22);
  for (size_t i = 0; i < n; ++i) {
    const Tensor& x = c.data.inputs[i];
    Tensor noise(x.shape(), 0.0);
    Rng rng(DeriveSeed(random_seed, i));
    for (double& v : noise.mutable_values()) v = rng.Uniform();
    const DeletionInsertion a = DeletionInsertionCurves(
        c.model, x, c.targets[i], c.maps[i], c.cfg.deletion_step, c.mean);
    const DeletionInsertion b = DeletionInsertionCurves(
        c.model, x, c.targets[i], noise, c.cfg.deletion_step, c.mean);
    method_auc.push_back(deletion ? a.deletion_auc : a.insertion_auc);
    random_auc.push_back(deletion ? b.deletion_auc : b.insertion_auc);
  }
  const double m = Mean(method_auc);
  const double r = Mean(random_auc);
  const std::string id = deletion ? "deletion" : "insertion";
  return Finish(c, id,
                {{id + "_auc", m},
                 {"random_" + id + "_auc", r},
                 {"advantage", deletion ? r - m : m - r}},
                {c.seed, random_seed},
                {"Advantage over a random ranking of the same features."});
}

EvalResult RunInfidelity(const Context& c) {
  std::vector<double> raw, normalized;
  const uint64_t s = DeriveSeed(c.seed, 23);
  const size_t n = c.Count(c.cfg.infidelity_images);
  for (size_t i = 0; i < n; ++i) {
    const InfidelityResult r =
        Infidelity(c.model, c.data.inputs[i], c.targets[i], c.maps[i],
                   c.cfg.infidelity_noise, c.cfg.infidelity_samples,
                   DeriveSeed(s, i));
    raw.push_back(r.infidelity);
    normalized.push_back(r.normalized);
  }
  return Finish(c, "infidelity",
                {{"infidelity", Mean(raw)},
                 {"normalized_infidelity", Mean(normalized)}},
                {c.seed, s});
}

EvalResult RunSensitivity(const Context& c) {
  const double range = MaxValue(c.data.inputs[0]) - MinValue(c.data.inputs[0]);
  const double radius = c.cfg.sensitivity_radius * std::max(range, 1e-12);
  const uint64_t s = DeriveSeed(c.seed, 24);
  std::vector<double> values;
  const size_t n = c.Count(c.cfg.sensitivity_images);
  for (size_t i = 0; i < n; ++i) {
    values.push_back(MaxSensitivity(c.method, c.model, c.data.inputs[i],
                                    c.targets[i], radius,
                                    c.cfg.sensitivity_samples,
                                    DeriveSeed(s, i), c.MapSeed(i)));
  }
  return Finish(c, "sensitivity", {{"max_sensitivity", Mean(values)}},
                {c.seed, s},
                {"Perturbation radius " + std::to_string(radius) +
                 " per feature."});
}

EvalResult RunInputInvariance(const Context& c) {
  const size_t n = std::min<size_t>(c.data.size(), c.cfg.probe_count);
  std::vector<Tensor> probes(c.data.inputs.begin(), c.data.inputs.begin() + n);
  const Tensor shift = -1.0 * c.mean;
  const InvarianceResult r = InputInvarianceCheck(
      c.method, c.model, probes, shift, c.seed, c.cfg.similarity);
  return Finish(c, "input_invariance",
                {{"similarity", r.similarity},
                 {"max_logit_error", r.max_logit_error}},
                {c.seed},
                {"Inputs shifted by minus the dataset mean; the first dense "
                 "layer absorbs the shift."});
}

EvalResult RunRoar(const Context& c) {
  const size_t total = std::min<size_t>(c.data.size(), c.cfg.roar_images);
  const size_t split = total * 3 / 4;
  if (split == 0 || split == total) {
    throw Error(ErrorKind::kPrecondition, "roar needs at least 2 images");
  }
  const Dataset train = c.data.Slice(0, split);
  const Dataset test = c.data.Slice(split, total);
  const uint64_t s = DeriveSeed(c.seed, 25);
  const RoarResult r = RoarLite(c.method, c.model, train, test, c.cfg.train,
                                c.cfg.roar_fractions, c.mean, s);
  Scores scores;
  scores["baseline_accuracy"] = r.baseline_accuracy;
  for (size_t i = 0; i < r.fractions.size(); ++i) {
    char key[64];
    std::snprintf(key, sizeof(key), "%.2f", r.fractions[i]);
    scores[std::string("method_accuracy_") + key] = r.method_accuracy[i];
    scores[std::string("random_accuracy_") + key] = r.random_accuracy[i];
  }
  scores["accuracy_gap"] = r.random_accuracy.back() - r.method_accuracy.back();
  return Finish(c, "roar", std::move(scores), {c.seed, s},
                {"Gap is random-removal accuracy minus method-removal "
                 "accuracy at the largest fraction."});
}

EvalResult RunDataRandomization(const Context& c) {
  const size_t n = std::min<size_t>(c.data.size(), c.cfg.memorize_images);
  const Dataset subset = c.data.Slice(0, n);
  const uint64_t s = DeriveSeed(c.seed, 26);
  const int probes = static_cast<int>(
      std::min<size_t>(n, static_cast<size_t>(c.cfg.probe_count)));
  const DataRandomizationResult r =
      DataRandomizationTest(c.method, c.model, subset, c.cfg.train,
                            c.cfg.memorize, probes, s, c.cfg.similarity);
  std::vector<std::string> notes;
  if (r.random_label_accuracy < 0.9) {
    notes.push_back("The random-label model did not memorize its labels.");
  }
  return Finish(c, "data_randomization",
                {{"similarity", r.similarity},
                 {"true_label_accuracy", r.true_label_accuracy},
                 {"random_label_accuracy", r.random_label_accuracy}},
                {c.seed, s}, std::move(notes));
}

EvalResult RunModelRandomization(const Context& c, RandomizationMode mode) {
  const size_t n = std::min<size_t>(c.data.size(), c.cfg.probe_count);
  std::vector<Tensor> probes(c.data.inputs.begin(), c.data.inputs.begin() + n);
  std::vector<int> targets(c.targets.begin(), c.targets.begin() + n);
  const ModelRandomizationResult r =
      ModelRandomizationTest(c.method, c.model, mode, probes, targets,
                             c.cfg.randomization_seeds, c.cfg.similarity);
  Scores scores;
  scores["similarity"] = r.score;
  scores["degenerate_fraction"] = r.degenerate_fraction;
  for (size_t i = 1; i < r.depths.size(); ++i) {
    const std::string key =
        mode == RandomizationMode::kCascading
            ? "similarity_depth_" + std::to_string(i)
            : "similarity_layer_" + std::to_string(r.depths[i].layers.front());
    scores[key] = r.depths[i].similarity;
  }
  std::vector<uint64_t> seeds = {c.seed};
  seeds.insert(seeds.end(), c.cfg.randomization_seeds.begin(),
               c.cfg.randomization_seeds.end());
  const std::string id = mode == RandomizationMode::kCascading
                             ? "cascading_model_randomization"
                             : "independent_model_randomization";
  return Finish(c, id, std::move(scores), std::move(seeds),
                {mode == RandomizationMode::kCascading
                     ? "Score is the similarity with every layer randomized."
                     : "Score is the mean similarity over single-layer "
                       "randomizations."});
}

EvalResult RunRepeatability(const Context& c) {
  const uint64_t a = DeriveSeed(c.seed, 27);
  const uint64_t b = DeriveSeed(c.seed, 28);
  const int probes = static_cast<int>(
      std::min<size_t>(c.data.size(), static_cast<size_t>(c.cfg.probe_count)));
  const RepeatabilityResult r = RepeatabilityTest(
      c.method, c.model, c.data, c.cfg.train, probes, a, b, c.cfg.similarity);
  std::vector<std::string> notes;
  if (r.accuracy_gap > 0.02) {
    notes.push_back("The two trained models differ in accuracy by more than "
                    "0.02.");
  }
  return Finish(c, "repeatability",
                {{"similarity", r.similarity},
                 {"accuracy_a", r.accuracy_a},
                 {"accuracy_b", r.accuracy_b},
                 {"accuracy_gap", r.accuracy_gap}},
                {c.seed, a, b}, std::move(notes));
}

EvalResult RunMinimality(const Context& c) {
  double removable = 0.0, salient = 0.0;
  int evaluated = 0, sufficient = 0, skipped = 0;
  const size_t n = c.Count(c.cfg.minimality_images);
  for (size_t i = 0; i < n; ++i) {
    const Tensor& x = c.data.inputs[i];
    if (Predict(c.model, x)[c.targets[i]] < c.cfg.minimality_threshold) {
      ++skipped;
      continue;
    }
    const MinimalityResult r = SisMinimalityCheck(
        c.maps[i], c.model, x, c.targets[i], c.cfg.minimality_threshold,
        c.mean, c.cfg.minimality_quantile);
    ++evaluated;
    removable += static_cast<double>(r.removable_count);
    salient += static_cast<double>(r.salient_count);
    if (r.salient_confidence >= c.cfg.minimality_threshold) ++sufficient;
  }
  Scores scores;
  scores["evaluated_images"] = evaluated;
  scores["removable_count"] = removable;
  scores["mean_salient_count"] = evaluated > 0 ? salient / evaluated : 0.0;
  if (evaluated > 0) {
    scores["sufficient_fraction"] = static_cast<double>(sufficient) / evaluated;
  }
  std::vector<std::string> notes;
  if (skipped > 0) {
    notes.push_back(std::to_string(skipped) +
                    " images skipped: confidence below the threshold.");
  }
  return Finish(c, "minimality", std::move(scores), {c.seed},
                std::move(notes));
}

double MeanSparsity(const std::vector<Tensor>& maps, size_t n, int* zero) {
  std::vector<double> values;
  for (size_t i = 0; i < n; ++i) {
    if (MaxAbs(maps[i]) == 0.0) {
      ++*zero;
      continue;
    }
    values.push_back(SparsityRatio(maps[i]));
  }
  return values.empty() ? std::nan("") : Mean(values);
}

EvalResult RunSparsity(const Context& c) {
  int zero = 0;
  const double mean = MeanSparsity(c.maps, c.maps.size(), &zero);
  Scores scores;
  if (!std::isnan(mean)) scores["sparsity_ratio"] = mean;
  std::vector<std::string> notes;
  if (zero > 0)
    notes.push_back(std::to_string(zero) + " all-zero maps skipped.");
  return Finish(c, "sparsity", std::move(scores), {c.seed}, std::move(notes));
}

EvalResult RunVisualSharpening(const Context& c) {
  int zero = 0, vanilla_zero = 0;
  const double mean = MeanSparsity(c.maps, c.maps.size(), &zero);
  const double reference =
      MeanSparsity(c.vanilla, c.vanilla.size(), &vanilla_zero);
  Scores scores;
  if (!std::isnan(mean) && !std::isnan(reference)) {
    scores["sparsity_ratio"] = mean;
    scores["vanilla_sparsity_ratio"] = reference;
    scores["sparsity_gain"] = mean / reference;
  }
  return Finish(c, "visual_sharpening", std::move(scores), {c.seed},
                {"Operationalized as the sparsity-ratio gain over vanilla "
                 "gradients."});
}

EvalResult RunLocalization(const Context& c, const std::string& id) {
  const size_t n = c.Count(c.cfg.localization_images);
  std::vector<Tensor> maps(c.maps.begin(), c.maps.begin() + n);
  Scores scores;
  if (id == "pointing_game") {
    std::vector<Tensor> masks(c.data.masks.begin(), c.data.masks.begin() + n);
    scores["hit_rate"] = HitRate(maps, masks);
  } else if (id == "mean_iou") {
    std::vector<Tensor> masks(c.data.masks.begin(), c.data.masks.begin() + n);
    scores["mean_iou"] = MeanIou(maps, masks);
  } else {
    std::vector<Tensor> imp(c.data.importances.begin(),
                            c.data.importances.begin() + n);
    scores["correlation"] = LuminosityCalibration(maps, imp);
  }
  scores["images"] = static_cast<double>(n);
  return Finish(c, id, std::move(scores), {c.seed});
}

}  // namespace

BatteryConfig DefaultBatteryConfig() {
  BatteryConfig c;
  c.metrics = AllMetrics();
  c.thresholds = DefaultThresholds();
  c.train.epochs = 10;
  c.train.batch_size = 16;
  c.train.learning_rate = 0.05;
  c.train.seed = 5;
  c.memorize = c.train;
  c.memorize.epochs = 60;
  return c;
}

BatteryConfig QuickPreset(const BatteryConfig& base) {
  BatteryConfig c = base;
  c.preset = "quick";
  c.sensitivity_samples = Tenth(c.sensitivity_samples);
  c.infidelity_samples = Tenth(c.infidelity_samples);
  for (const BudgetParam& b : kBudgetParams) {
    auto& params = c.method_params[b.method];
    auto it = params.find(b.param);
    double value = 0.0;
    if (it != params.end() && std::holds_alternative<double>(it->second)) {
      value = std::get<double>(it->second);
    } else {
      for (const Hyperparameter& h : Describe(b.method).hyperparameters) {
        if (h.name == b.param) value = std::stod(h.default_value);
      }
    }
    params[b.param] = static_cast<double>(Tenth(static_cast<int>(value)));
  }
  return c;
}

ordered_json BatteryConfigToJson(const BatteryConfig& c) {
  ordered_json j;
  j["preset"] = c.preset;
  j["metrics"] = c.metrics;
  j["similarity"] = std::string(SimilarityMetricName(c.similarity));
  ordered_json thresholds = ordered_json::object();
  for (const auto& [id, spec] : c.thresholds) {
    thresholds[id] = ThresholdToJson(spec);
  }
  j["thresholds"] = thresholds;
  ordered_json params = ordered_json::object();
  for (const auto& [method, values] : c.method_params) {
    ordered_json m = ordered_json::object();
    for (const auto& [name, v] : values) m[name] = ParamToJson(v);
    params[method] = m;
  }
  j["method_params"] = params;
  j["probe_count"] = c.probe_count;
  j["randomization_seeds"] = c.randomization_seeds;
  j["deletion_step"] = c.deletion_step;
  j["deletion_images"] = c.deletion_images;
  j["sensitivity_radius"] = c.sensitivity_radius;
  j["sensitivity_samples"] = c.sensitivity_samples;
  j["sensitivity_images"] = c.sensitivity_images;
  j["infidelity_noise"] = c.infidelity_noise;
  j["infidelity_samples"] = c.infidelity_samples;
  j["infidelity_images"] = c.infidelity_images;
  j["roar_fractions"] = c.roar_fractions;
  j["roar_images"] = c.roar_images;
  j["train"] = TrainToJson(c.train);
  j["memorize"] = TrainToJson(c.memorize);
  j["memorize_images"] = c.memorize_images;
  j["minimality_threshold"] = c.minimality_threshold;
  j["minimality_quantile"] = c.minimality_quantile;
  j["minimality_images"] = c.minimality_images;
  j["localization_images"] = c.localization_images;
  j["localization_min_accuracy"] = c.localization_min_accuracy;
  j["profile"] = {{"seeds", c.profile.seeds},
                  {"probe_inputs", c.profile.probe_inputs},
                  {"sweep_inputs", c.profile.sweep_inputs},
                  {"repetitions", c.profile.repetitions}};
  return j;
}

BatteryConfig BatteryConfigFromJson(const ordered_json& j) {
  RejectUnknown(
      j,
      {"preset", "metrics", "similarity", "thresholds", "method_params",
       "probe_count", "randomization_seeds", "deletion_step",
       "deletion_images", "sensitivity_radius", "sensitivity_samples",
       "sensitivity_images", "infidelity_noise", "infidelity_samples",
       "infidelity_images", "roar_fractions", "roar_images", "train",
       "memorize", "memorize_images", "minimality_threshold",
       "minimality_quantile", "minimality_images", "localization_images",
       "localization_min_accuracy", "profile"},
      "config");
  BatteryConfig c = DefaultBatteryConfig();
  Read(j, "preset", c.preset);
  Read(j, "metrics", c.metrics);
  for (const std::string& m : c.metrics) MetricAttribute(m);
  if (j.contains("similarity")) {
    c.similarity = ParseSimilarityMetric(j.at("similarity").get<std::string>());
  }
  if (j.contains("thresholds")) {
    for (auto it = j.at("thresholds").begin(); it != j.at("thresholds").end();
         ++it) {
      MetricAttribute(it.key());
      ThresholdSpec spec = ThresholdFromJson(*it);
      spec.Validate();
      c.thresholds[it.key()] = spec;
    }
  }
  if (j.contains("method_params")) {
    for (auto m = j.at("method_params").begin();
         m != j.at("method_params").end(); ++m) {
      const MethodDescriptor& d = Describe(m.key());
      auto& params = c.method_params[m.key()];
      for (auto p = m->begin(); p != m->end(); ++p) {
        if (!d.HasHyperparameter(p.key()) && p.key().rfind("base.", 0) != 0) {
          throw Error(ErrorKind::kFormat, m.key() + " has no parameter \"" +
                                              p.key() + "\"");
        }
        if (p->is_number()) {
          params[p.key()] = p->get<double>();
        } else if (p->is_string()) {
          params[p.key()] = p->get<std::string>();
        } else {
          throw Error(ErrorKind::kFormat,
                      "method parameters must be numbers or strings");
        }
      }
    }
  }
  Read(j, "probe_count", c.probe_count);
  Read(j, "randomization_seeds", c.randomization_seeds);
  Read(j, "deletion_step", c.deletion_step);
  Read(j, "deletion_images", c.deletion_images);
  Read(j, "sensitivity_radius", c.sensitivity_radius);
  Read(j, "sensitivity_samples", c.sensitivity_samples);
  Read(j, "sensitivity_images", c.sensitivity_images);
  Read(j, "infidelity_noise", c.infidelity_noise);
  Read(j, "infidelity_samples", c.infidelity_samples);
  Read(j, "infidelity_images", c.infidelity_images);
  Read(j, "roar_fractions", c.roar_fractions);
  Read(j, "roar_images", c.roar_images);
  if (j.contains("train"))
    c.train = TrainFromJson(j.at("train"), c.train, "train");
  if (j.contains("memorize")) {
    c.memorize = TrainFromJson(j.at("memorize"), c.memorize, "memorize");
  }
  Read(j, "memorize_images", c.memorize_images);
  Read(j, "minimality_threshold", c.minimality_threshold);
  Read(j, "minimality_quantile", c.minimality_quantile);
  Read(j, "minimality_images", c.minimality_images);
  Read(j, "localization_images", c.localization_images);
  Read(j, "localization_min_accuracy", c.localization_min_accuracy);
  if (j.contains("profile")) {
    const ordered_json& p = j.at("profile");
    RejectUnknown(p, {"seeds", "probe_inputs", "sweep_inputs", "repetitions"},
                  "profile");
    Read(p, "seeds", c.profile.seeds);
    Read(p, "probe_inputs", c.profile.probe_inputs);
    Read(p, "sweep_inputs", c.profile.sweep_inputs);
    Read(p, "repetitions", c.profile.repetitions);
  }
  if (c.probe_count < 1 || c.randomization_seeds.empty()) {
    throw Error(ErrorKind::kFormat,
                "probe_count must be >= 1 and randomization_seeds non-empty");
  }
  return c;
}

BatteryConfig LoadBatteryConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ordered_json j;
  try {
    j = ordered_json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, "config " + path + ": " + e.what());
  }
  return BatteryConfigFromJson(j);
}

MethodRef ConfiguredMethod(const std::string& method_id,
                           const BatteryConfig& config, const Dataset& data) {
  Describe(method_id);
  MethodRef m{method_id, {}};
  auto it = config.method_params.find(method_id);
  if (it != config.method_params.end()) m.params.values = it->second;
  if (data.size() > 0) m.params.reference = data.FeatureMean();
  return m;
}

BatteryRun RunBattery(const std::string& method_id, const Model& model,
                      const Dataset& data, const BatteryConfig& config,
                      const BatteryOptions& options) {
  data.Validate();
  if (data.size() == 0) {
    throw Error(ErrorKind::kPrecondition, "battery needs a non-empty dataset");
  }
  const MethodRef method = ConfiguredMethod(method_id, config, data);
  MethodRef vanilla = ConfiguredMethod("vanilla_gradients", config, data);

  Context c{method, model, data, config, options.seed, data.FeatureMean(),
            {},     {},    {}};
  for (const Tensor& x : data.inputs)
    c.targets.push_back(ArgMax(Logits(model, x)));

  BatteryRun run;
  // Localization needs ground truth and a model that relies on it.
  bool localization_ok = data.has_masks() && data.has_importances();
  if (!localization_ok) {
    run.skipped.push_back(
        "perceptual correspondence: dataset has no ground-truth masks");
  } else {
    const double accuracy = Accuracy(model, data);
    if (accuracy < config.localization_min_accuracy) {
      localization_ok = false;
      run.skipped.push_back(
          "perceptual correspondence: model accuracy " +
          std::to_string(accuracy) + " below the required " +
          std::to_string(config.localization_min_accuracy));
    }
  }

  std::vector<std::string> selected;
  for (const std::string& id : config.metrics) {
    const Attribute a = MetricAttribute(id);
    if (a == Attribute::kPerceptualCorrespondence && !localization_ok) continue;
    if (id == "input_invariance") {
      try {
        AbsorbInputShift(model, Tensor(model.input_shape(), 0.0));
      } catch (const Error& e) {
        run.skipped.push_back("input_invariance: " + std::string(e.what()));
        continue;
      }
    }
    if (!config.thresholds.count(id)) {
      throw Error(ErrorKind::kFormat, "no threshold configured for " + id);
    }
    selected.push_back(id);
  }

  // Maps on the leading inputs are shared by the map-based metrics.
  int needed = 0;
  for (const std::string& id : selected) {
    if (id == "completeness" || id == "sparsity" || id == "visual_sharpening") {
      needed = std::max(needed, config.probe_count);
    }
    if (id == "deletion" || id == "insertion") {
      needed = std::max(needed, config.deletion_images);
    }
    if (id == "infidelity") needed = std::max(needed, config.infidelity_images);
    if (id == "sensitivity")
      needed = std::max(needed, config.sensitivity_images);
    if (id == "minimality") needed = std::max(needed, config.minimality_images);
    if (MetricAttribute(id) == Attribute::kPerceptualCorrespondence) {
      needed = std::max(needed, config.localization_images);
    }
  }
  const size_t map_count = std::min<size_t>(data.size(), std::max(needed, 0));
  c.maps.resize(map_count);
  const bool sharpening = std::count(selected.begin(), selected.end(),
                                     "visual_sharpening") > 0;
  if (sharpening) c.vanilla.resize(map_count);
  {
    std::vector<std::string> failures(map_count);
    std::vector<std::function<void()>> jobs;
    for (size_t i = 0; i < map_count; ++i) {
      jobs.push_back([&, i] {
        try {
          c.maps[i] = method.Run(model, data.inputs[i], c.targets[i],
                                 c.MapSeed(i)).values;
          if (sharpening) {
            c.vanilla[i] = vanilla.Run(model, data.inputs[i], c.targets[i],
                                       c.MapSeed(i)).values;
          }
        } catch (const Error& e) {
          if (!IsInapplicable(e)) throw;
          failures[i] =
              "map for input " + std::to_string(i) + ": " + e.what();
        }
      });
    }
    if (!jobs.empty()) RunJobs(jobs, options.jobs);
    for (const std::string& f : failures) {
      if (!f.empty()) {
        c.map_failure = f;
        break;
      }
    }
  }

  std::map<std::string, MetricFn> table = {
      {"completeness", RunCompleteness},
      {"deletion",
       [](const Context& x) { return RunDeletionInsertion(x, true); }},
      {"insertion",
       [](const Context& x) { return RunDeletionInsertion(x, false); }},
      {"infidelity", RunInfidelity},
      {"sensitivity", RunSensitivity},
      {"input_invariance", RunInputInvariance},
      {"roar", RunRoar},
      {"data_randomization", RunDataRandomization},
      {"cascading_model_randomization",
       [](const Context& x) {
         return RunModelRandomization(x, RandomizationMode::kCascading);
       }},
      {"independent_model_randomization",
       [](const Context& x) {
         return RunModelRandomization(x, RandomizationMode::kIndependent);
       }},
      {"repeatability", RunRepeatability},
      {"minimality", RunMinimality},
      {"sparsity", RunSparsity},
      {"visual_sharpening", RunVisualSharpening},
      {"luminosity_calibration",
       [](const Context& x) {
         return RunLocalization(x, "luminosity_calibration");
       }},
      {"mean_iou",
       [](const Context& x) { return RunLocalization(x, "mean_iou"); }},
      {"pointing_game",
       [](const Context& x) { return RunLocalization(x, "pointing_game"); }},
  };

  std::vector<std::optional<EvalResult>> results(selected.size());
  std::vector<std::string> reasons(selected.size());
  std::vector<std::function<void()>> jobs;
  for (size_t k = 0; k < selected.size(); ++k) {
    jobs.push_back([&, k] {
      if (UsesSharedMaps(selected[k]) && !c.map_failure.empty()) {
        reasons[k] = c.map_failure;
        return;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        EvalResult r = table.at(selected[k])(c);
        if (options.timing) {
          r.runtime_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        }
        results[k] = std::move(r);
      } catch (const Error& e) {
        if (!IsInapplicable(e)) throw;
        reasons[k] = e.what();
      }
    });
  }
  if (!jobs.empty()) RunJobs(jobs, options.jobs);
  for (size_t k = 0; k < selected.size(); ++k) {
    if (results[k]) {
      run.results.push_back(std::move(*results[k]));
    } else {
      run.skipped.push_back(selected[k] + ": " + reasons[k]);
    }
  }

  if (options.profile) {
    // Timing probes run after every concurrent job has finished.
    ProfileOptions p = config.profile;
    p.timing = options.timing;
    try {
      run.profile = ProfileMethod(method, model, data.inputs, p);
    } catch (const Error& e) {
      if (!IsInapplicable(e)) throw;
      run.skipped.push_back("profile: " + std::string(e.what()));
    }
  }
  return run;
}

}  // namespace salcard
