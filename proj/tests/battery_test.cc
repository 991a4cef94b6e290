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

#include <gtest/gtest.h>

#include <algorithm>

#include "salcard/card.h"
#include "salcard/error.h"
#include "salcard/fixtures.h"
#include "test_util.h"

namespace salcard {
namespace {

using nlohmann::ordered_json;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::kParse;
}

TEST(BatteryConfigTest, ShippedDefaultsMatchCode) {
  const ordered_json shipped = ordered_json::parse(
      testing::Slurp(std::string(SALCARD_SOURCE_DIR) + "/config/battery.json"));
  EXPECT_EQ(shipped, BatteryConfigToJson(DefaultBatteryConfig()));
  EXPECT_EQ(BatteryConfigToJson(LoadBatteryConfigFile(
                std::string(SALCARD_SOURCE_DIR) + "/config/battery.json")),
            shipped);
}

TEST(BatteryConfigTest, JsonRoundTrip) {
  BatteryConfig c = QuickPreset(DefaultBatteryConfig());
  c.metrics = {"sparsity", "deletion"};
  c.method_params["occlusion"]["replacement"] = std::string("zero");
  c.thresholds["sparsity"].guards.push_back(
      {"sparsity_ratio", CompareOp::kGreater, 0.0});
  const ordered_json j = BatteryConfigToJson(c);
  EXPECT_EQ(BatteryConfigToJson(BatteryConfigFromJson(j)), j);
}

TEST(BatteryConfigTest, PartialConfigKeepsDefaults) {
  const BatteryConfig c =
      BatteryConfigFromJson(ordered_json::parse("{\"probe_count\": 3}"));
  EXPECT_EQ(c.probe_count, 3);
  EXPECT_EQ(c.deletion_images, DefaultBatteryConfig().deletion_images);
  EXPECT_EQ(c.thresholds, DefaultBatteryConfig().thresholds);
}

TEST(BatteryConfigTest, RejectsUnknownOrInvalidEntries) {
  EXPECT_EQ(KindOf([] {
              BatteryConfigFromJson(ordered_json::parse("{\"probes\": 3}"));
            }),
            ErrorKind::kFormat);
  EXPECT_EQ(KindOf([] {
              BatteryConfigFromJson(
                  ordered_json::parse("{\"metrics\": [\"vibes\"]}"));
            }),
            ErrorKind::kVocabulary);
  EXPECT_EQ(KindOf([] {
              BatteryConfigFromJson(ordered_json::parse(
                  "{\"method_params\": {\"rise\": {\"masks\": 3}}}"));
            }),
            ErrorKind::kFormat);
  EXPECT_EQ(KindOf([] {
              BatteryConfigFromJson(ordered_json::parse(
                  "{\"train\": {\"epochs\": 0}}"));
            }),
            ErrorKind::kPrecondition);
  EXPECT_EQ(KindOf([] {
              BatteryConfigFromJson(ordered_json::parse(R"({"thresholds":
                {"sparsity": {"pass_if": {"score": "x", "op": ">", "value": 1},
                 "fail_if": {"score": "x", "op": ">", "value": 2}}}})"));
            }),
            ErrorKind::kPrecondition);
  EXPECT_EQ(KindOf([] { LoadBatteryConfigFile("/nonexistent/cfg.json"); }),
            ErrorKind::kFormat);
}

TEST(BatteryConfigTest, QuickPresetShrinksMonteCarloBudgets) {
  const BatteryConfig base = DefaultBatteryConfig();
  const BatteryConfig q = QuickPreset(base);
  EXPECT_EQ(q.preset, "quick");
  EXPECT_EQ(q.infidelity_samples, base.infidelity_samples / 10);
  EXPECT_EQ(q.sensitivity_samples, base.sensitivity_samples / 10);
  EXPECT_EQ(std::get<double>(q.method_params.at("rise").at("mask_count")),
            100.0);
  EXPECT_EQ(std::get<double>(q.method_params.at("lime").at("sample_count")),
            100.0);
  EXPECT_EQ(std::get<double>(
                q.method_params.at("kernel_shap").at("coalition_budget")),
            205.0);
  EXPECT_EQ(std::get<double>(q.method_params.at("smoothgrad").at("samples")),
            3.0);
  EXPECT_EQ(q.probe_count, base.probe_count);
}

BatteryConfig TinyConfig() {
  BatteryConfig c = QuickPreset(DefaultBatteryConfig());
  c.probe_count = 4;
  c.deletion_images = 4;
  c.sensitivity_images = 2;
  c.infidelity_images = 2;
  c.roar_images = 40;
  c.memorize_images = 20;
  c.minimality_images = 4;
  c.localization_images = 8;
  c.localization_min_accuracy = 0.0;
  c.train.epochs = 4;
  c.memorize.epochs = 8;
  c.profile.repetitions = 3;
  return c;
}

Dataset TinyData() {
  SynthConfig s;
  s.count = 48;
  s.image_side = 8;
  s.patch_side = 2;
  s.seed = 5;
  return SynthGroundTruth(s);
}

Model TinyModel(const Dataset& d) {
  TrainConfig t;
  t.epochs = 10;
  t.seed = 2;
  return Train(InitializeParameters(MlpArch(8, 16, 4), 1), d, t).model;
}

TEST(RunBatteryTest, VerdictsFollowThresholdsAndCardValidates) {
  const Dataset d = TinyData();
  const Model m = TinyModel(d);
  BatteryOptions o;
  o.seed = 3;
  o.timing = false;
  const BatteryRun run = RunBattery("vanilla_gradients", m, d, TinyConfig(), o);
  EXPECT_EQ(run.results.size(), DefaultBatteryConfig().metrics.size());
  EXPECT_TRUE(run.skipped.empty());
  for (const EvalResult& r : run.results) {
    EXPECT_EQ(r.verdict, r.threshold_spec.Apply(r.scores)) << r.metric_id;
    EXPECT_EQ(r.runtime_seconds, 0.0);
    EXPECT_FALSE(r.seeds.empty());
  }
  ASSERT_TRUE(run.profile.has_value());
  const SaliencyCard card =
      BuildCard(Describe("vanilla_gradients"), run.profile, run.results);
  for (Attribute a :
       {Attribute::kInputSensitivity, Attribute::kLabelSensitivity,
        Attribute::kModelSensitivity, Attribute::kMinimality,
        Attribute::kPerceptualCorrespondence}) {
    EXPECT_FALSE(card.Section(a).empty()) << AttributeName(a);
  }
  EXPECT_TRUE(ValidateCard(RenderJson(card)).empty());
  EXPECT_TRUE(ValidateCard(RenderMarkdown(card)).empty());
}

TEST(RunBatteryTest, JobsDoNotChangeResults) {
  const Dataset d = TinyData();
  const Model m = TinyModel(d);
  BatteryConfig c = TinyConfig();
  c.metrics = {"deletion", "sensitivity", "sparsity", "roar",
               "cascading_model_randomization"};
  BatteryOptions serial;
  serial.timing = false;
  serial.profile = false;
  BatteryOptions parallel = serial;
  parallel.jobs = 3;
  const BatteryRun a = RunBattery("smoothgrad", m, d, c, serial);
  const BatteryRun b = RunBattery("smoothgrad", m, d, c, parallel);
  EXPECT_EQ(a.results, b.results);
  EXPECT_FALSE(a.profile.has_value());
}

TEST(RunBatteryTest, SkipsWhatTheSetupCannotSupport) {
  Dataset d = TinyData();
  d.masks.clear();
  d.importances.clear();
  const Model cnn = InitializeParameters(CnnArch(8, 4), 1);
  BatteryConfig c = TinyConfig();
  c.metrics = {"input_invariance", "pointing_game", "sparsity"};
  BatteryOptions o;
  o.timing = false;
  o.profile = false;
  const BatteryRun run = RunBattery("vanilla_gradients", cnn, d, c, o);
  ASSERT_EQ(run.results.size(), 1u);
  EXPECT_EQ(run.results[0].metric_id, "sparsity");
  EXPECT_EQ(run.skipped.size(), 2u);
}

TEST(RunBatteryTest, InapplicableMetricsBecomeSkipsNotErrors) {
  // An untrained model is never confident enough for SIS.
  const Dataset d = TinyData();
  const Model m = InitializeParameters(MlpArch(8, 16, 4), 1);
  BatteryConfig c = TinyConfig();
  c.metrics = {"sparsity", "deletion"};
  BatteryOptions o;
  o.timing = false;
  const BatteryRun run = RunBattery("sis", m, d, c, o);
  EXPECT_TRUE(run.results.empty());
  ASSERT_EQ(run.skipped.size(), 3u);
  EXPECT_EQ(run.skipped[0].rfind("sparsity: map for input 0", 0), 0u)
      << run.skipped[0];
  EXPECT_EQ(run.skipped[1].rfind("deletion: ", 0), 0u);
  EXPECT_EQ(run.skipped[2].rfind("profile: ", 0), 0u);
  for (const std::string& s : run.skipped) {
    EXPECT_NE(s.find("not confidently classified"), std::string::npos) << s;
  }
  EXPECT_FALSE(run.profile.has_value());
  SaliencyCard card = BuildCard(Describe("sis"), run.profile, run.results);
  for (const std::string& s : run.skipped) {
    card.caveats.push_back("Not evaluated: " + s + ".");
  }
  EXPECT_TRUE(ValidateCard(RenderJson(card)).empty());

  c.metrics = {"sparsity"};
  try {
    RunBattery("grad_cam", m, d, c, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedArchitecture);
  }
}

}  // namespace
}  // namespace salcard
