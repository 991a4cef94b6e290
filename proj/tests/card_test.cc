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

#include "salcard/card.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "salcard/battery.h"
#include "salcard/error.h"

namespace salcard {
namespace {

using nlohmann::ordered_json;

EvalResult Result(const std::string& metric, Attribute a, double score) {
  return Conclude(metric, a, {{"s", score}},
                  MakeThreshold("s", CompareOp::kGreaterEqual, 0.8,
                                CompareOp::kLessEqual, 0.2),
                  {1});
}

size_t Count(const std::string& text, const std::string& needle) {
  size_t n = 0;
  for (size_t p = text.find(needle); p != std::string::npos;
       p = text.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

TEST(VocabularyTest, ImplementedRowsAreTheBatteryMetrics) {
  const std::vector<MetricInfo>& v = MetricVocabulary();
  EXPECT_EQ(v.size(), 33u);
  std::set<std::string> implemented, ids;
  for (const MetricInfo& m : v) {
    EXPECT_TRUE(ids.insert(m.metric_id).second) << m.metric_id;
    EXPECT_FALSE(m.citation.empty()) << m.metric_id;
    if (m.implemented) implemented.insert(m.metric_id);
  }
  const std::vector<std::string> battery = DefaultBatteryConfig().metrics;
  EXPECT_EQ(implemented, std::set<std::string>(battery.begin(), battery.end()));
  EXPECT_EQ(FindMetric("nope"), nullptr);
}

TEST(CardTest, EmptyCardListsAllTenAttributes) {
  const SaliencyCard card = BuildCard(Describe("integrated_gradients"), {}, {});
  const std::string md = RenderMarkdown(card);
  EXPECT_EQ(md.rfind("# ", 0), 0u);
  EXPECT_EQ(Count(md, "\n### "), 10u);
  EXPECT_EQ(Count(md, "Not yet evaluated."), 5u);
  const std::vector<std::string> order = {
      "## Summary", "## References", "## Methodology",
      "## Sensitivity Testing", "## Perceptibility Testing", "## Caveats"};
  size_t last = 0;
  for (const std::string& h : order) {
    const size_t at = md.find("\n" + h + "\n");
    ASSERT_NE(at, std::string::npos) << h;
    EXPECT_GT(at, last) << h;
    last = at;
  }
  EXPECT_TRUE(ValidateCard(md).empty());
  EXPECT_TRUE(ValidateCard(RenderJson(card)).empty());
  EXPECT_FALSE(card.caveats.empty());
}

TEST(CardTest, GradCamCardCarriesDescriptorText) {
  const std::string md =
      RenderMarkdown(BuildCard(Describe("grad_cam"), {}, {}));
  EXPECT_NE(md.find("Requires a differentiable model"), std::string::npos);
}

TEST(CardTest, ResultsRouteBySectionAndRoundTrip) {
  std::vector<EvalResult> results = {
      Result("sparsity", Attribute::kMinimality, 0.9),
      Result("deletion", Attribute::kInputSensitivity, 0.1),
      Result("data_randomization", Attribute::kLabelSensitivity, 0.5),
      Result("pointing_game", Attribute::kPerceptualCorrespondence, 0.95),
      Result("repeatability", Attribute::kModelSensitivity, 0.85)};
  results[0].notes = {"first", "second"};
  Provenance prov;
  prov.preset = "quick";
  prov.seed = 7;
  SaliencyCard card =
      BuildCard(Describe("vanilla_gradients"), {}, results, prov);
  card.caveats.push_back("z caveat");
  card.caveats.push_back("a caveat");
  ASSERT_EQ(card.minimality.size(), 1u);
  EXPECT_EQ(card.minimality[0].metric_id, "sparsity");
  EXPECT_EQ(card.input_sensitivity.size(), 1u);
  EXPECT_EQ(card.label_sensitivity.size(), 1u);
  EXPECT_EQ(card.model_sensitivity.size(), 1u);
  EXPECT_EQ(card.perceptual_correspondence.size(), 1u);
  const std::string json = RenderJson(card);
  const ordered_json j = ordered_json::parse(json);
  EXPECT_EQ(j["perceptibility"]["minimality"][0]["metric_id"], "sparsity");
  EXPECT_EQ(j["provenance"]["preset"], "quick");
  const SaliencyCard back = ParseCardJson(json);
  EXPECT_EQ(back, card);
  EXPECT_EQ(RenderJson(back), json);
  EXPECT_EQ(RenderMarkdown(back), RenderMarkdown(card));
  EXPECT_TRUE(ValidateCard(json).empty());
  EXPECT_TRUE(ValidateCard(RenderMarkdown(card)).empty());
}

TEST(CardTest, BuildRejectsUnknownMetricAndWrongAttribute) {
  try {
    BuildCard(Describe("rise"), {},
              {Result("made_up", Attribute::kMinimality, 0.5)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kVocabulary);
  }
  EXPECT_THROW(BuildCard(Describe("rise"), {},
                         {Result("sparsity", Attribute::kLabelSensitivity,
                                 0.5)}),
               Error);
}

class ValidatorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    card_ = ordered_json::parse(RenderJson(BuildCard(
        Describe("smoothgrad"), {},
        {Result("sparsity", Attribute::kMinimality, 0.9)})));
  }
  std::vector<std::string> Lint() const { return ValidateCard(card_.dump()); }
  ordered_json card_;
};

TEST_F(ValidatorTest, MissingMethodologyField) {
  card_["methodology"].erase("semantic_directness");
  const std::vector<std::string> v = Lint();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("semantic_directness"), std::string::npos);
}

TEST_F(ValidatorTest, VerdictOutsideVocabulary) {
  card_["perceptibility"]["minimality"][0]["verdict"] = "maybe";
  const std::vector<std::string> v = Lint();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("{pass, fail, inconclusive}"), std::string::npos);
}

TEST_F(ValidatorTest, VerdictWithoutThreshold) {
  card_["perceptibility"]["minimality"][0].erase("threshold_spec");
  const std::vector<std::string> v = Lint();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("threshold_spec"), std::string::npos);
}

TEST_F(ValidatorTest, UnknownMetricAndWrongSection) {
  card_["perceptibility"]["minimality"][0]["metric_id"] = "vibes";
  EXPECT_EQ(Lint().size(), 1u);
  ordered_json moved = card_["perceptibility"]["minimality"][0];
  moved["metric_id"] = "sparsity";
  card_["perceptibility"]["minimality"] = ordered_json::array();
  card_["sensitivity"]["input"].push_back(moved);
  // Both the metric placement and the attribute field disagree.
  const std::vector<std::string> v = Lint();
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NE(v[0].find("wrong attribute"), std::string::npos);
  EXPECT_NE(v[1].find("disagrees with section"), std::string::npos);
}

TEST_F(ValidatorTest, MissingSectionAndMalformedText) {
  card_["sensitivity"].erase("label");
  EXPECT_EQ(Lint().size(), 1u);
  EXPECT_FALSE(ValidateCard("{\"schema_version\": ").empty());
  EXPECT_FALSE(ValidateCard("# Title only\n").empty());
}

TEST(ParseTest, MalformedJsonReportsPosition) {
  try {
    ParseCardJson("{\n  \"schema_version\": 1,\n  oops\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos)
        << e.what();
  }
}

TEST(MatrixTest, CellAlgebra) {
  SaliencyCard a = BuildCard(
      Describe("vanilla_gradients"), {},
      {Result("deletion", Attribute::kInputSensitivity, 0.9),
       Result("deletion", Attribute::kInputSensitivity, 0.95),
       Result("sparsity", Attribute::kMinimality, 0.9),
       Result("sparsity", Attribute::kMinimality, 0.1),
       Result("mean_iou", Attribute::kPerceptualCorrespondence, 0.9),
       Result("mean_iou", Attribute::kPerceptualCorrespondence, 0.5)});
  const ComparisonMatrix m = CompareMatrix({a}, MatrixScope::kEvaluations);
  ASSERT_EQ(m.columns.size(), 1u);
  auto cell = [&](const std::string& id) {
    const auto it = std::find(m.rows.begin(), m.rows.end(), id);
    return m.cells[it - m.rows.begin()][0];
  };
  EXPECT_EQ(cell("deletion"), "✓");
  EXPECT_EQ(cell("sparsity"), "✗");
  EXPECT_EQ(cell("mean_iou"), "—");
  EXPECT_EQ(cell("roar"), "");
}

TEST(MatrixTest, CellsCoverMetricsTimesMethods) {
  const SaliencyCard a =
      BuildCard(Describe("vanilla_gradients"), {},
                {Result("deletion", Attribute::kInputSensitivity, 0.9)});
  const SaliencyCard b =
      BuildCard(Describe("rise"), {},
                {Result("sparsity", Attribute::kMinimality, 0.5)});
  const ComparisonMatrix m = CompareMatrix({a, b}, MatrixScope::kEvaluations);
  EXPECT_EQ(m.rows.size(), MetricVocabulary().size());
  size_t marks = 0, blanks = 0;
  for (const auto& row : m.cells) {
    ASSERT_EQ(row.size(), 2u);
    for (const std::string& c : row) {
      if (c.empty()) {
        ++blanks;
      } else {
        EXPECT_TRUE(c == "✓" || c == "✗" || c == "—");
        ++marks;
      }
    }
  }
  EXPECT_EQ(marks, 2u);
  EXPECT_EQ(marks + blanks, m.rows.size() * 2);
  const std::string md = m.ToMarkdown();
  EXPECT_NE(md.find("| vanilla_gradients | rise |"), std::string::npos);
  EXPECT_EQ(m.ToJson()["rows"].size(), m.rows.size());
  const ComparisonMatrix meth =
      CompareMatrix({a, b}, MatrixScope::kMethodology);
  EXPECT_EQ(meth.rows.size(), 5u);
  EXPECT_THROW(CompareMatrix({}, MatrixScope::kEvaluations), Error);
}

}  // namespace
}  // namespace salcard
