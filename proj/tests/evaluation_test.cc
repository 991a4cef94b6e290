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

#include "salcard/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard {
namespace {

// Average rank by counting: rank = #less + (#equal + 1) / 2.
std::vector<double> CountingRanks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double TextbookPearson(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  return (n * sab - sa * sb) /
         std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

TEST(CorrelationTest, RanksMatchCountingOracle) {
  const std::vector<double> v = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5};
  EXPECT_EQ(AverageRanks(v), CountingRanks(v));
}

TEST(CorrelationTest, MatchesTextbookFormulas) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(30), b(30);
    for (int i = 0; i < 30; ++i) {
      a[i] = std::round(rng.Uniform(0, 10));
      b[i] = a[i] + rng.Normal(0, 3);
    }
    EXPECT_NEAR(PearsonCorrelation(a, b), TextbookPearson(a, b), 1e-12);
    EXPECT_NEAR(SpearmanCorrelation(a, b),
                TextbookPearson(CountingRanks(a), CountingRanks(b)), 1e-12);
  }
}

TEST(CorrelationTest, ConstantInputsScoreZero) {
  EXPECT_EQ(PearsonCorrelation({1, 1, 1}, {1, 2, 3}), 0.0);
  EXPECT_EQ(SpearmanCorrelation({1, 2, 3}, {4, 4, 4}), 0.0);
  EXPECT_TRUE(IsConstantMagnitude(Tensor::Vector({2, -2, 2})));
  EXPECT_FALSE(IsConstantMagnitude(Tensor::Vector({2, -1, 2})));
}

TEST(CorrelationTest, SimilarityUsesMagnitudes) {
  const Tensor a = Tensor::Vector({1, -2, 3, -4});
  EXPECT_NEAR(SaliencySimilarity(a, Abs(a)), 1.0, 1e-15);
  EXPECT_NEAR(SaliencySimilarity(a, Tensor::Vector({4, 3, 2, 1})), -1.0,
              1e-15);
  EXPECT_NEAR(SaliencySimilarity(a, 3.0 * a, SimilarityMetric::kPearson), 1.0,
              1e-15);
  EXPECT_THROW(SaliencySimilarity(a, Tensor({3})), Error);
}

TEST(VerdictTest, VocabularyIsClosed) {
  for (Verdict v : {Verdict::kPass, Verdict::kFail, Verdict::kInconclusive}) {
    EXPECT_EQ(ParseVerdict(VerdictName(v)), v);
  }
  try {
    ParseVerdict("maybe");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kVocabulary);
  }
  for (CompareOp op : {CompareOp::kLess, CompareOp::kLessEqual,
                       CompareOp::kGreater, CompareOp::kGreaterEqual}) {
    EXPECT_EQ(ParseCompareOp(CompareOpSymbol(op)), op);
  }
  for (Attribute a :
       {Attribute::kInputSensitivity, Attribute::kLabelSensitivity,
        Attribute::kModelSensitivity, Attribute::kMinimality,
        Attribute::kPerceptualCorrespondence}) {
    EXPECT_EQ(ParseAttribute(AttributeName(a)), a);
  }
}

TEST(ThresholdTest, RegionsAndGuards) {
  ThresholdSpec spec = MakeThreshold("s", CompareOp::kLess, 0.2,
                                     CompareOp::kGreater, 0.6);
  EXPECT_EQ(spec.Apply({{"s", 0.1}}), Verdict::kPass);
  EXPECT_EQ(spec.Apply({{"s", 0.2}}), Verdict::kInconclusive);
  EXPECT_EQ(spec.Apply({{"s", 0.7}}), Verdict::kFail);
  EXPECT_EQ(spec.Apply({{"other", 0.1}}), Verdict::kInconclusive);
  spec.guards.push_back({"g", CompareOp::kGreaterEqual, 0.9});
  EXPECT_EQ(spec.Apply({{"s", 0.1}, {"g", 0.95}}), Verdict::kPass);
  EXPECT_EQ(spec.Apply({{"s", 0.1}, {"g", 0.5}}), Verdict::kInconclusive);
  EXPECT_EQ(spec.Apply({{"s", 0.1}}), Verdict::kInconclusive);
}

TEST(ThresholdTest, ValidateRejectsOverlapAndMixedScores) {
  EXPECT_NO_THROW(MakeThreshold("s", CompareOp::kLess, 0.2,
                                CompareOp::kGreaterEqual, 0.2)
                      .Validate());
  EXPECT_THROW(MakeThreshold("s", CompareOp::kLessEqual, 0.2,
                             CompareOp::kGreaterEqual, 0.2)
                   .Validate(),
               Error);
  EXPECT_THROW(MakeThreshold("s", CompareOp::kLess, 0.5,
                             CompareOp::kGreater, 0.3)
                   .Validate(),
               Error);
  EXPECT_THROW(MakeThreshold("s", CompareOp::kLess, 0.5,
                             CompareOp::kLess, 0.3)
                   .Validate(),
               Error);
  ThresholdSpec mixed = MakeThreshold("s", CompareOp::kLess, 0.2,
                                      CompareOp::kGreater, 0.6);
  mixed.fail_if.score = "t";
  EXPECT_THROW(mixed.Validate(), Error);
}

// Property: for a valid spec no score value is both pass and fail.
TEST(ThresholdTest, PassAndFailNeverBothHold) {
  const ThresholdSpec spec = MakeThreshold("s", CompareOp::kGreaterEqual, 0.8,
                                           CompareOp::kLessEqual, 0.5);
  for (double v = -1.0; v <= 2.0; v += 0.01) {
    const Scores s = {{"s", v}};
    EXPECT_FALSE(spec.pass_if.Holds(s) && spec.fail_if.Holds(s));
  }
}

TEST(EvalResultTest, ConcludeAndJsonRoundTrip) {
  ThresholdSpec spec = MakeThreshold("gap", CompareOp::kLess, 0.01,
                                     CompareOp::kGreater, 0.1);
  spec.guards.push_back({"n", CompareOp::kGreaterEqual, 1.0});
  EvalResult r = Conclude("completeness", Attribute::kInputSensitivity,
                          {{"gap", 0.001}, {"n", 3.0}}, spec, {7, 8});
  EXPECT_EQ(r.verdict, Verdict::kPass);
  r.runtime_seconds = 0.125;
  r.notes = {"a note"};
  const EvalResult back = EvalResultFromJson(EvalResultToJson(r));
  EXPECT_EQ(back, r);
  EXPECT_THROW(Conclude("x", Attribute::kMinimality,
                        {{"gap", std::numeric_limits<double>::infinity()}},
                        spec, {}),
               Error);
  nlohmann::ordered_json j = EvalResultToJson(r);
  j.erase("threshold_spec");
  EXPECT_THROW(EvalResultFromJson(j), Error);
}

}  // namespace
}  // namespace salcard
