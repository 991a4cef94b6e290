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

#include <gtest/gtest.h>

#include "salcard/error.h"
#include "salcard/evaluation.h"
#include "salcard/fixtures.h"
#include "test_util.h"

namespace salcard {
namespace {

TEST(SparsityTest, MaxOverMean) {
  EXPECT_DOUBLE_EQ(SparsityRatio(Tensor::Vector({1, -1, 1, -1})), 1.0);
  EXPECT_DOUBLE_EQ(SparsityRatio(Tensor::Vector({4, 0, 0, 0})), 4.0);
  EXPECT_DOUBLE_EQ(SparsityRatio(Tensor::Vector({-3, 1, 0, 0})), 3.0);
  try {
    SparsityRatio(Tensor({5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

// Property: the ratio lies in [1, n] and ignores scale and sign.
TEST(SparsityTest, BoundsAndInvariance) {
  for (uint64_t s = 0; s < 20; ++s) {
    const Tensor m = testing::RandomTensor({7, 3}, s);
    const double r = SparsityRatio(m);
    EXPECT_GE(r, 1.0);
    EXPECT_LE(r, 21.0);
    EXPECT_NEAR(SparsityRatio(-2.5 * m), r, 1e-12);
  }
}

TEST(SalientFeaturesTest, QuantileCutIncludesTiesAndSkipsZeros) {
  const Tensor m = Tensor::Vector({0.5, -3, 3, 0, 1, 0});
  EXPECT_EQ(SalientFeatures(m, 0.1), (std::vector<size_t>{1, 2}));
  EXPECT_EQ(SalientFeatures(m, 0.5), (std::vector<size_t>{1, 2, 4}));
  EXPECT_EQ(SalientFeatures(m, 1.0), (std::vector<size_t>{0, 1, 2, 4}));
}

TEST(MinimalityTest, CountsFeaturesThatCanBeDropped) {
  // Logit gap equals x0 + x1; with tau = 0.5 a feature is removable iff
  // the other keeps the gap positive.
  Layer dense = DenseLayer(2, 2);
  dense.weights = Tensor({2, 2}, {1, 1, 0, 0});
  const Model m({2}, 2, {dense});
  const Tensor x = Tensor::Vector({2, 3});
  const MinimalityResult r =
      SisMinimalityCheck(Tensor::Vector({1, 1}), m, x, 0, 0.5, Tensor({2}),
                         1.0);
  EXPECT_EQ(r.salient_count, 2u);
  EXPECT_EQ(r.removable_count, 2u);
  EXPECT_DOUBLE_EQ(r.salient_confidence, Predict(m, x)[0]);
  const MinimalityResult tight =
      SisMinimalityCheck(Tensor::Vector({1, 1}), m, x, 0, 0.99, Tensor({2}),
                         1.0);
  EXPECT_EQ(tight.removable_count, 0u);
  EXPECT_THROW(SisMinimalityCheck(Tensor::Vector({1, 1}), m, x, 0, 0.9999,
                                  Tensor({2}), 1.0),
               Error);
}

TEST(LocalizationTest, PointingGameAndIou) {
  const Tensor mask({2, 3}, {0, 1, 1, 0, 0, 0});
  EXPECT_TRUE(PointingGame(Tensor({2, 3}, {0, 5, 1, 0, 0, 0}), mask));
  EXPECT_FALSE(PointingGame(Tensor({2, 3}, {9, 5, 1, 0, 0, 0}), mask));
  EXPECT_DOUBLE_EQ(MeanIou(Tensor({2, 3}, {0, 5, 4, 0, 0, 0}), mask), 1.0);
  // Top-2 = {0, 1}: overlap 1, union 3.
  EXPECT_DOUBLE_EQ(MeanIou(Tensor({2, 3}, {9, 5, 1, 0, 0, 0}), mask),
                   1.0 / 3.0);
  EXPECT_DOUBLE_EQ(
      HitRate({Tensor({2, 3}, {0, 5, 1, 0, 0, 0}),
               Tensor({2, 3}, {9, 5, 1, 0, 0, 0})},
              {mask, mask}),
      0.5);
  EXPECT_THROW(PointingGame(Tensor({2, 3}), Tensor({2, 3}, 0.5)), Error);
}

TEST(LocalizationTest, LuminosityIsPooledSpearmanOfNormalizedMaps) {
  const std::vector<Tensor> maps = {Tensor::Vector({2, 4, 0}),
                                    Tensor::Vector({10, 5, 0})};
  const std::vector<Tensor> imp = {Tensor::Vector({1, 2, 0}),
                                   Tensor::Vector({2, 1, 0})};
  const double want = SpearmanCorrelation({0.5, 1, 0, 1, 0.5, 0},
                                          {1, 2, 0, 2, 1, 0});
  EXPECT_DOUBLE_EQ(LuminosityCalibration(maps, imp), want);
  EXPECT_NEAR(want, 1.0, 1e-12);
}

}  // namespace
}  // namespace salcard
