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

#include "salcard/data.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "salcard/error.h"
#include "test_util.h"

namespace salcard {
namespace {

std::string BigEndian(uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i)
    s[i] = static_cast<char>((v >> (24 - 8 * i)) & 0xff);
  return s;
}

std::string IdxImages(uint32_t count, uint32_t rows, uint32_t cols,
                      const std::string& pixels) {
  return BigEndian(0x803) + BigEndian(count) + BigEndian(rows) +
         BigEndian(cols) + pixels;
}

std::string IdxLabels(const std::string& labels) {
  return BigEndian(0x801) + BigEndian(static_cast<uint32_t>(labels.size())) +
         labels;
}

TEST(IdxTest, ParsesImagesAndLabels) {
  std::string pixels = {0, '\x7f', '\xff', 0, 0, 0, 0, 0};
  std::istringstream images(IdxImages(2, 2, 2, pixels));
  std::istringstream labels(IdxLabels(std::string{3, 9}));
  const Dataset d = LoadIdx(images, labels);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.inputs[0].shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(d.inputs[0][1], 127.0 / 255.0);
  EXPECT_EQ(d.inputs[0][2], 1.0);
  EXPECT_EQ(d.labels, (std::vector<int>{3, 9}));
  EXPECT_EQ(d.class_count, 10);
}

TEST(IdxTest, RejectsBadMagicTruncationAndLabels) {
  auto load = [](const std::string& img, const std::string& lab) {
    std::istringstream i(img), l(lab);
    return LoadIdx(i, l);
  };
  const std::string ok = IdxImages(1, 1, 2, std::string(2, '\0'));
  std::string bad_magic = ok;
  bad_magic[3] = 0x04;
  EXPECT_THROW(load(bad_magic, IdxLabels({1})), Error);
  EXPECT_THROW(load(IdxImages(1, 1, 2, "x"), IdxLabels({1})), Error);
  EXPECT_THROW(load(ok, IdxLabels({12})), Error);
  EXPECT_THROW(load(ok, IdxLabels({1, 2})), Error);
  EXPECT_NO_THROW(load(ok, IdxLabels({1})));
}

SynthConfig SmallSynth() {
  SynthConfig cfg;
  cfg.count = 40;
  cfg.image_side = 12;
  cfg.patch_side = 3;
  cfg.seed = 9;
  return cfg;
}

TEST(SynthTest, PatchLiesInsideItsLabelZone) {
  const SynthConfig cfg = SmallSynth();
  const Dataset d = SynthGroundTruth(cfg);
  d.Validate();
  ASSERT_EQ(d.size(), 40u);
  std::vector<int> per_class(cfg.class_count, 0);
  for (size_t n = 0; n < d.size(); ++n) {
    ++per_class[d.labels[n]];
    const Zone z = SynthZone(cfg, d.labels[n]);
    double area = 0.0;
    for (int r = 0; r < cfg.image_side; ++r) {
      for (int c = 0; c < cfg.image_side; ++c) {
        const size_t i = static_cast<size_t>(r) * cfg.image_side + c;
        const double m = d.masks[n][i];
        EXPECT_TRUE(m == 0.0 || m == 1.0);
        area += m;
        if (m == 1.0) {
          EXPECT_GE(r, z.row);
          EXPECT_LT(r, z.row + z.height);
          EXPECT_GE(c, z.col);
          EXPECT_LT(c, z.col + z.width);
          EXPECT_GT(d.importances[n][i], 0.0);
        } else {
          EXPECT_EQ(d.importances[n][i], 0.0);
        }
      }
    }
    EXPECT_EQ(area, cfg.patch_side * cfg.patch_side);
  }
  for (int count : per_class) EXPECT_EQ(count, 10);
}

TEST(SynthTest, ZonesAreDisjoint) {
  const SynthConfig cfg = SmallSynth();
  for (int a = 0; a < cfg.class_count; ++a) {
    for (int b = a + 1; b < cfg.class_count; ++b) {
      const Zone za = SynthZone(cfg, a), zb = SynthZone(cfg, b);
      const bool rows_overlap =
          za.row < zb.row + zb.height && zb.row < za.row + za.height;
      const bool cols_overlap =
          za.col < zb.col + zb.width && zb.col < za.col + za.width;
      EXPECT_FALSE(rows_overlap && cols_overlap);
    }
  }
}

TEST(SynthTest, SameSeedSameData) {
  const Dataset a = SynthGroundTruth(SmallSynth());
  const Dataset b = SynthGroundTruth(SmallSynth());
  EXPECT_EQ(a.inputs, b.inputs);
  SynthConfig other = SmallSynth();
  other.seed = 10;
  EXPECT_NE(SynthGroundTruth(other).inputs, a.inputs);
}

TEST(SynthTest, RejectsOversizedPatch) {
  SynthConfig cfg = SmallSynth();
  cfg.patch_side = 12;
  EXPECT_THROW(SynthGroundTruth(cfg), Error);
}

TEST(DatasetTest, RandomizeLabelsIsAPermutation) {
  const Dataset d = SynthGroundTruth(SmallSynth());
  const Dataset r = RandomizeLabels(d, 3);
  EXPECT_EQ(r.inputs, d.inputs);
  std::vector<int> a = d.labels, b = r.labels;
  EXPECT_NE(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(DatasetTest, FeatureMeanAndSlice) {
  Dataset d;
  d.class_count = 2;
  d.inputs = {Tensor::Vector({1, 2}), Tensor::Vector({3, 6})};
  d.labels = {0, 1};
  EXPECT_EQ(d.FeatureMean(), Tensor::Vector({2, 4}));
  const Dataset s = d.Slice(1, 2);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.labels[0], 1);
  EXPECT_EQ(d.Slice(1, 3).size(), 1u);
  d.labels[1] = 2;
  EXPECT_THROW(d.Validate(), Error);
}

TEST(DatasetTest, JsonRoundTripIsExact) {
  const Dataset d = SynthGroundTruth(SmallSynth());
  std::stringstream s;
  SaveDataset(d, s);
  const Dataset back = LoadDataset(s);
  EXPECT_EQ(back.inputs, d.inputs);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.masks, d.masks);
  EXPECT_EQ(back.importances, d.importances);
  EXPECT_EQ(back.class_count, d.class_count);
}

TEST(DatasetTest, LoadsFileOrDirectory) {
  testing::TempDir dir("data_path");
  const Dataset d = SynthGroundTruth(SmallSynth());
  SaveDatasetFile(d, dir.File("dataset.json"));
  EXPECT_EQ(LoadDatasetPath(dir.File("dataset.json")).inputs, d.inputs);
  EXPECT_EQ(LoadDatasetPath(dir.File("")).labels, d.labels);
  EXPECT_THROW(LoadDatasetPath(dir.File("missing.json")), Error);
}

TEST(PerturbTest, KindsBehaveAsDeclared) {
  const Tensor x = Tensor::Vector({1, 2, 3, 4});
  PerturbParams p;
  p.features = {1, 3};
  p.replacement = -1.0;
  EXPECT_EQ(Perturb(x, PerturbKind::kMaskFeatures, p, 0),
            Tensor::Vector({1, -1, 3, -1}));
  p.shift = Tensor::Vector({1, 1, 1, 1});
  EXPECT_EQ(Perturb(x, PerturbKind::kMeanShift, p, 0),
            Tensor::Vector({2, 3, 4, 5}));
  p.noise_std = 0.5;
  const Tensor a = Perturb(x, PerturbKind::kGaussianNoise, p, 4);
  EXPECT_EQ(a, Perturb(x, PerturbKind::kGaussianNoise, p, 4));
  EXPECT_NE(a, x);
  p.noise_std = 0.0;
  EXPECT_EQ(Perturb(x, PerturbKind::kGaussianNoise, p, 4), x);
  EXPECT_THROW(MaskFeatures(x, {7}, Tensor({4})), Error);
}

}  // namespace
}  // namespace salcard
