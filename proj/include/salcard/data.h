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

#ifndef SALCARD_DATA_H_
#define SALCARD_DATA_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "salcard/tensor.h"

namespace salcard {

// Inputs with labels and, for synthetic sets, binary ground-truth masks and
// per-feature importances. `masks` and `importances` are either empty or
// parallel to `inputs`.
struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::vector<Tensor> masks;
  std::vector<Tensor> importances;
  int class_count = 0;

  size_t size() const { return inputs.size(); }
  bool has_masks() const { return !masks.empty(); }
  bool has_importances() const { return !importances.empty(); }

  // Checks list lengths, label range, shapes and mask binariness.
  void Validate() const;

  // Per-feature mean over all inputs.
  Tensor FeatureMean() const;

  // Examples [begin, min(end, size())).
  Dataset Slice(size_t begin, size_t end) const;
};

// IDX (MNIST) images (magic 0x00000803) and labels (magic 0x00000801).
// Pixels are scaled to [0, 1]; labels must lie in [0, 10).
Dataset LoadIdx(std::istream& images, std::istream& labels);
Dataset LoadIdxFiles(const std::string& images_path,
                     const std::string& labels_path);

struct SynthConfig {
  int count = 400;
  int image_side = 16;
  int patch_side = 4;
  int class_count = 4;
  double noise_std = 0.1;
  uint64_t seed = 0;
};

// The image is split into one zone per class; each image carries a bump
// shaped patch at a random position inside the zone of its label, on top of
// zero-mean Gaussian noise. The mask marks the patch, the importance is the
// bump height there and zero elsewhere.
Dataset SynthGroundTruth(const SynthConfig& cfg);

// Zone (row0, col0, rows, cols) of class c in a synthetic image.
struct Zone {
  int row = 0, col = 0, height = 0, width = 0;
};
Zone SynthZone(const SynthConfig& cfg, int label);

// Uniform random permutation of the labels; inputs are untouched.
Dataset RandomizeLabels(const Dataset& data, uint64_t seed);

enum class PerturbKind { kGaussianNoise, kMeanShift, kMaskFeatures };

// Scalar or per-feature fill value.
using Fill = std::variant<double, Tensor>;

Tensor FillTensor(const Fill& fill, const Shape& shape);

struct PerturbParams {
  double noise_std = 0.0;             // gaussian_noise
  Tensor shift;                       // mean_shift, same shape as the input
  std::vector<size_t> features;       // mask_features
  Fill replacement = 0.0;             // mask_features
};

Tensor Perturb(const Tensor& input, PerturbKind kind,
               const PerturbParams& params, uint64_t seed);

// Sets the listed features to the replacement; all others are copied.
Tensor MaskFeatures(const Tensor& input, const std::vector<size_t>& features,
                    const Tensor& replacement);

// JSON export: {"version": 1, "class_count", "shape", "labels", "inputs":
// [base64...], "masks"?: [...], "importances"?: [...]}.
void SaveDataset(const Dataset& data, std::ostream& out);
Dataset LoadDataset(std::istream& in);
void SaveDatasetFile(const Dataset& data, const std::string& path);
// Accepts a dataset JSON file, or a directory holding dataset.json or a pair
// of IDX files (*images*idx3* and *labels*idx1*).
Dataset LoadDatasetPath(const std::string& path);

}  // namespace salcard

#endif  // SALCARD_DATA_H_
