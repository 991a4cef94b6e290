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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "salcard/encoding.h"
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard {

using nlohmann::json;

void Dataset::Validate() const {
  if (labels.size() != inputs.size()) {
    throw Error(ErrorKind::kShape, "labels and inputs differ in length");
  }
  if (!masks.empty() && masks.size() != inputs.size()) {
    throw Error(ErrorKind::kShape, "masks and inputs differ in length");
  }
  if (!importances.empty() && importances.size() != inputs.size()) {
    throw Error(ErrorKind::kShape, "importances and inputs differ in length");
  }
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].shape() != inputs.front().shape()) {
      throw Error(ErrorKind::kShape, "input " + std::to_string(i) +
                                         " has a different shape");
    }
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw Error(ErrorKind::kIndex, "label " + std::to_string(labels[i]) +
                                         " outside [0, " +
                                         std::to_string(class_count) + ")");
    }
    if (!masks.empty()) {
      RequireSameShape(masks[i], inputs[i], "mask");
      double area = 0.0;
      for (double v : masks[i].values()) {
        if (v != 0.0 && v != 1.0) {
          throw Error(ErrorKind::kFormat, "mask " + std::to_string(i) +
                                              " is not binary");
        }
        area += v;
      }
      if (area == 0.0) {
        throw Error(ErrorKind::kFormat, "mask " + std::to_string(i) +
                                            " is empty");
      }
    }
    if (!importances.empty()) {
      RequireSameShape(importances[i], inputs[i], "importance");
    }
  }
}

Tensor Dataset::FeatureMean() const {
  if (inputs.empty()) throw Error(ErrorKind::kPrecondition, "empty dataset");
  std::vector<double> acc(inputs.front().size(), 0.0);
  for (const Tensor& x : inputs) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
  }
  for (double& v : acc) v /= static_cast<double>(inputs.size());
  return Tensor(inputs.front().shape(), std::move(acc));
}

Dataset Dataset::Slice(size_t begin, size_t end) const {
  end = std::min(end, size());
  Dataset out;
  out.class_count = class_count;
  for (size_t i = begin; i < end; ++i) {
    out.inputs.push_back(inputs[i]);
    out.labels.push_back(labels[i]);
    if (has_masks()) out.masks.push_back(masks[i]);
    if (has_importances()) out.importances.push_back(importances[i]);
  }
  return out;
}

namespace {

uint32_t ReadBigEndian32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorKind::kFormat, std::string("truncated IDX header (") +
                                        what + ")");
  }
  return (uint32_t{b[0]} << 24) | (uint32_t{b[1]} << 16) |
         (uint32_t{b[2]} << 8) | uint32_t{b[3]};
}

std::string Hex32(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

}  // namespace

Dataset LoadIdx(std::istream& images, std::istream& labels) {
  constexpr uint32_t kImageMagic = 0x00000803;
  constexpr uint32_t kLabelMagic = 0x00000801;
  constexpr int kIdxClasses = 10;
  const uint32_t image_magic = ReadBigEndian32(images, "image magic");
  if (image_magic != kImageMagic) {
    throw Error(ErrorKind::kFormat, "image stream magic " + Hex32(image_magic) +
                                        ", expected " + Hex32(kImageMagic));
  }
  const uint32_t count = ReadBigEndian32(images, "image count");
  const uint32_t rows = ReadBigEndian32(images, "rows");
  const uint32_t cols = ReadBigEndian32(images, "cols");
  const uint32_t label_magic = ReadBigEndian32(labels, "label magic");
  if (label_magic != kLabelMagic) {
    throw Error(ErrorKind::kFormat, "label stream magic " + Hex32(label_magic) +
                                        ", expected " + Hex32(kLabelMagic));
  }
  const uint32_t label_count = ReadBigEndian32(labels, "label count");
  if (label_count != count) {
    throw Error(ErrorKind::kFormat, "image count " + std::to_string(count) +
                                        " != label count " +
                                        std::to_string(label_count));
  }
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::kFormat, "IDX images have a zero dimension");
  }
  Dataset data;
  data.class_count = kIdxClasses;
  const size_t pixels = static_cast<size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  for (uint32_t n = 0; n < count; ++n) {
    if (!images.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(pixels))) {
      throw Error(ErrorKind::kFormat,
                  "truncated image stream at image " + std::to_string(n));
    }
    std::vector<double> values(pixels);
    for (size_t i = 0; i < pixels; ++i) values[i] = buf[i] / 255.0;
    data.inputs.emplace_back(
        Shape{static_cast<int>(rows), static_cast<int>(cols)},
        std::move(values));
    char label;
    if (!labels.read(&label, 1)) {
      throw Error(ErrorKind::kFormat,
                  "truncated label stream at label " + std::to_string(n));
    }
    const int value = static_cast<unsigned char>(label);
    if (value >= kIdxClasses) {
      throw Error(ErrorKind::kFormat, "label " + std::to_string(n) + " = " +
                                          std::to_string(value) +
                                          " outside class range [0, 10)");
    }
    data.labels.push_back(value);
  }
  return data;
}

Dataset LoadIdxFiles(const std::string& images_path,
                     const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!images || !labels) {
    throw Error(ErrorKind::kFormat, "cannot open IDX files " + images_path +
                                        ", " + labels_path);
  }
  return LoadIdx(images, labels);
}

Zone SynthZone(const SynthConfig& cfg, int label) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(cfg.class_count)));
  const int rows = (cfg.class_count + cols - 1) / cols;
  Zone z;
  z.height = cfg.image_side / rows;
  z.width = cfg.image_side / cols;
  z.row = (label / cols) * z.height;
  z.col = (label % cols) * z.width;
  return z;
}

Dataset SynthGroundTruth(const SynthConfig& cfg) {
  if (cfg.patch_side <= 0 || cfg.patch_side >= cfg.image_side) {
    throw Error(ErrorKind::kPrecondition,
                "patch_side must be in (0, image_side)");
  }
  if (cfg.class_count < 2 || cfg.count < 1 || cfg.noise_std < 0.0) {
    throw Error(ErrorKind::kPrecondition,
                "synthetic set needs class_count >= 2, count >= 1, "
                "noise_std >= 0");
  }
  const Zone probe = SynthZone(cfg, 0);
  if (probe.height < cfg.patch_side || probe.width < cfg.patch_side) {
    throw Error(ErrorKind::kPrecondition,
                "class zones are smaller than the patch; enlarge image_side");
  }
  const int side = cfg.image_side;
  const int p = cfg.patch_side;
  const double center = (p - 1) / 2.0;
  const double reach = std::sqrt(2.0) * center + 1e-12;
  std::vector<double> bump(static_cast<size_t>(p) * p);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) {
      const double d = std::hypot(r - center, c - center);
      bump[r * p + c] = 1.0 - 0.5 * d / reach;
    }
  }
  Rng rng(cfg.seed);
  Dataset data;
  data.class_count = cfg.class_count;
  for (int n = 0; n < cfg.count; ++n) {
    const int label = n % cfg.class_count;
    const Zone z = SynthZone(cfg, label);
    const int top = z.row + static_cast<int>(rng.UniformInt(z.height - p + 1));
    const int left = z.col + static_cast<int>(rng.UniformInt(z.width - p + 1));
    std::vector<double> img(static_cast<size_t>(side) * side);
    for (double& v : img) v = rng.Normal(0.0, cfg.noise_std);
    std::vector<double> mask(img.size(), 0.0);
    std::vector<double> importance(img.size(), 0.0);
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) {
        const size_t idx = static_cast<size_t>(top + r) * side + left + c;
        img[idx] += bump[r * p + c];
        mask[idx] = 1.0;
        importance[idx] = bump[r * p + c];
      }
    }
    data.inputs.emplace_back(Shape{side, side}, std::move(img));
    data.masks.emplace_back(Shape{side, side}, std::move(mask));
    data.importances.emplace_back(Shape{side, side}, std::move(importance));
    data.labels.push_back(label);
  }
  // Balanced labels in random order.
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.UniformInt(i)]);
  }
  Dataset shuffled;
  shuffled.class_count = data.class_count;
  for (size_t i : order) {
    shuffled.inputs.push_back(std::move(data.inputs[i]));
    shuffled.labels.push_back(data.labels[i]);
    shuffled.masks.push_back(std::move(data.masks[i]));
    shuffled.importances.push_back(std::move(data.importances[i]));
  }
  return shuffled;
}

Dataset RandomizeLabels(const Dataset& data, uint64_t seed) {
  Dataset out = data;
  Rng rng(seed);
  for (size_t i = out.labels.size(); i > 1; --i) {
    std::swap(out.labels[i - 1], out.labels[rng.UniformInt(i)]);
  }
  return out;
}

Tensor FillTensor(const Fill& fill, const Shape& shape) {
  if (const double* v = std::get_if<double>(&fill)) return Tensor(shape, *v);
  const Tensor& t = std::get<Tensor>(fill);
  if (t.shape() != shape) {
    throw Error(ErrorKind::kShape, "fill tensor shape " +
                                       ShapeToString(t.shape()) + " vs " +
                                       ShapeToString(shape));
  }
  return t;
}

Tensor MaskFeatures(const Tensor& input, const std::vector<size_t>& features,
                    const Tensor& replacement) {
  RequireSameShape(input, replacement, "mask_features replacement");
  Tensor out = input;
  for (size_t f : features) {
    if (f >= input.size()) {
      throw Error(ErrorKind::kIndex, "feature index " + std::to_string(f) +
                                         " out of range for " +
                                         std::to_string(input.size()) +
                                         " features");
    }
    out[f] = replacement[f];
  }
  return out;
}

Tensor Perturb(const Tensor& input, PerturbKind kind,
               const PerturbParams& params, uint64_t seed) {
  switch (kind) {
    case PerturbKind::kGaussianNoise: {
      if (params.noise_std < 0.0) {
        throw Error(ErrorKind::kPrecondition, "noise_std must be >= 0");
      }
      if (params.noise_std == 0.0) return input;
      Rng rng(seed);
      Tensor out = input;
      for (double& v : out.mutable_values())
        v += rng.Normal(0.0, params.noise_std);
      return out;
    }
    case PerturbKind::kMeanShift:
      return input + params.shift;
    case PerturbKind::kMaskFeatures:
      return MaskFeatures(input, params.features,
                          FillTensor(params.replacement, input.shape()));
  }
  throw Error(ErrorKind::kPrecondition, "unknown perturbation kind");
}

void SaveDataset(const Dataset& data, std::ostream& out) {
  data.Validate();
  json doc;
  doc["version"] = 1;
  doc["class_count"] = data.class_count;
  doc["shape"] = data.inputs.empty() ? Shape{} : data.inputs.front().shape();
  doc["labels"] = data.labels;
  auto encode = [](const std::vector<Tensor>& ts) {
    json arr = json::array();
    for (const Tensor& t : ts) arr.push_back(EncodeDoubles(t.data()));
    return arr;
  };
  doc["inputs"] = encode(data.inputs);
  if (data.has_masks()) doc["masks"] = encode(data.masks);
  if (data.has_importances()) doc["importances"] = encode(data.importances);
  out << doc.dump() << "\n";
}

Dataset LoadDataset(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kFormat,
                std::string("dataset file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorKind::kFormat, "unsupported dataset version");
    }
    Dataset data;
    data.class_count = doc.at("class_count").get<int>();
    const Shape shape = doc.at("shape").get<Shape>();
    data.labels = doc.at("labels").get<std::vector<int>>();
    auto decode = [&](const json& arr) {
      std::vector<Tensor> ts;
      for (const json& s : arr) {
        ts.emplace_back(shape, DecodeDoubles(s.get<std::string>()));
      }
      return ts;
    };
    data.inputs = decode(doc.at("inputs"));
    if (doc.contains("masks")) data.masks = decode(doc["masks"]);
    if (doc.contains("importances"))
      data.importances = decode(doc["importances"]);
    data.Validate();
    return data;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("dataset file: ") + e.what());
  }
}

void SaveDatasetFile(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kFormat, "cannot write " + path);
  SaveDataset(data, out);
}

Dataset LoadDatasetPath(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kFormat, "cannot open dataset " + path);
    return LoadDataset(in);
  }
  if (fs::exists(fs::path(path) / "dataset.json")) {
    return LoadDatasetPath((fs::path(path) / "dataset.json").string());
  }
  std::string images, labels;
  std::vector<fs::path> entries(fs::directory_iterator(path), {});
  std::sort(entries.begin(), entries.end());
  for (const fs::path& p : entries) {
    const std::string name = p.filename().string();
    if (images.empty() && name.find("images") != std::string::npos &&
        name.find("idx3") != std::string::npos) {
      images = p.string();
    }
    if (labels.empty() && name.find("labels") != std::string::npos &&
        name.find("idx1") != std::string::npos) {
      labels = p.string();
    }
  }
  if (images.empty() || labels.empty()) {
    throw Error(ErrorKind::kFormat,
                "directory " + path +
                    " holds neither dataset.json nor an IDX image/label pair");
  }
  return LoadIdxFiles(images, labels);
}

}  // namespace salcard
