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

#include "salcard/model.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "layer_ops.h"
#include "salcard/encoding.h"
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard {

using nlohmann::json;

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv2d:
      return "conv2d";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kFlatten:
      return "flatten";
  }
  return "unknown";
}

int Layer::fan_in() const {
  switch (kind) {
    case LayerKind::kDense:
      return weights.shape()[1];
    case LayerKind::kConv2d: {
      const Shape& s = weights.shape();
      return s[1] * s[2] * s[3];
    }
    default:
      return 0;
  }
}

Layer DenseLayer(int in, int out) {
  return {LayerKind::kDense, Tensor({out, in}), Tensor({out})};
}

Layer Conv2dLayer(int in_channels, int out_channels, int kernel) {
  return {LayerKind::kConv2d,
          Tensor({out_channels, in_channels, kernel, kernel}),
          Tensor({out_channels})};
}

Layer ReluLayer() { return {LayerKind::kRelu, {}, {}}; }
Layer FlattenLayer() { return {LayerKind::kFlatten, {}, {}}; }

namespace {

std::string LayerLabel(size_t i) { return "layer " + std::to_string(i); }

Shape OutputShape(const Layer& layer, const Shape& in, size_t index) {
  switch (layer.kind) {
    case LayerKind::kDense: {
      const Shape& w = layer.weights.shape();
      if (w.size() != 2 || layer.bias.shape() != Shape{w[0]}) {
        throw Error(ErrorKind::kShape,
                    LayerLabel(index) + ": dense parameters must be (out, in) "
                                        "and (out)");
      }
      if (in.size() != 1 || in[0] != w[1]) {
        throw Error(ErrorKind::kShape,
                    LayerLabel(index) + ": dense expects input (" +
                        std::to_string(w[1]) + "), got " + ShapeToString(in));
      }
      return {w[0]};
    }
    case LayerKind::kConv2d: {
      const Shape& w = layer.weights.shape();
      if (w.size() != 4 || w[2] != w[3] || w[2] % 2 == 0 ||
          layer.bias.shape() != Shape{w[0]}) {
        throw Error(ErrorKind::kShape,
                    LayerLabel(index) +
                        ": conv2d parameters must be (out, in, k, k) with odd "
                        "k and bias (out)");
      }
      int channels;
      Shape spatial;
      if (in.size() == 2) {
        channels = 1;
        spatial = in;
      } else if (in.size() == 3) {
        channels = in[0];
        spatial = {in[1], in[2]};
      } else {
        throw Error(ErrorKind::kShape, LayerLabel(index) +
                                           ": conv2d needs a rank 2 or 3 "
                                           "input, got " +
                                           ShapeToString(in));
      }
      if (channels != w[1]) {
        throw Error(ErrorKind::kShape,
                    LayerLabel(index) + ": conv2d expects " +
                        std::to_string(w[1]) + " input channels, got " +
                        std::to_string(channels));
      }
      return {w[0], spatial[0], spatial[1]};
    }
    case LayerKind::kRelu:
      return in;
    case LayerKind::kFlatten:
      return {static_cast<int>(ShapeSize(in))};
  }
  throw Error(ErrorKind::kFormat, LayerLabel(index) + ": unknown layer kind");
}

}  // namespace

Model::Model(Shape input_shape, int class_count, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)),
      class_count_(class_count),
      layers_(std::move(layers)) {
  if (class_count_ < 2) {
    throw Error(ErrorKind::kShape, "class_count must be at least 2");
  }
  if (layers_.empty()) throw Error(ErrorKind::kShape, "model has no layers");
  Shape current = input_shape_;
  for (int d : current) {
    if (d <= 0) throw Error(ErrorKind::kShape, "input_shape must be positive");
  }
  if (current.empty()) throw Error(ErrorKind::kShape, "input_shape is empty");
  for (size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.has_parameters()) {
      layer.weights.CheckFinite(LayerLabel(i) + " weights");
      layer.bias.CheckFinite(LayerLabel(i) + " bias");
    }
    current = OutputShape(layer, current, i);
    activation_shapes_.push_back(current);
  }
  if (current != Shape{class_count_}) {
    throw Error(ErrorKind::kShape,
                "final activation " + ShapeToString(current) +
                    " does not match class_count " +
                    std::to_string(class_count_));
  }
}

std::vector<int> Model::ParameterizedLayers() const {
  std::vector<int> out;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].has_parameters()) out.push_back(static_cast<int>(i));
  }
  return out;
}

int Model::LastConvLayer() const {
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    if (layers_[i].kind == LayerKind::kConv2d) return i;
  }
  return -1;
}

void Model::CheckInput(const Tensor& input) const {
  if (input.shape() != input_shape_) {
    throw Error(ErrorKind::kShape, "input-shape mismatch: model expects " +
                                       ShapeToString(input_shape_) + ", got " +
                                       ShapeToString(input.shape()));
  }
}

bool operator==(const Model& a, const Model& b) {
  if (a.input_shape_ != b.input_shape_ || a.class_count_ != b.class_count_ ||
      a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (size_t i = 0; i < a.layers_.size(); ++i) {
    const Layer& x = a.layers_[i];
    const Layer& y = b.layers_[i];
    if (x.kind != y.kind || !(x.weights == y.weights) || !(x.bias == y.bias)) {
      return false;
    }
  }
  return true;
}

Tensor Softmax(const Tensor& logits) {
  const double m = MaxValue(logits);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return Tensor(logits.shape(), std::move(p));
}

Tensor Logits(const Model& model, const Tensor& input) {
  model.CheckInput(input);
  Tensor current = input;
  for (size_t i = 0; i < model.layer_count(); ++i) {
    current = internal::LayerForward(model.layers()[i], current,
                                     model.output_shape(i));
  }
  current.CheckFinite("logits");
  return current;
}

Tensor Predict(const Model& model, const Tensor& input) {
  return Softmax(Logits(model, input));
}

int ArgMax(const Tensor& t) {
  int best = 0;
  for (size_t i = 1; i < t.size(); ++i) {
    if (t[i] > t[best]) best = static_cast<int>(i);
  }
  return best;
}

std::string_view RandomizationModeName(RandomizationMode mode) {
  return mode == RandomizationMode::kCascading ? "cascading" : "independent";
}

namespace {

void Reinitialize(Layer& layer, uint64_t seed) {
  Rng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(layer.fan_in()));
  for (double& v : layer.weights.mutable_values()) v = rng.Normal(0.0, stddev);
  for (double& v : layer.bias.mutable_values()) v = 0.0;
}

}  // namespace

Model RandomizeLayers(const Model& model, RandomizationMode mode, int upto,
                      uint64_t seed) {
  if (upto < 0 || upto >= static_cast<int>(model.layer_count()) ||
      !model.layers()[upto].has_parameters()) {
    throw Error(ErrorKind::kIndex,
                "randomization target " + std::to_string(upto) +
                    " is not a parameterized layer");
  }
  std::vector<Layer> layers = model.layers();
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    if (!layers[i].has_parameters()) continue;
    const bool touch = mode == RandomizationMode::kCascading ? i >= upto
                                                              : i == upto;
    if (touch) Reinitialize(layers[i], DeriveSeed(seed, i));
  }
  return Model(model.input_shape(), model.class_count(), std::move(layers));
}

Model InitializeParameters(const Model& model, uint64_t seed) {
  const std::vector<int> params = model.ParameterizedLayers();
  if (params.empty()) return model;
  return RandomizeLayers(model, RandomizationMode::kCascading, params.front(),
                         seed);
}

namespace {

Shape ReadShape(const json& j, const std::string& what) {
  if (!j.is_array())
    throw Error(ErrorKind::kFormat, what + " must be an array");
  Shape s;
  for (const json& d : j) {
    if (!d.is_number_integer() || d.get<int>() <= 0) {
      throw Error(ErrorKind::kFormat, what + " must hold positive integers");
    }
    s.push_back(d.get<int>());
  }
  return s;
}

Layer ReadLayer(const json& j, size_t index) {
  const std::string label = LayerLabel(index);
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorKind::kFormat, label + ": missing \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  Layer layer;
  if (kind == "relu" || kind == "flatten") {
    layer.kind = kind == "relu" ? LayerKind::kRelu : LayerKind::kFlatten;
    if (j.contains("weights") || j.contains("bias")) {
      throw Error(ErrorKind::kFormat,
                  label + ": parameter-free layer carries parameters");
    }
    return layer;
  }
  if (kind == "dense") {
    layer.kind = LayerKind::kDense;
  } else if (kind == "conv2d") {
    layer.kind = LayerKind::kConv2d;
  } else {
    throw Error(ErrorKind::kFormat,
                label + ": unknown layer kind \"" + kind + "\"");
  }
  if (!j.contains("shape") || !j.contains("weights") || !j.contains("bias") ||
      !j["weights"].is_string() || !j["bias"].is_string()) {
    throw Error(ErrorKind::kFormat,
                label + ": needs \"shape\", \"weights\" and \"bias\"");
  }
  const Shape shape = ReadShape(j["shape"], label + " shape");
  try {
    std::vector<double> w = DecodeDoubles(j["weights"].get<std::string>());
    std::vector<double> b = DecodeDoubles(j["bias"].get<std::string>());
    if (w.size() != ShapeSize(shape)) {
      throw Error(ErrorKind::kFormat,
                  "weights hold " + std::to_string(w.size()) +
                      " values, shape " + ShapeToString(shape) + " needs " +
                      std::to_string(ShapeSize(shape)));
    }
    if (shape.empty() || b.size() != static_cast<size_t>(shape[0])) {
      throw Error(ErrorKind::kFormat, "bias length does not match shape");
    }
    layer.weights = Tensor(shape, std::move(w));
    const int n = static_cast<int>(b.size());
    layer.bias = Tensor({n}, std::move(b));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, label + ": " + e.what());
  }
  return layer;
}

}  // namespace

Model LoadModel(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kFormat,
                std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kFormat, "model file must have \"version\": 1");
  }
  if (!doc.contains("input_shape") || !doc.contains("class_count") ||
      !doc.contains("layers") || !doc["layers"].is_array() ||
      !doc["class_count"].is_number_integer()) {
    throw Error(ErrorKind::kFormat,
                "model file needs input_shape, class_count and layers");
  }
  const Shape input_shape = ReadShape(doc["input_shape"], "input_shape");
  std::vector<Layer> layers;
  for (size_t i = 0; i < doc["layers"].size(); ++i) {
    layers.push_back(ReadLayer(doc["layers"][i], i));
  }
  try {
    return Model(input_shape, doc["class_count"].get<int>(), std::move(layers));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

void SaveModel(const Model& model, std::ostream& out) {
  json doc;
  doc["version"] = 1;
  doc["input_shape"] = model.input_shape();
  doc["class_count"] = model.class_count();
  doc["layers"] = json::array();
  for (const Layer& layer : model.layers()) {
    json j;
    j["kind"] = LayerKindName(layer.kind);
    if (layer.has_parameters()) {
      j["shape"] = layer.weights.shape();
      j["weights"] = EncodeDoubles(layer.weights.data());
      j["bias"] = EncodeDoubles(layer.bias.data());
    }
    doc["layers"].push_back(std::move(j));
  }
  out << doc.dump(2) << "\n";
}

Model LoadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open model file " + path);
  return LoadModel(in);
}

void SaveModelFile(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kFormat, "cannot write model file " + path);
  SaveModel(model, out);
}

}  // namespace salcard
