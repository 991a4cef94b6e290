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

#ifndef SALCARD_MODEL_H_
#define SALCARD_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "salcard/tensor.h"

namespace salcard {

enum class LayerKind { kDense, kConv2d, kRelu, kFlatten };

std::string_view LayerKindName(LayerKind kind);

// One step of a sequential network.
//   dense:  weights (out, in), bias (out); input must be rank 1.
//   conv2d: weights (out_channels, in_channels, k, k), bias (out_channels);
//           stride 1, odd k, zero "same" padding. A rank-2 input is read as
//           a single channel.
//   relu, flatten: no parameters.
struct Layer {
  LayerKind kind = LayerKind::kRelu;
  Tensor weights;
  Tensor bias;

  bool has_parameters() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2d;
  }
  // Inputs feeding one output unit; 0 for parameter-free layers.
  int fan_in() const;
};

Layer DenseLayer(int in, int out);
Layer Conv2dLayer(int in_channels, int out_channels, int kernel);
Layer ReluLayer();
Layer FlattenLayer();

class Model {
 public:
  // Validates that consecutive layer shapes compose and that the final
  // activation is a vector of `class_count` logits.
  Model(Shape input_shape, int class_count, std::vector<Layer> layers);

  const Shape& input_shape() const { return input_shape_; }
  int class_count() const { return class_count_; }
  const std::vector<Layer>& layers() const { return layers_; }
  size_t layer_count() const { return layers_.size(); }

  // Shape of the activation produced by layer `i`.
  const Shape& output_shape(size_t i) const { return activation_shapes_[i]; }

  // Parameter tensors may be overwritten in place; shapes must not change.
  Tensor& mutable_weights(size_t i) { return layers_[i].weights; }
  Tensor& mutable_bias(size_t i) { return layers_[i].bias; }

  std::vector<int> ParameterizedLayers() const;
  // Index of the last conv2d layer, or -1.
  int LastConvLayer() const;
  bool HasConv() const { return LastConvLayer() >= 0; }

  void CheckInput(const Tensor& input) const;

  friend bool operator==(const Model& a, const Model& b);

 private:
  Shape input_shape_;
  int class_count_ = 0;
  std::vector<Layer> layers_;
  std::vector<Shape> activation_shapes_;
};

Tensor Softmax(const Tensor& logits);

// Forward pass without recording a tape.
Tensor Logits(const Model& model, const Tensor& input);
// Class probabilities (softmax of logits).
Tensor Predict(const Model& model, const Tensor& input);
int ArgMax(const Tensor& t);

enum class RandomizationMode { kCascading, kIndependent };

std::string_view RandomizationModeName(RandomizationMode mode);

// Re-draws parameters from N(0, 1/fan_in) with zero bias. Cascading mode
// touches every parameterized layer at index >= `upto`; independent mode
// touches only `upto`. Layer i draws from DeriveSeed(seed, i), so both modes
// produce the same values for a given layer.
Model RandomizeLayers(const Model& model, RandomizationMode mode, int upto,
                      uint64_t seed);

// Fresh initialization of every parameterized layer.
Model InitializeParameters(const Model& model, uint64_t seed);

// JSON model format: {"version": 1, "input_shape": [...], "class_count": n,
// "layers": [{"kind", "shape", "weights", "bias"}]} with parameters encoded
// as base64 little-endian float64.
Model LoadModel(std::istream& in);
void SaveModel(const Model& model, std::ostream& out);
Model LoadModelFile(const std::string& path);
void SaveModelFile(const Model& model, const std::string& path);

}  // namespace salcard

#endif  // SALCARD_MODEL_H_
