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

#include <algorithm>
#include <cmath>

#include "methods.h"
#include "salcard/autodiff.h"
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard::internal {

Tensor VanillaGradients(const Model& model, const Tensor& x, int target) {
  return Backward(Forward(model, x).tape, target);
}

Tensor InputXGradient(const Model& model, const Tensor& x, int target) {
  return x * VanillaGradients(model, x, target);
}

Tensor IntegratedGradients(const Model& model, const Tensor& x, int target,
                           const ParamReader& p) {
  const int steps = p.Integer("steps");
  if (steps < 1) {
    throw Error(ErrorKind::kPrecondition, "integrated_gradients steps < 1");
  }
  const Tensor baseline = p.Fill("baseline", x);
  const Tensor delta = x - baseline;
  Tensor total(x.shape(), 0.0);
  for (int s = 0; s < steps; ++s) {
    const double alpha = (s + 0.5) / steps;
    const Tensor point = baseline + alpha * delta;
    total = total + Backward(Forward(model, point).tape, target);
  }
  return (1.0 / steps) * (delta * total);
}

Tensor GuidedBackprop(const Model& model, const Tensor& x, int target) {
  return Backward(Forward(model, x).tape, target, ReluRule::kGuided);
}

Tensor GradCam(const Model& model, const Tensor& x, int target,
               const ParamReader& p) {
  if (!model.HasConv()) {
    throw Error(ErrorKind::kUnsupportedArchitecture,
                "grad_cam requires a convolutional layer");
  }
  const std::string which = p.String("conv_layer_index");
  int conv = model.LastConvLayer();
  if (which != "last") {
    conv = p.Integer("conv_layer_index");
    if (conv < 0 || conv >= static_cast<int>(model.layer_count()) ||
        model.layers()[conv].kind != LayerKind::kConv2d) {
      throw Error(ErrorKind::kIndex,
                  "conv_layer_index " + which + " is not a conv2d layer");
    }
  }
  // Feature maps are read after the ReLU that directly follows the conv.
  int node_layer = conv;
  if (conv + 1 < static_cast<int>(model.layer_count()) &&
      model.layers()[conv + 1].kind == LayerKind::kRelu) {
    node_layer = conv + 1;
  }
  ForwardResult fwd = Forward(model, x);
  Tensor seed(Shape{model.class_count()}, 0.0);
  seed[target] = 1.0;
  const BackwardResult back = BackwardAll(fwd.tape, seed, ReluRule::kStandard,
                                          /*parameter_grads=*/false);
  const Tensor& maps = fwd.tape.layer_output(node_layer);
  const Tensor& grads = back.node_grads[node_layer + 1];
  const int channels = maps.shape()[0];
  const int h = maps.shape()[1];
  const int w = maps.shape()[2];
  const int plane = h * w;
  std::vector<double> cam(plane, 0.0);
  for (int c = 0; c < channels; ++c) {
    double alpha = 0.0;
    for (int i = 0; i < plane; ++i) alpha += grads[c * plane + i];
    alpha /= plane;
    for (int i = 0; i < plane; ++i) cam[i] += alpha * maps[c * plane + i];
  }
  for (double& v : cam) v = std::max(v, 0.0);

  const SpatialLayout in = SpatialLayout::Of(x.shape());
  if (in.height != h || in.width != w) {
    cam = BilinearResize(cam, h, w, in.height, in.width);
  }
  Tensor out(x.shape(), 0.0);
  for (int c = 0; c < in.channels; ++c) {
    for (int i = 0; i < in.plane(); ++i) out[c * in.plane() + i] = cam[i];
  }
  return out;
}

Tensor SmoothGrad(const Model& model, const Tensor& x, int target,
                  const ParamReader& p, uint64_t seed) {
  const std::string base = p.String("base_method");
  if (base == "smoothgrad") {
    throw Error(ErrorKind::kPrecondition, "smoothgrad cannot wrap itself");
  }
  const int samples = p.Integer("samples");
  if (samples < 1) {
    throw Error(ErrorKind::kPrecondition, "smoothgrad samples < 1");
  }
  double sigma = 0.0;
  if (p.String("noise_std") != "auto") {
    sigma = p.Number("noise_std");
  } else {
    sigma = p.Number("noise_level") * (MaxValue(x) - MinValue(x));
  }
  if (!(sigma >= 0.0)) {
    throw Error(ErrorKind::kPrecondition, "smoothgrad noise must be >= 0");
  }
  const Params forwarded = p.Forwarded();
  Rng rng(DeriveSeed(seed, 0));
  Tensor total(x.shape(), 0.0);
  for (int s = 0; s < samples; ++s) {
    Tensor noisy = x;
    for (double& v : noisy.mutable_values()) v += rng.Normal(0.0, sigma);
    const uint64_t sample_seed = DeriveSeed(seed, 1 + static_cast<uint64_t>(s));
    total = total +
            Explain(base, model, noisy, target, forwarded, sample_seed).values;
  }
  return (1.0 / samples) * total;
}

}  // namespace salcard::internal
