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

#include "salcard/autodiff.h"

#include <algorithm>
#include <cmath>

#include "layer_ops.h"
#include "salcard/error.h"

namespace salcard {

ForwardResult Forward(const Model& model, const Tensor& input) {
  model.CheckInput(input);
  input.CheckFinite("input");
  std::vector<TapeNode> nodes;
  nodes.reserve(model.layer_count() + 1);
  nodes.push_back({-1, -1, input});
  for (size_t i = 0; i < model.layer_count(); ++i) {
    Tensor out = internal::LayerForward(
        model.layers()[i], nodes.back().activation, model.output_shape(i));
    out.CheckFinite("activation of layer " + std::to_string(i));
    nodes.push_back({static_cast<int>(i), static_cast<int>(i), std::move(out)});
  }
  Tensor logits = nodes.back().activation;
  return {std::move(logits), Tape(model, std::move(nodes))};
}

std::vector<Tensor> Tape::Replay() const {
  std::vector<Tensor> out;
  out.reserve(nodes_.size());
  out.push_back(nodes_.front().activation);
  for (size_t n = 1; n < nodes_.size(); ++n) {
    const TapeNode& node = nodes_[n];
    out.push_back(internal::LayerForward(model_->layers()[node.layer],
                                         out[node.parent],
                                         model_->output_shape(node.layer)));
  }
  return out;
}

BackwardResult BackwardAll(const Tape& tape, const Tensor& logit_seed,
                           ReluRule rule, bool parameter_grads) {
  const Model& model = tape.model();
  const auto& nodes = tape.nodes();
  if (logit_seed.shape() != tape.logits().shape()) {
    throw Error(ErrorKind::kShape, "logit seed shape " +
                                       ShapeToString(logit_seed.shape()) +
                                       " does not match logits");
  }
  BackwardResult result;
  result.node_grads.resize(nodes.size());
  result.node_grads.back() = logit_seed;
  if (parameter_grads) {
    result.weight_grads.resize(model.layer_count());
    result.bias_grads.resize(model.layer_count());
  }
  for (int n = static_cast<int>(nodes.size()) - 1; n >= 1; --n) {
    const TapeNode& node = nodes[n];
    const Layer& layer = model.layers()[node.layer];
    const Tensor& in = nodes[node.parent].activation;
    const Tensor& grad_out = result.node_grads[n];
    Tensor grad_in(in.shape());
    switch (layer.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv2d: {
        Tensor* gw = nullptr;
        Tensor* gb = nullptr;
        if (parameter_grads) {
          result.weight_grads[node.layer] = Tensor(layer.weights.shape());
          result.bias_grads[node.layer] = Tensor(layer.bias.shape());
          gw = &result.weight_grads[node.layer];
          gb = &result.bias_grads[node.layer];
        }
        if (layer.kind == LayerKind::kDense) {
          internal::DenseBackward(layer, in, grad_out, &grad_in, gw, gb);
        } else {
          internal::ConvBackward(layer, in, grad_out, &grad_in, gw, gb);
        }
        break;
      }
      case LayerKind::kRelu: {
        std::span<double> gi = grad_in.mutable_values();
        for (size_t i = 0; i < gi.size(); ++i) {
          const bool open = in[i] > 0.0 &&
                            (rule == ReluRule::kStandard || grad_out[i] > 0.0);
          gi[i] = open ? grad_out[i] : 0.0;
        }
        break;
      }
      case LayerKind::kFlatten:
        grad_in = grad_out.Reshaped(in.shape());
        break;
    }
    result.node_grads[node.parent] = std::move(grad_in);
  }
  result.input_grad = result.node_grads.front();
  result.input_grad.CheckFinite("input gradient");
  return result;
}

Tensor BackwardFromSeed(const Tape& tape, const Tensor& logit_seed,
                        ReluRule rule) {
  return BackwardAll(tape, logit_seed, rule, false).input_grad;
}

Tensor Backward(const Tape& tape, int target, ReluRule rule) {
  const int classes = tape.model().class_count();
  if (target < 0 || target >= classes) {
    throw Error(ErrorKind::kIndex, "target " + std::to_string(target) +
                                       " out of range for " +
                                       std::to_string(classes) + " classes");
  }
  Tensor seed(tape.logits().shape());
  seed[target] = 1.0;
  return BackwardFromSeed(tape, seed, rule);
}

double GradCheck(const Model& model, const Tensor& input, int target,
                 double step, const GradientFn& gradient) {
  if (!(step > 0.0)) throw Error(ErrorKind::kPrecondition, "step must be > 0");
  const Tensor analytic =
      gradient ? gradient(model, input, target)
               : Backward(Forward(model, input).tape, target);
  RequireSameShape(analytic, input, "gradient check");
  double worst = 0.0;
  Tensor probe = input;
  for (size_t i = 0; i < input.size(); ++i) {
    probe[i] = input[i] + step;
    const double up = Logits(model, probe)[target];
    probe[i] = input[i] - step;
    const double down = Logits(model, probe)[target];
    probe[i] = input[i];
    const double numeric = (up - down) / (2.0 * step);
    const double denom =
        std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-3});
    worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace salcard
