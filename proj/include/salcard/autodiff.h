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

#ifndef SALCARD_AUTODIFF_H_
#define SALCARD_AUTODIFF_H_

#include <functional>
#include <vector>

#include "salcard/model.h"
#include "salcard/tensor.h"

namespace salcard {

// One recorded primitive. Node 0 is the input leaf; node i + 1 is the output
// of layer i and its parent is node i.
struct TapeNode {
  int layer = -1;
  int parent = -1;
  Tensor activation;
};

// Record of a forward pass. Holds a non-owning pointer to the model, which
// must outlive the tape.
class Tape {
 public:
  Tape(const Model& model, std::vector<TapeNode> nodes)
      : model_(&model), nodes_(std::move(nodes)) {}

  const Model& model() const { return *model_; }
  const std::vector<TapeNode>& nodes() const { return nodes_; }
  const Tensor& input() const { return nodes_.front().activation; }
  const Tensor& logits() const { return nodes_.back().activation; }
  // Activation produced by layer i.
  const Tensor& layer_output(int i) const { return nodes_[i + 1].activation; }

  // Re-runs every primitive from the input leaf.
  std::vector<Tensor> Replay() const;

 private:
  const Model* model_;
  std::vector<TapeNode> nodes_;
};

struct ForwardResult {
  Tensor logits;
  Tape tape;
};

ForwardResult Forward(const Model& model, const Tensor& input);

// kGuided passes gradient through a ReLU only where both the forward input
// and the incoming gradient are positive. Both rules use subgradient 0 at 0.
enum class ReluRule { kStandard, kGuided };

// d logit[target] / d input.
Tensor Backward(const Tape& tape, int target,
                ReluRule rule = ReluRule::kStandard);

// Vector-Jacobian product with an arbitrary seed on the logits.
Tensor BackwardFromSeed(const Tape& tape, const Tensor& logit_seed,
                        ReluRule rule = ReluRule::kStandard);

struct BackwardResult {
  Tensor input_grad;
  // Gradient with respect to every tape node's activation.
  std::vector<Tensor> node_grads;
  // Empty tensors for parameter-free layers or when not requested.
  std::vector<Tensor> weight_grads;
  std::vector<Tensor> bias_grads;
};

BackwardResult BackwardAll(const Tape& tape, const Tensor& logit_seed,
                           ReluRule rule, bool parameter_grads);

// Produces d logit[target] / d input; injectable so the checker can be
// pointed at an alternative gradient rule.
using GradientFn =
    std::function<Tensor(const Model&, const Tensor& input, int target)>;

// Worst per-coordinate relative error between `gradient` (default: standard
// backward) and central differences with the given step. The relative error
// is |a - n| / max(|a|, |n|, 1e-3).
double GradCheck(const Model& model, const Tensor& input, int target,
                 double step, const GradientFn& gradient = {});

}  // namespace salcard

#endif  // SALCARD_AUTODIFF_H_
