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

#ifndef SALCARD_SALIENCY_H_
#define SALCARD_SALIENCY_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "salcard/model.h"
#include "salcard/tensor.h"

namespace salcard {

// Flat method configuration, as read from the CLI config section.
using ParamValue = std::variant<double, std::string>;

struct Params {
  std::map<std::string, ParamValue> values;
  // Per-feature dataset mean. Fill-valued parameters set to "mean" resolve to
  // it; without it they fall back to the scalar mean of the input.
  std::optional<Tensor> reference;

  Params& Set(const std::string& name, ParamValue value) {
    values[name] = std::move(value);
    return *this;
  }
};

std::string ParamToString(const ParamValue& value);

// Resolves a fill specification ("zero", "ones", "mean" or a number) to a
// tensor shaped like `input`.
Tensor ResolveFill(const ParamValue& spec, const Tensor& input,
                   const std::optional<Tensor>& reference);

enum class AccessRequirement { kBlackBox, kGradients, kGradientsAndConv };

std::string_view AccessRequirementName(AccessRequirement access);
AccessRequirement ParseAccessRequirement(std::string_view name);

struct Hyperparameter {
  std::string name;
  std::string default_value;
  std::string description;
  // Alternative settings probed by the hyperparameter sweep.
  std::vector<std::string> sweep_values = {};
};

struct MethodDescriptor {
  std::string id;
  std::string display_name;
  AccessRequirement access = AccessRequirement::kGradients;
  bool declared_deterministic = true;
  std::vector<Hyperparameter> hyperparameters;
  std::string summary;
  std::string determinism_text;
  std::string hyperparameter_text;
  std::string agnosticism_text;
  std::string efficiency_text;
  std::string semantic_directness_text;
  std::vector<std::string> references;

  bool HasHyperparameter(std::string_view name) const;
};

// The eleven attribution methods, in a fixed order.
const std::vector<MethodDescriptor>& Registry();
// Throws kPrecondition for unknown ids.
const MethodDescriptor& Describe(std::string_view method_id);

struct SaliencyMap {
  Tensor values;  // signed, input shape
  std::string method_id;
  int target = 0;
  std::optional<uint64_t> seed;  // absent for deterministic methods
};

// Output-only access to a classifier. Black-box methods see nothing else.
class BlackBox {
 public:
  virtual ~BlackBox() = default;
  virtual const Shape& input_shape() const = 0;
  virtual int class_count() const = 0;
  virtual Tensor Logits(const Tensor& input) const = 0;

  Tensor Probabilities(const Tensor& input) const;
};

class ModelBlackBox final : public BlackBox {
 public:
  explicit ModelBlackBox(const Model& model) : model_(model) {}
  const Shape& input_shape() const override { return model_.input_shape(); }
  int class_count() const override { return model_.class_count(); }
  Tensor Logits(const Tensor& input) const override;

 private:
  const Model& model_;
};

class FunctionBlackBox final : public BlackBox {
 public:
  FunctionBlackBox(Shape input_shape, int class_count,
                   std::function<Tensor(const Tensor&)> logits)
      : input_shape_(std::move(input_shape)),
        class_count_(class_count),
        logits_(std::move(logits)) {}
  const Shape& input_shape() const override { return input_shape_; }
  int class_count() const override { return class_count_; }
  Tensor Logits(const Tensor& input) const override;

 private:
  Shape input_shape_;
  int class_count_;
  std::function<Tensor(const Tensor&)> logits_;
};

// Uniform entry point: every method takes (model, input, target, params,
// seed) and returns a map shaped like the input. Unknown parameter names are
// rejected with kPrecondition.
SaliencyMap Explain(std::string_view method_id, const Model& model,
                    const Tensor& input, int target, const Params& params,
                    uint64_t seed);

// Black-box entry point; rejects methods that need more than outputs with
// kUnsupportedArchitecture.
SaliencyMap ExplainBlackBox(std::string_view method_id, const BlackBox& model,
                            const Tensor& input, int target,
                            const Params& params, uint64_t seed);

// Exact Shapley values of logit[target] by enumerating all 2^d coalitions;
// absent features take baseline values. Requires d <= 16.
Tensor BruteForceShapley(const BlackBox& model, const Tensor& input,
                         int target, const Tensor& baseline);

// Bilinear resize (half-pixel centers, edge clamped) of a row-major grid.
std::vector<double> BilinearResize(const std::vector<double>& grid, int rows,
                                   int cols, int out_rows, int out_cols);

// Feature indices ordered by decreasing |value|; ties go to the lower index.
std::vector<size_t> RankByMagnitude(const Tensor& values);

}  // namespace salcard

#endif  // SALCARD_SALIENCY_H_
