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
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "methods.h"
#include "salcard/error.h"
#include "salcard/saliency.h"

namespace salcard {

namespace {

std::vector<MethodDescriptor> BuildRegistry() {
  std::vector<MethodDescriptor> r;

  r.push_back({
      "vanilla_gradients",
      "Vanilla Gradients",
      AccessRequirement::kGradients,
      true,
      {},
      "Gradient of the target logit with respect to each input feature.",
      "Deterministic.",
      "None.",
      "Requires a differentiable model with access to gradients.",
      "One forward and one backward pass.",
      "The magnitude of the change in the model's output given a small "
      "change to an input feature.",
      {"Erhan et al. 2009, Visualizing higher-layer features of a deep "
       "network",
       "Simonyan et al. 2013, Deep inside convolutional networks"},
  });

  r.push_back({
      "input_x_gradient",
      "Input X Gradient",
      AccessRequirement::kGradients,
      true,
      {},
      "Elementwise product of the input and the gradient of the target "
      "logit.",
      "Deterministic.",
      "None.",
      "Requires a differentiable model and access to gradients.",
      "One forward and one backward pass.",
      "The input feature value weighted by the gradient.",
      {"Shrikumar et al. 2016, Not just a black box"},
  });

  r.push_back({
      "integrated_gradients",
      "Integrated Gradients",
      AccessRequirement::kGradients,
      true,
      {{"baseline",
        "zero",
        "Reference input: zero, ones, mean (dataset mean) or a constant. A "
        "zero baseline marks zero-valued features as unimportant.",
        {"mean", "ones"}},
       {"steps",
        "64",
        "Midpoint-rule steps along the straight-line path.",
        {"16", "256"}}},
      "Path integral of gradients from a baseline to the input, scaled by "
      "the input-baseline difference; attributions sum to the change in the "
      "target logit.",
      "Deterministic unless using a non-deterministic baseline.",
      "Baseline value; integral approximation parameters.",
      "Requires a differentiable model with access to gradients.",
      "One forward and one backward pass per integration step.",
      "The accumulated gradient between the baseline input and the actual "
      "input.",
      {"Sundararajan et al. 2017, Axiomatic attribution for deep networks"},
  });

  r.push_back({
      "smoothgrad",
      "SmoothGrad",
      AccessRequirement::kGradients,
      false,
      {{"base_method", "vanilla_gradients",
        "Saliency method averaged over noisy inputs; base.<name> keys are "
        "forwarded to it."},
       {"noise_level", "0.15",
        "Noise standard deviation as a fraction of the input value range.",
        {"0.05", "0.3"}},
       {"noise_std", "auto",
        "Absolute noise standard deviation; overrides noise_level."},
       {"samples", "25", "Number of noisy samples averaged.", {"5", "50"}}},
      "Average of a base saliency method over Gaussian-perturbed copies of "
      "the input.",
      "Non-deterministic noise perturbations.",
      "Gaussian noise parameters; the number of samples to average over.",
      "Applicable to any saliency method; inherits the base method's "
      "requirements (vanilla gradients by default).",
      "One base-method evaluation per sample.",
      "The average saliency across noisy versions of the input.",
      {"Smilkov et al. 2017, SmoothGrad: removing noise by adding noise"},
  });

  r.push_back({
      "guided_backprop",
      "Guided BackProp",
      AccessRequirement::kGradients,
      true,
      {},
      "Backward pass in which every ReLU passes only positive gradient "
      "through units that were active in the forward pass.",
      "Deterministic unless using a non-deterministic saliency method.",
      "Saliency method (fixed to vanilla gradients here).",
      "Requires a differentiable model with access to gradients.",
      "One forward and one backward pass.",
      "The output of another gradient-based saliency method only considering "
      "paths through the model with positive gradients.",
      {"Springenberg et al. 2014, Striving for simplicity"},
  });

  r.push_back({
      "grad_cam",
      "Grad-CAM",
      AccessRequirement::kGradientsAndConv,
      true,
      {{"conv_layer_index", "last",
        "Index of the conv2d layer whose feature maps are weighted, or "
        "\"last\"."}},
      "Feature maps of a convolutional layer weighted by their spatially "
      "averaged gradients, rectified and upsampled to the input.",
      "Deterministic.",
      "Interpolation method to upsample with (bilinear here); choice of "
      "convolutional layer (typically the last convolutional layer).",
      "Requires a differentiable model, access to the gradients, and a "
      "convolutional layer.",
      "One forward and one backward pass.",
      "The positive attributions of the gradient-weighted feature maps from "
      "an internal convolutional layer.",
      {"Selvaraju et al. 2017, Grad-CAM"},
  });

  r.push_back({
      "occlusion",
      "Occlusion",
      AccessRequirement::kBlackBox,
      true,
      {{"window_side", "4", "Side of the square occluding window.", {"2", "8"}},
       {"stride", "2", "Step between window positions.", {"1", "4"}},
       {"replacement", "mean", "Fill for occluded features.", {"zero"}}},
      "Drop in the target logit when a sliding window of features is "
      "replaced, averaged over the windows covering each feature.",
      "Deterministic.",
      "Window size and stride; replacement value.",
      "No requirements on the model or access to internals.",
      "One forward pass per window position.",
      "How much the model's output drops when the region around a feature "
      "is hidden.",
      {"Zeiler and Fergus 2014, Visualizing and understanding convolutional "
       "networks"},
  });

  r.push_back({
      "rise",
      "RISE",
      AccessRequirement::kBlackBox,
      false,
      {{"mask_count", "1000", "Number of random masks."},
       {"grid_side", "7", "Side of the coarse Bernoulli grid.", {"4", "10"}},
       {"keep_prob", "0.5", "Probability that a grid cell is kept.",
        {"0.3", "0.7"}},
       {"replacement", "zero", "Fill for masked-out features.", {"mean"}}},
      "Random smooth masks weighted by the model's confidence on the masked "
      "input.",
      "Non-deterministic mask generation.",
      "Masking value; mask generation parameters.",
      "No requirements on the model or access to internals.",
      "One forward pass per mask.",
      "The sum of input masks weighed by the model's confidence on the "
      "masked input.",
      {"Petsiuk et al. 2018, RISE: randomized input sampling for explanation "
       "of black-box models"},
  });

  r.push_back({
      "lime",
      "LIME",
      AccessRequirement::kBlackBox,
      false,
      {{"patch_grid", "7", "Patches per side of the interpretable grid.",
        {"4", "8"}},
       {"sample_count", "1000", "Number of perturbed samples."},
       {"kernel_width", "0.25",
        "Width of the exponential proximity kernel over the fraction of "
        "patches switched off.",
        {"0.1", "1"}},
       {"ridge", "0.001", "Ridge penalty on the patch coefficients."},
       {"replacement", "mean", "Fill for switched-off patches.", {"zero"}},
       {"exhaustive", "0",
        "1 enumerates every on/off pattern instead of sampling (at most 16 "
        "patches)."}},
      "Weighted ridge regression of the target probability on patch on/off "
      "indicators around the input.",
      "Non-deterministic perturbations.",
      "Linear surrogate model and parameters; input perturbation parameters.",
      "No requirements on the model or access to internals.",
      "One forward pass per sample plus a small linear solve.",
      "The positively contributing features learned by a surrogate model "
      "trained to mimic the original model's local decision boundary for "
      "the input.",
      {"Ribeiro et al. 2016, Why should I trust you?"},
  });

  r.push_back({
      "kernel_shap",
      "Kernel SHAP",
      AccessRequirement::kBlackBox,
      false,
      {{"baseline", "mean", "Values taken by absent features.", {"zero"}},
       {"coalition_budget", "2048",
        "Coalitions evaluated; at least 2^d - 2 enumerates all of them."},
       {"patch_grid", "0",
        "Patches per side used as players; 0 makes every feature a player.",
        {"4"}}},
      "Shapley-kernel weighted least squares over feature coalitions, "
      "constrained so attributions sum to f(x) - f(baseline).",
      "Non-deterministic coalition sampling.",
      "Feature replacement values; linear model parameterization; "
      "regularization parameter.",
      "No requirements on the model or access to internals.",
      "One forward pass per coalition plus a least-squares solve.",
      "The impact of each input feature on the output as defined by Shapley "
      "values.",
      {"Lundberg and Lee 2017, A unified approach to interpreting model "
       "predictions"},
  });

  r.push_back({
      "sis",
      "SIS",
      AccessRequirement::kGradients,
      true,
      {{"confidence_threshold",
        "0.9",
        "Confidence the surviving set must retain.",
        {"0.7", "0.95"}},
       {"batch_fraction", "0.01",
        "Fraction of remaining features masked per backward-selection step; "
        "the features with the smallest gradient magnitude go first."},
       {"replacement", "mean", "Fill for masked features.", {"zero"}}},
      "Batched gradient backward selection: mask the features with the "
      "smallest gradient magnitude while the target probability stays above "
      "the threshold, then drop single features until none can be removed.",
      "Deterministically produces a set of explanations per input.",
      "Feature replacement values; model confidence threshold.",
      "The batched-gradient variant requires a differentiable model with "
      "access to gradients.",
      "One forward and one backward pass per selection step, plus forward "
      "passes for single-feature pruning.",
      "The minimum set of pixels necessary for the model to confidently "
      "produce the same output.",
      {"Carter et al. 2019, What made you do this?",
       "Carter et al. 2021, Overinterpretation reveals image classification "
       "model pathologies"},
  });
  return r;
}

std::optional<double> ParseNumber(std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

ParamValue ParseDefault(const std::string& text) {
  if (auto v = ParseNumber(text)) return *v;
  return text;
}

}  // namespace

bool MethodDescriptor::HasHyperparameter(std::string_view name) const {
  return std::any_of(hyperparameters.begin(), hyperparameters.end(),
                     [&](const Hyperparameter& h) { return h.name == name; });
}

const std::vector<MethodDescriptor>& Registry() {
  static const std::vector<MethodDescriptor> registry = BuildRegistry();
  return registry;
}

const MethodDescriptor& Describe(std::string_view method_id) {
  for (const MethodDescriptor& d : Registry()) {
    if (d.id == method_id) return d;
  }
  throw Error(ErrorKind::kPrecondition,
              "unknown saliency method \"" + std::string(method_id) + "\"");
}

std::string_view AccessRequirementName(AccessRequirement access) {
  switch (access) {
    case AccessRequirement::kBlackBox:
      return "black_box";
    case AccessRequirement::kGradients:
      return "gradients";
    case AccessRequirement::kGradientsAndConv:
      return "gradients_and_conv";
  }
  return "unknown";
}

AccessRequirement ParseAccessRequirement(std::string_view name) {
  if (name == "black_box") return AccessRequirement::kBlackBox;
  if (name == "gradients") return AccessRequirement::kGradients;
  if (name == "gradients_and_conv") return AccessRequirement::kGradientsAndConv;
  throw Error(ErrorKind::kFormat,
              "unknown access requirement \"" + std::string(name) + "\"");
}

std::string ParamToString(const ParamValue& value) {
  if (const std::string* s = std::get_if<std::string>(&value)) return *s;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(value));
  return buf;
}

Tensor ResolveFill(const ParamValue& spec, const Tensor& input,
                   const std::optional<Tensor>& reference) {
  if (const double* v = std::get_if<double>(&spec)) {
    return Tensor(input.shape(), *v);
  }
  const std::string& name = std::get<std::string>(spec);
  if (name == "zero") return Tensor(input.shape(), 0.0);
  if (name == "ones") return Tensor(input.shape(), 1.0);
  if (name == "mean") {
    if (reference) {
      RequireSameShape(*reference, input, "reference mean");
      return *reference;
    }
    return Tensor(input.shape(), Mean(input));
  }
  if (auto v = ParseNumber(name)) return Tensor(input.shape(), *v);
  throw Error(ErrorKind::kPrecondition,
              "fill must be zero, ones, mean or a number, got \"" + name +
                  "\"");
}

Tensor BlackBox::Probabilities(const Tensor& input) const {
  return Softmax(Logits(input));
}

Tensor ModelBlackBox::Logits(const Tensor& input) const {
  return salcard::Logits(model_, input);
}

Tensor FunctionBlackBox::Logits(const Tensor& input) const {
  if (input.shape() != input_shape_) {
    throw Error(ErrorKind::kShape, "input-shape mismatch: expects " +
                                       ShapeToString(input_shape_) + ", got " +
                                       ShapeToString(input.shape()));
  }
  Tensor out = logits_(input);
  if (out.shape() != Shape{class_count_}) {
    throw Error(ErrorKind::kShape, "black box returned logits of shape " +
                                       ShapeToString(out.shape()));
  }
  return out;
}

std::vector<size_t> RankByMagnitude(const Tensor& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::fabs(values[a]) > std::fabs(values[b]);
  });
  return order;
}

std::vector<double> BilinearResize(const std::vector<double>& grid, int rows,
                                   int cols, int out_rows, int out_cols) {
  std::vector<double> out(static_cast<size_t>(out_rows) * out_cols);
  const double sy = static_cast<double>(rows) / out_rows;
  const double sx = static_cast<double>(cols) / out_cols;
  for (int y = 0; y < out_rows; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, rows - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, rows - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_cols; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, cols - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, cols - 1);
      const double tx = fx - x0;
      const double top =
          grid[y0 * cols + x0] * (1 - tx) + grid[y0 * cols + x1] * tx;
      const double bot =
          grid[y1 * cols + x0] * (1 - tx) + grid[y1 * cols + x1] * tx;
      out[static_cast<size_t>(y) * out_cols + x] = top * (1 - ty) + bot * ty;
    }
  }
  return out;
}

namespace internal {

ParamReader::ParamReader(const Params& params,
                         const MethodDescriptor& descriptor)
    : params_(params), descriptor_(descriptor) {
  const bool forwards = descriptor.HasHyperparameter("base_method");
  for (const auto& [name, value] : params.values) {
    if (forwards && name.rfind("base.", 0) == 0) continue;
    if (!descriptor.HasHyperparameter(name)) {
      throw Error(ErrorKind::kPrecondition,
                  descriptor.id + " has no parameter \"" + name + "\"");
    }
  }
}

ParamValue ParamReader::Raw(std::string_view name) const {
  auto it = params_.values.find(std::string(name));
  if (it != params_.values.end()) return it->second;
  for (const Hyperparameter& h : descriptor_.hyperparameters) {
    if (h.name == name) return ParseDefault(h.default_value);
  }
  throw Error(ErrorKind::kPrecondition,
              descriptor_.id + " reads undeclared parameter \"" +
                  std::string(name) + "\"");
}

double ParamReader::Number(std::string_view name) const {
  const ParamValue v = Raw(name);
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (auto d = ParseNumber(std::get<std::string>(v))) return *d;
  throw Error(ErrorKind::kPrecondition, descriptor_.id + " parameter \"" +
                                            std::string(name) +
                                            "\" must be a number");
}

int ParamReader::Integer(std::string_view name) const {
  const double v = Number(name);
  if (v != std::floor(v) || std::fabs(v) > 1e9) {
    throw Error(ErrorKind::kPrecondition, descriptor_.id + " parameter \"" +
                                              std::string(name) +
                                              "\" must be an integer");
  }
  return static_cast<int>(v);
}

std::string ParamReader::String(std::string_view name) const {
  return ParamToString(Raw(name));
}

Tensor ParamReader::Fill(std::string_view name, const Tensor& input) const {
  return ResolveFill(Raw(name), input, params_.reference);
}

Params ParamReader::Forwarded() const {
  Params out;
  out.reference = params_.reference;
  for (const auto& [name, value] : params_.values) {
    if (name.rfind("base.", 0) == 0) out.values[name.substr(5)] = value;
  }
  return out;
}

}  // namespace internal

namespace {

void CheckTarget(int target, int classes) {
  if (target < 0 || target >= classes) {
    throw Error(ErrorKind::kIndex, "target " + std::to_string(target) +
                                       " out of range for " +
                                       std::to_string(classes) + " classes");
  }
}

bool IsBlackBox(const MethodDescriptor& d) {
  return d.access == AccessRequirement::kBlackBox;
}

Tensor RunBlackBox(const MethodDescriptor& d, const BlackBox& model,
                   const Tensor& input, int target,
                   const internal::ParamReader& p, uint64_t seed) {
  if (d.id == "occlusion") return internal::Occlusion(model, input, target, p);
  if (d.id == "rise") return internal::Rise(model, input, target, p, seed);
  if (d.id == "lime") return internal::Lime(model, input, target, p, seed);
  if (d.id == "kernel_shap") {
    return internal::KernelShap(model, input, target, p, seed);
  }
  throw Error(ErrorKind::kUnsupportedArchitecture,
              d.id + " needs access to model internals");
}

SaliencyMap Finish(const MethodDescriptor& d, Tensor values, int target,
                   uint64_t seed) {
  values.CheckFinite(d.id + " saliency map");
  SaliencyMap map{std::move(values), d.id, target, std::nullopt};
  if (!d.declared_deterministic) map.seed = seed;
  return map;
}

}  // namespace

SaliencyMap Explain(std::string_view method_id, const Model& model,
                    const Tensor& input, int target, const Params& params,
                    uint64_t seed) {
  const MethodDescriptor& d = Describe(method_id);
  model.CheckInput(input);
  CheckTarget(target, model.class_count());
  const internal::ParamReader p(params, d);
  Tensor values;
  if (IsBlackBox(d)) {
    values = RunBlackBox(d, ModelBlackBox(model), input, target, p, seed);
  } else if (d.id == "vanilla_gradients") {
    values = internal::VanillaGradients(model, input, target);
  } else if (d.id == "input_x_gradient") {
    values = internal::InputXGradient(model, input, target);
  } else if (d.id == "integrated_gradients") {
    values = internal::IntegratedGradients(model, input, target, p);
  } else if (d.id == "smoothgrad") {
    values = internal::SmoothGrad(model, input, target, p, seed);
  } else if (d.id == "guided_backprop") {
    values = internal::GuidedBackprop(model, input, target);
  } else if (d.id == "grad_cam") {
    values = internal::GradCam(model, input, target, p);
  } else if (d.id == "sis") {
    values = internal::Sis(model, input, target, p);
  } else {
    throw Error(ErrorKind::kPrecondition, "no implementation for " + d.id);
  }
  return Finish(d, std::move(values), target, seed);
}

SaliencyMap ExplainBlackBox(std::string_view method_id, const BlackBox& model,
                            const Tensor& input, int target,
                            const Params& params, uint64_t seed) {
  const MethodDescriptor& d = Describe(method_id);
  if (!IsBlackBox(d)) {
    throw Error(ErrorKind::kUnsupportedArchitecture,
                d.id + " requires " +
                    std::string(AccessRequirementName(d.access)) +
                    " access; a black box exposes outputs only");
  }
  if (input.shape() != model.input_shape()) {
    throw Error(ErrorKind::kShape, "input-shape mismatch");
  }
  CheckTarget(target, model.class_count());
  const internal::ParamReader p(params, d);
  return Finish(d, RunBlackBox(d, model, input, target, p, seed), target, seed);
}

}  // namespace salcard
