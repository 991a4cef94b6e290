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

#ifndef SALCARD_SRC_SALIENCY_METHODS_H_
#define SALCARD_SRC_SALIENCY_METHODS_H_

#include <string>
#include <string_view>

#include "salcard/saliency.h"

namespace salcard::internal {

// Typed view over Params for one method. Absent values fall back to the
// default declared in the method's descriptor, so the descriptor is the only
// place defaults live.
class ParamReader {
 public:
  ParamReader(const Params& params, const MethodDescriptor& descriptor);

  double Number(std::string_view name) const;
  int Integer(std::string_view name) const;
  std::string String(std::string_view name) const;
  ParamValue Raw(std::string_view name) const;
  Tensor Fill(std::string_view name, const Tensor& input) const;
  // Parameters carrying the "base." prefix, with the prefix removed.
  Params Forwarded() const;

 private:
  const Params& params_;
  const MethodDescriptor& descriptor_;
};

Tensor VanillaGradients(const Model& model, const Tensor& x, int target);
Tensor InputXGradient(const Model& model, const Tensor& x, int target);
Tensor IntegratedGradients(const Model& model, const Tensor& x, int target,
                           const ParamReader& p);
Tensor GuidedBackprop(const Model& model, const Tensor& x, int target);
Tensor GradCam(const Model& model, const Tensor& x, int target,
               const ParamReader& p);
Tensor SmoothGrad(const Model& model, const Tensor& x, int target,
                  const ParamReader& p, uint64_t seed);
Tensor Sis(const Model& model, const Tensor& x, int target,
           const ParamReader& p);

Tensor Occlusion(const BlackBox& model, const Tensor& x, int target,
                 const ParamReader& p);
Tensor Rise(const BlackBox& model, const Tensor& x, int target,
            const ParamReader& p, uint64_t seed);
Tensor Lime(const BlackBox& model, const Tensor& x, int target,
            const ParamReader& p, uint64_t seed);
Tensor KernelShap(const BlackBox& model, const Tensor& x, int target,
                  const ParamReader& p, uint64_t seed);

// Grid partition shared by LIME and grouped Kernel SHAP: group id per
// feature; every channel of a pixel falls in the same group.
std::vector<int> PatchGroups(const Shape& shape, int grid, int* group_count);

}  // namespace salcard::internal

#endif  // SALCARD_SRC_SALIENCY_METHODS_H_
