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

// Numeric kernels shared by the tape-recording forward pass, the tape-free
// forward pass and reverse-mode differentiation.

#ifndef SALCARD_SRC_LAYER_OPS_H_
#define SALCARD_SRC_LAYER_OPS_H_

#include "salcard/model.h"
#include "salcard/tensor.h"

namespace salcard::internal {

Tensor LayerForward(const Layer& layer, const Tensor& in,
                    const Shape& out_shape);

void DenseBackward(const Layer& layer, const Tensor& in, const Tensor& grad_out,
                   Tensor* grad_in, Tensor* grad_w, Tensor* grad_b);

void ConvBackward(const Layer& layer, const Tensor& in, const Tensor& grad_out,
                  Tensor* grad_in, Tensor* grad_w, Tensor* grad_b);

}  // namespace salcard::internal

#endif  // SALCARD_SRC_LAYER_OPS_H_
