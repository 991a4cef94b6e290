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

#include "layer_ops.h"

#include <algorithm>

#include "salcard/error.h"

namespace salcard::internal {
namespace {

struct ConvGeometry {
  int in_channels, out_channels, kernel, height, width;
};

ConvGeometry GeometryOf(const Layer& layer, const Tensor& in) {
  const Shape& w = layer.weights.shape();
  const SpatialLayout sl = SpatialLayout::Of(in.shape());
  return {w[1], w[0], w[2], sl.height, sl.width};
}

// Calls fn(out_offset, in_offset, count) for every contiguous row segment
// that kernel tap (ky, kx) connects, "same" zero padding.
template <typename Fn>
void ForEachTapRow(const ConvGeometry& g, int ky, int kx, Fn fn) {
  const int pad = g.kernel / 2;
  const int dy = ky - pad;
  const int dx = kx - pad;
  const int y0 = std::max(0, -dy), y1 = std::min(g.height, g.height - dy);
  const int x0 = std::max(0, -dx), x1 = std::min(g.width, g.width - dx);
  if (x1 <= x0) return;
  for (int y = y0; y < y1; ++y) {
    fn(y * g.width + x0, (y + dy) * g.width + x0 + dx, x1 - x0);
  }
}

}  // namespace

Tensor LayerForward(const Layer& layer, const Tensor& in,
                    const Shape& out_shape) {
  switch (layer.kind) {
    case LayerKind::kDense: {
      const int out_n = layer.weights.shape()[0];
      const int in_n = layer.weights.shape()[1];
      std::vector<double> out(out_n);
      const double* w = layer.weights.data().data();
      const double* x = in.data().data();
      for (int o = 0; o < out_n; ++o) {
        double s = layer.bias[o];
        const double* row = w + static_cast<size_t>(o) * in_n;
        for (int i = 0; i < in_n; ++i) s += row[i] * x[i];
        out[o] = s;
      }
      return Tensor(out_shape, std::move(out));
    }
    case LayerKind::kConv2d: {
      const ConvGeometry g = GeometryOf(layer, in);
      const int plane = g.height * g.width;
      std::vector<double> out(static_cast<size_t>(g.out_channels) * plane);
      const double* x = in.data().data();
      const double* w = layer.weights.data().data();
      for (int co = 0; co < g.out_channels; ++co) {
        double* dst = out.data() + static_cast<size_t>(co) * plane;
        std::fill(dst, dst + plane, layer.bias[co]);
        for (int ci = 0; ci < g.in_channels; ++ci) {
          const double* src = x + static_cast<size_t>(ci) * plane;
          for (int ky = 0; ky < g.kernel; ++ky) {
            for (int kx = 0; kx < g.kernel; ++kx) {
              const double wv =
                  w[((co * g.in_channels + ci) * g.kernel + ky) * g.kernel +
                    kx];
              ForEachTapRow(g, ky, kx, [&](int o, int i, int n) {
                for (int t = 0; t < n; ++t) dst[o + t] += wv * src[i + t];
              });
            }
          }
        }
      }
      return Tensor(out_shape, std::move(out));
    }
    case LayerKind::kRelu: {
      std::vector<double> out(in.data());
      for (double& v : out) v = v > 0.0 ? v : 0.0;
      return Tensor(out_shape, std::move(out));
    }
    case LayerKind::kFlatten:
      return Tensor(out_shape, in.data());
  }
  throw Error(ErrorKind::kFormat, "unknown layer kind");
}

void DenseBackward(const Layer& layer, const Tensor& in, const Tensor& grad_out,
                   Tensor* grad_in, Tensor* grad_w, Tensor* grad_b) {
  const int out_n = layer.weights.shape()[0];
  const int in_n = layer.weights.shape()[1];
  const double* w = layer.weights.data().data();
  if (grad_in) {
    std::span<double> gi = grad_in->mutable_values();
    for (int o = 0; o < out_n; ++o) {
      const double g = grad_out[o];
      if (g == 0.0) continue;
      const double* row = w + static_cast<size_t>(o) * in_n;
      for (int i = 0; i < in_n; ++i) gi[i] += g * row[i];
    }
  }
  if (grad_w) {
    std::span<double> gw = grad_w->mutable_values();
    for (int o = 0; o < out_n; ++o) {
      const double g = grad_out[o];
      if (g == 0.0) continue;
      double* row = gw.data() + static_cast<size_t>(o) * in_n;
      for (int i = 0; i < in_n; ++i) row[i] += g * in[i];
    }
  }
  if (grad_b) {
    for (int o = 0; o < out_n; ++o) (*grad_b)[o] += grad_out[o];
  }
}

void ConvBackward(const Layer& layer, const Tensor& in, const Tensor& grad_out,
                  Tensor* grad_in, Tensor* grad_w, Tensor* grad_b) {
  const ConvGeometry g = GeometryOf(layer, in);
  const int plane = g.height * g.width;
  const double* w = layer.weights.data().data();
  const double* x = in.data().data();
  for (int co = 0; co < g.out_channels; ++co) {
    const double* go = grad_out.data().data() + static_cast<size_t>(co) * plane;
    if (grad_b) {
      double s = 0.0;
      for (int p = 0; p < plane; ++p) s += go[p];
      (*grad_b)[co] += s;
    }
    for (int ci = 0; ci < g.in_channels; ++ci) {
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          const size_t widx =
              ((co * g.in_channels + ci) * g.kernel + ky) * g.kernel + kx;
          const double wv = w[widx];
          double wgrad = 0.0;
          double* gi = grad_in ? grad_in->mutable_values().data() +
                                     static_cast<size_t>(ci) * plane
                               : nullptr;
          const double* src = x + static_cast<size_t>(ci) * plane;
          ForEachTapRow(g, ky, kx, [&](int o, int i, int n) {
            for (int t = 0; t < n; ++t) {
              if (gi) gi[i + t] += wv * go[o + t];
              wgrad += src[i + t] * go[o + t];
            }
          });
          if (grad_w) (*grad_w)[widx] += wgrad;
        }
      }
    }
  }
}

}  // namespace salcard::internal
