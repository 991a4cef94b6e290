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
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard::internal {

namespace {

// Window origins along one axis; the last window always ends at the edge.
std::vector<int> WindowStarts(int extent, int window, int stride) {
  std::vector<int> starts;
  for (int s = 0; s + window < extent; s += stride) starts.push_back(s);
  starts.push_back(extent - window);
  return starts;
}

}  // namespace

std::vector<int> PatchGroups(const Shape& shape, int grid, int* group_count) {
  const SpatialLayout l = SpatialLayout::Of(shape);
  const int gh = std::clamp(grid, 1, l.height);
  const int gw = std::clamp(grid, 1, l.width);
  std::vector<int> groups(ShapeSize(shape));
  for (int c = 0; c < l.channels; ++c) {
    for (int y = 0; y < l.height; ++y) {
      for (int x = 0; x < l.width; ++x) {
        const int gy = y * gh / l.height;
        const int gx = x * gw / l.width;
        groups[(c * l.height + y) * l.width + x] = gy * gw + gx;
      }
    }
  }
  *group_count = gh * gw;
  return groups;
}

Tensor Occlusion(const BlackBox& model, const Tensor& x, int target,
                 const ParamReader& p) {
  const int window = p.Integer("window_side");
  const int stride = p.Integer("stride");
  if (window < 1 || stride < 1) {
    throw Error(ErrorKind::kPrecondition,
                "occlusion window_side and stride >= 1");
  }
  const Tensor fill = p.Fill("replacement", x);
  const SpatialLayout l = SpatialLayout::Of(x.shape());
  const int wh = std::min(window, l.height);
  const int ww = std::min(window, l.width);
  const double reference = model.Logits(x)[target];

  std::vector<double> drop(l.plane(), 0.0);
  std::vector<int> cover(l.plane(), 0);
  for (int y0 : WindowStarts(l.height, wh, stride)) {
    for (int x0 : WindowStarts(l.width, ww, stride)) {
      Tensor occluded = x;
      for (int c = 0; c < l.channels; ++c) {
        for (int y = y0; y < y0 + wh; ++y) {
          for (int xx = x0; xx < x0 + ww; ++xx) {
            const size_t i =
                (static_cast<size_t>(c) * l.height + y) * l.width + xx;
            occluded[i] = fill[i];
          }
        }
      }
      const double delta = reference - model.Logits(occluded)[target];
      for (int y = y0; y < y0 + wh; ++y) {
        for (int xx = x0; xx < x0 + ww; ++xx) {
          drop[y * l.width + xx] += delta;
          ++cover[y * l.width + xx];
        }
      }
    }
  }
  Tensor out(x.shape(), 0.0);
  for (int c = 0; c < l.channels; ++c) {
    for (int i = 0; i < l.plane(); ++i) {
      out[c * l.plane() + i] = drop[i] / cover[i];
    }
  }
  return out;
}

Tensor Rise(const BlackBox& model, const Tensor& x, int target,
            const ParamReader& p, uint64_t seed) {
  const int masks = p.Integer("mask_count");
  const int grid = p.Integer("grid_side");
  const double keep = p.Number("keep_prob");
  if (masks < 1 || grid < 1 || !(keep > 0.0 && keep <= 1.0)) {
    throw Error(
        ErrorKind::kPrecondition,
        "rise needs mask_count >= 1, grid_side >= 1 and keep_prob in (0, 1]");
  }
  const Tensor fill = p.Fill("replacement", x);
  const SpatialLayout l = SpatialLayout::Of(x.shape());
  const int gh = std::min(grid, l.height);
  const int gw = std::min(grid, l.width);
  const int cell_h = (l.height + gh - 1) / gh;
  const int cell_w = (l.width + gw - 1) / gw;
  const int up_h = (gh + 1) * cell_h;
  const int up_w = (gw + 1) * cell_w;

  Rng rng(seed);
  std::vector<double> sum(l.plane(), 0.0);
  std::vector<double> coarse((gh + 1) * (gw + 1));
  for (int m = 0; m < masks; ++m) {
    for (double& v : coarse) v = rng.Bernoulli(keep) ? 1.0 : 0.0;
    const std::vector<double> up =
        BilinearResize(coarse, gh + 1, gw + 1, up_h, up_w);
    const int dy = static_cast<int>(rng.UniformInt(cell_h));
    const int dx = static_cast<int>(rng.UniformInt(cell_w));
    std::vector<double> mask(l.plane());
    for (int y = 0; y < l.height; ++y) {
      for (int xx = 0; xx < l.width; ++xx) {
        mask[y * l.width + xx] = up[(y + dy) * up_w + xx + dx];
      }
    }
    Tensor masked = x;
    for (int c = 0; c < l.channels; ++c) {
      for (int i = 0; i < l.plane(); ++i) {
        const size_t k = static_cast<size_t>(c) * l.plane() + i;
        masked[k] = mask[i] * x[k] + (1.0 - mask[i]) * fill[k];
      }
    }
    const double score = model.Probabilities(masked)[target];
    for (int i = 0; i < l.plane(); ++i) sum[i] += score * mask[i];
  }
  Tensor out(x.shape(), 0.0);
  const double norm = 1.0 / (masks * keep);
  for (int c = 0; c < l.channels; ++c) {
    for (int i = 0; i < l.plane(); ++i) out[c * l.plane() + i] = sum[i] * norm;
  }
  return out;
}

}  // namespace salcard::internal
