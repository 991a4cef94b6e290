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

#ifndef SALCARD_TESTS_TEST_UTIL_H_
#define SALCARD_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <sstream>
#include <string>
#include <vector>

#include "salcard/model.h"
#include "salcard/random.h"
#include "salcard/tensor.h"

namespace salcard::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("salcard_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string File(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline Tensor RandomTensor(const Shape& shape, uint64_t seed,
                           double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  Rng rng(seed);
  for (double& v : t.mutable_values()) v = rng.Uniform(lo, hi);
  return t;
}

// Reference forward pass written from the layer definitions with plain
// loops: dense y = Wx + b, conv is "same" zero-padded cross-correlation.
inline std::vector<double> ReferenceLogits(const Model& model,
                                           const Tensor& input) {
  std::vector<double> a(input.data());
  Shape shape = model.input_shape();
  for (size_t i = 0; i < model.layer_count(); ++i) {
    const Layer& layer = model.layers()[i];
    switch (layer.kind) {
      case LayerKind::kDense: {
        const int out = layer.weights.shape()[0];
        const int in = layer.weights.shape()[1];
        std::vector<double> y(out);
        for (int o = 0; o < out; ++o) {
          double s = layer.bias[o];
          for (int k = 0; k < in; ++k) {
            s += layer.weights[o * in + k] * a[k];
          }
          y[o] = s;
        }
        a = y;
        break;
      }
      case LayerKind::kConv2d: {
        const int cout = layer.weights.shape()[0];
        const int cin = layer.weights.shape()[1];
        const int k = layer.weights.shape()[2];
        const int h = shape[shape.size() - 2];
        const int w = shape[shape.size() - 1];
        std::vector<double> y(static_cast<size_t>(cout) * h * w);
        for (int o = 0; o < cout; ++o) {
          for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
              double s = layer.bias[o];
              for (int ci = 0; ci < cin; ++ci) {
                for (int ky = 0; ky < k; ++ky) {
                  for (int kx = 0; kx < k; ++kx) {
                    const int rr = r + ky - k / 2;
                    const int cc = c + kx - k / 2;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    s += layer.weights[((o * cin + ci) * k + ky) * k + kx] *
                         a[(ci * h + rr) * w + cc];
                  }
                }
              }
              y[(o * h + r) * w + c] = s;
            }
          }
        }
        a = y;
        break;
      }
      case LayerKind::kRelu:
        for (double& v : a) v = std::max(v, 0.0);
        break;
      case LayerKind::kFlatten:
        break;
    }
    shape = model.output_shape(i);
  }
  return a;
}

// Central-difference gradient of logit[target].
inline Tensor NumericGradient(const Model& model, const Tensor& input,
                              int target, double step) {
  Tensor g(input.shape());
  for (size_t i = 0; i < input.size(); ++i) {
    Tensor plus = input, minus = input;
    plus[i] += step;
    minus[i] -= step;
    g[i] = (Logits(model, plus)[target] - Logits(model, minus)[target]) /
           (2.0 * step);
  }
  return g;
}

}  // namespace salcard::testing

#endif  // SALCARD_TESTS_TEST_UTIL_H_
