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

#include "salcard/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "salcard/error.h"

namespace salcard {

size_t ShapeSize(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ")";
  return out.str();
}

namespace {

void CheckShape(const Shape& shape) {
  if (shape.empty()) throw Error(ErrorKind::kShape, "tensor shape is empty");
  for (int d : shape) {
    if (d <= 0) {
      throw Error(ErrorKind::kShape,
                  "non-positive dimension in shape " + ShapeToString(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  CheckShape(shape_);
  if (!std::isfinite(fill)) throw Error(ErrorKind::kNumeric, "non-finite fill");
  data_.assign(ShapeSize(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckShape(shape_);
  if (ShapeSize(shape_) != data_.size()) {
    throw Error(ErrorKind::kShape,
                "shape " + ShapeToString(shape_) + " holds " +
                    std::to_string(ShapeSize(shape_)) + " values, got " +
                    std::to_string(data_.size()));
  }
  CheckFinite("tensor data");
}

Tensor Tensor::Vector(std::vector<double> data) {
  const int n = static_cast<int>(data.size());
  return Tensor({n}, std::move(data));
}

Tensor Tensor::Reshaped(Shape shape) const { return Tensor(shape, data_); }

void Tensor::CheckFinite(const std::string& what) const {
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::kNumeric,
                  "non-finite value in " + what + " at index " +
                      std::to_string(i));
    }
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* context) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorKind::kShape, std::string(context) + ": shape " +
                                       ShapeToString(a.shape()) + " vs " +
                                       ShapeToString(b.shape()));
  }
}

namespace {

template <typename Op>
Tensor Zip(const Tensor& a, const Tensor& b, const char* context, Op op) {
  RequireSameShape(a, b, context);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Tensor(a.shape(), std::move(out));
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "subtract", [](double x, double y) { return x - y; });
}

Tensor operator*(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "multiply", [](double x, double y) { return x * y; });
}

Tensor operator*(double s, const Tensor& a) {
  std::vector<double> out(a.data());
  for (double& v : out) v *= s;
  return Tensor(a.shape(), std::move(out));
}

Tensor Abs(const Tensor& a) {
  std::vector<double> out(a.data());
  for (double& v : out) v = std::fabs(v);
  return Tensor(a.shape(), std::move(out));
}

double Sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}

double Mean(const Tensor& a) {
  return a.empty() ? 0.0 : Sum(a) / static_cast<double>(a.size());
}

double Dot(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double L2Norm(const Tensor& a) { return std::sqrt(Dot(a, a)); }

double MaxAbs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::fabs(v));
  return m;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "max-abs-diff");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double MinValue(const Tensor& a) {
  return *std::min_element(a.values().begin(), a.values().end());
}

double MaxValue(const Tensor& a) {
  return *std::max_element(a.values().begin(), a.values().end());
}

SpatialLayout SpatialLayout::Of(const Shape& shape) {
  SpatialLayout layout;
  switch (shape.size()) {
    case 1:
      layout.width = shape[0];
      break;
    case 2:
      layout.height = shape[0];
      layout.width = shape[1];
      break;
    case 3:
      layout.channels = shape[0];
      layout.height = shape[1];
      layout.width = shape[2];
      break;
    default:
      throw Error(ErrorKind::kShape,
                  "spatial methods need a rank 1-3 input, got " +
                      ShapeToString(shape));
  }
  return layout;
}

}  // namespace salcard
