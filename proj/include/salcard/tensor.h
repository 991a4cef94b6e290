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

#ifndef SALCARD_TENSOR_H_
#define SALCARD_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace salcard {

using Shape = std::vector<int>;

size_t ShapeSize(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major array of doubles. Construction rejects non-positive
// dimensions, size mismatches and non-finite values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Vector(std::vector<double> data);
  static Tensor Vector(std::initializer_list<double> data) {
    return Vector(std::vector<double>(data));
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> values() const { return data_; }
  std::span<double> mutable_values() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double operator[](size_t i) const { return data_[i]; }
  double& operator[](size_t i) { return data_[i]; }

  // Same data, new shape of equal size.
  Tensor Reshaped(Shape shape) const;

  // Throws kNumeric naming `what` if any element is NaN or infinite.
  void CheckFinite(const std::string& what) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Elementwise helpers. Binary ops require identical shapes.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
Tensor Abs(const Tensor& a);

double Sum(const Tensor& a);
double Mean(const Tensor& a);
double Dot(const Tensor& a, const Tensor& b);
double L2Norm(const Tensor& a);
double MaxAbs(const Tensor& a);
double MaxAbsDiff(const Tensor& a, const Tensor& b);
double MinValue(const Tensor& a);
double MaxValue(const Tensor& a);

void RequireSameShape(const Tensor& a, const Tensor& b, const char* context);

// Channel/row/column view of an input shape used by spatial methods.
// Rank 1 (d) is 1x1xd, rank 2 (h, w) is 1xhxw, rank 3 is (c, h, w).
struct SpatialLayout {
  int channels = 1;
  int height = 1;
  int width = 1;

  static SpatialLayout Of(const Shape& shape);
  int plane() const { return height * width; }
};

}  // namespace salcard

#endif  // SALCARD_TENSOR_H_
