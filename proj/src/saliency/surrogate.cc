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
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "methods.h"
#include "salcard/error.h"
#include "salcard/random.h"

namespace salcard::internal {

namespace {

// Input with the groups flagged off in `on` taken from `fill`.
Tensor Compose(const Tensor& x, const Tensor& fill,
               const std::vector<int>& groups, const std::vector<char>& on) {
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!on[groups[i]]) out[i] = fill[i];
  }
  return out;
}

Tensor Broadcast(const Shape& shape, const std::vector<int>& groups,
                 const Eigen::VectorXd& per_group,
                 const std::vector<int>& group_sizes, bool split) {
  Tensor out(shape, 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    const int g = groups[i];
    out[i] = split ? per_group[g] / group_sizes[g] : per_group[g];
  }
  return out;
}

}  // namespace

Tensor Lime(const BlackBox& model, const Tensor& x, int target,
            const ParamReader& p, uint64_t seed) {
  const int grid = p.Integer("patch_grid");
  const int samples = p.Integer("sample_count");
  const double width = p.Number("kernel_width");
  const double ridge = p.Number("ridge");
  const bool exhaustive = p.Integer("exhaustive") != 0;
  if (grid < 1 || samples < 2 || !(width > 0.0) || !(ridge >= 0.0)) {
    throw Error(
        ErrorKind::kPrecondition,
        "lime needs patch_grid >= 1, sample_count >= 2, kernel_width > 0 "
        "and ridge >= 0");
  }
  const Tensor fill = p.Fill("replacement", x);
  int patches = 0;
  const std::vector<int> groups = PatchGroups(x.shape(), grid, &patches);

  std::vector<std::vector<char>> design;
  if (exhaustive) {
    if (patches > 16) {
      throw Error(ErrorKind::kPrecondition,
                  "lime exhaustive mode allows at most 16 patches");
    }
    for (uint32_t bits = 0; bits < (1u << patches); ++bits) {
      std::vector<char> on(patches);
      for (int j = 0; j < patches; ++j) on[j] = (bits >> j) & 1u;
      design.push_back(std::move(on));
    }
  } else {
    Rng rng(seed);
    design.emplace_back(patches, 1);
    std::vector<int> order(patches);
    for (int s = 1; s < samples; ++s) {
      const int off = 1 + static_cast<int>(rng.UniformInt(patches));
      std::iota(order.begin(), order.end(), 0);
      std::vector<char> on(patches, 1);
      // Partial Fisher-Yates picks `off` distinct patches.
      for (int j = 0; j < off; ++j) {
        const int k = j + static_cast<int>(rng.UniformInt(patches - j));
        std::swap(order[j], order[k]);
        on[order[j]] = 0;
      }
      design.push_back(std::move(on));
    }
  }

  const int n = static_cast<int>(design.size());
  Eigen::MatrixXd z(n, patches + 1);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (int s = 0; s < n; ++s) {
    int off = 0;
    for (int j = 0; j < patches; ++j) {
      z(s, j) = design[s][j];
      off += design[s][j] ? 0 : 1;
    }
    z(s, patches) = 1.0;
    y[s] = model.Probabilities(Compose(x, fill, groups, design[s]))[target];
    const double d = static_cast<double>(off) / patches;
    w[s] = std::exp(-(d * d) / (width * width));
  }
  // Each patch column must vary across samples.
  for (int j = 0; j < patches; ++j) {
    if (z.col(j).minCoeff() == z.col(j).maxCoeff()) {
      throw Error(ErrorKind::kDegenerate,
                  "lime design has a constant column; raise sample_count");
    }
  }
  Eigen::MatrixXd a = z.transpose() * w.asDiagonal() * z;
  for (int j = 0; j < patches; ++j) a(j, j) += ridge;
  const Eigen::VectorXd b = z.transpose() * (w.array() * y.array()).matrix();
  const Eigen::VectorXd coef = a.ldlt().solve(b);
  if (!coef.allFinite()) {
    throw Error(ErrorKind::kNumeric, "lime regression is singular");
  }
  return Broadcast(x.shape(), groups, coef.head(patches), {}, false);
}

Tensor KernelShap(const BlackBox& model, const Tensor& x, int target,
                  const ParamReader& p, uint64_t seed) {
  const int budget = p.Integer("coalition_budget");
  const int grid = p.Integer("patch_grid");
  if (budget < 2 || grid < 0) {
    throw Error(ErrorKind::kPrecondition,
                "kernel_shap needs coalition_budget >= 2 and patch_grid >= 0");
  }
  const Tensor baseline = p.Fill("baseline", x);
  int d = 0;
  std::vector<int> groups;
  if (grid == 0) {
    d = static_cast<int>(x.size());
    groups.resize(x.size());
    std::iota(groups.begin(), groups.end(), 0);
  } else {
    groups = PatchGroups(x.shape(), grid, &d);
  }
  std::vector<int> sizes(d, 0);
  for (int g : groups) ++sizes[g];

  auto value = [&](const std::vector<char>& on) {
    return model.Logits(Compose(x, baseline, groups, on))[target];
  };
  const double v_full = value(std::vector<char>(d, 1));
  const double v_empty = value(std::vector<char>(d, 0));
  const double delta = v_full - v_empty;
  if (d == 1) {
    return Broadcast(x.shape(), groups, Eigen::VectorXd::Constant(1, delta),
                     sizes, true);
  }

  std::vector<std::vector<char>> coalitions;
  std::vector<double> weights;
  const bool enumerate = d < 31 && static_cast<double>(budget) >=
                                       std::ldexp(1.0, d) - 2.0;
  if (enumerate) {
    for (uint32_t bits = 1; bits + 1 < (1u << d); ++bits) {
      std::vector<char> on(d);
      int s = 0;
      for (int j = 0; j < d; ++j) {
        on[j] = (bits >> j) & 1u;
        s += on[j];
      }
      // Shapley kernel (d - 1) / (C(d, s) s (d - s)).
      const double log_choose = std::lgamma(d + 1.0) - std::lgamma(s + 1.0) -
                                std::lgamma(d - s + 1.0);
      weights.push_back((d - 1.0) / (std::exp(log_choose) * s * (d - s)));
      coalitions.push_back(std::move(on));
    }
  } else {
    // Sizes drawn with probability proportional to 1 / (s (d - s)); each draw
    // is paired with its complement and carries unit weight.
    std::vector<double> cdf(d - 1);
    double total = 0.0;
    for (int s = 1; s < d; ++s) {
      total += 1.0 / (static_cast<double>(s) * (d - s));
      cdf[s - 1] = total;
    }
    Rng rng(seed);
    std::vector<int> order(d);
    while (static_cast<int>(coalitions.size()) + 2 <= budget) {
      const double u = rng.Uniform() * total;
      const int s = 1 + static_cast<int>(
                            std::upper_bound(cdf.begin(), cdf.end(), u) -
                            cdf.begin());
      const int size = std::min(s, d - 1);
      std::iota(order.begin(), order.end(), 0);
      std::vector<char> on(d, 0);
      for (int j = 0; j < size; ++j) {
        const int k = j + static_cast<int>(rng.UniformInt(d - j));
        std::swap(order[j], order[k]);
        on[order[j]] = 1;
      }
      std::vector<char> complement(d);
      for (int j = 0; j < d; ++j) complement[j] = !on[j];
      coalitions.push_back(std::move(on));
      coalitions.push_back(std::move(complement));
      weights.push_back(1.0);
      weights.push_back(1.0);
    }
  }

  // Eliminating the last player enforces sum(phi) = delta exactly.
  const int n = static_cast<int>(coalitions.size());
  Eigen::MatrixXd a(n, d - 1);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (int s = 0; s < n; ++s) {
    const std::vector<char>& on = coalitions[s];
    const double last = on[d - 1];
    for (int j = 0; j + 1 < d; ++j) a(s, j) = on[j] - last;
    y[s] = value(on) - v_empty - last * delta;
    w[s] = weights[s];
  }
  const Eigen::MatrixXd normal = a.transpose() * w.asDiagonal() * a;
  const Eigen::VectorXd rhs = a.transpose() * (w.array() * y.array()).matrix();
  Eigen::VectorXd head = normal.ldlt().solve(rhs);
  if (!head.allFinite() || (normal * head - rhs).norm() >
                               1e-6 * std::max(1.0, rhs.norm())) {
    head = normal.completeOrthogonalDecomposition().solve(rhs);
  }
  Eigen::VectorXd phi(d);
  phi.head(d - 1) = head;
  phi[d - 1] = delta - head.sum();
  return Broadcast(x.shape(), groups, phi, sizes, true);
}

}  // namespace salcard::internal

namespace salcard {

Tensor BruteForceShapley(const BlackBox& model, const Tensor& input,
                         int target, const Tensor& baseline) {
  RequireSameShape(input, baseline, "shapley baseline");
  const int d = static_cast<int>(input.size());
  if (d < 1 || d > 16) {
    throw Error(ErrorKind::kPrecondition,
                "brute-force Shapley needs 1 to 16 features");
  }
  const uint32_t count = 1u << d;
  std::vector<double> v(count);
  for (uint32_t bits = 0; bits < count; ++bits) {
    Tensor z = baseline;
    for (int j = 0; j < d; ++j) {
      if ((bits >> j) & 1u) z[j] = input[j];
    }
    v[bits] = model.Logits(z)[target];
  }
  // w[s] = s! (d - s - 1)! / d!
  std::vector<double> w(d);
  for (int s = 0; s < d; ++s) {
    w[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(d - s + 0.0) -
                    std::lgamma(d + 1.0));
  }
  Tensor phi(input.shape(), 0.0);
  for (uint32_t bits = 0; bits < count; ++bits) {
    const int s = std::popcount(bits);
    for (int j = 0; j < d; ++j) {
      if ((bits >> j) & 1u) continue;
      phi[j] += w[s] * (v[bits | (1u << j)] - v[bits]);
    }
  }
  return phi;
}

}  // namespace salcard
