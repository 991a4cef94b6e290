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

#include "salcard/saliency.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "salcard/autodiff.h"
#include "salcard/error.h"
#include "salcard/fixtures.h"
#include "salcard/model.h"
#include "test_util.h"

namespace salcard {
namespace {

using testing::NumericGradient;
using testing::RandomTensor;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::kParse;
}

TEST(RegistryTest, ElevenMethodsInFixedOrder) {
  std::vector<std::string> ids;
  for (const MethodDescriptor& d : Registry()) ids.push_back(d.id);
  EXPECT_EQ(ids, (std::vector<std::string>{
                     "vanilla_gradients", "input_x_gradient",
                     "integrated_gradients", "smoothgrad", "guided_backprop",
                     "grad_cam", "occlusion", "rise", "lime", "kernel_shap",
                     "sis"}));
  for (const MethodDescriptor& d : Registry()) {
    EXPECT_FALSE(d.summary.empty());
    EXPECT_FALSE(d.references.empty());
    EXPECT_FALSE(d.semantic_directness_text.empty());
    for (const Hyperparameter& h : d.hyperparameters) {
      EXPECT_FALSE(h.default_value.empty()) << d.id << "." << h.name;
    }
  }
  EXPECT_EQ(KindOf([] { Describe("nope"); }), ErrorKind::kPrecondition);
}

TEST(RegistryTest, AccessRequirementNamesRoundTrip) {
  for (AccessRequirement a :
       {AccessRequirement::kBlackBox, AccessRequirement::kGradients,
        AccessRequirement::kGradientsAndConv}) {
    EXPECT_EQ(ParseAccessRequirement(AccessRequirementName(a)), a);
  }
}

TEST(ExplainTest, UnknownParameterIsRejected) {
  const Model m = Lin3();
  Params p;
  p.Set("stepz", 3.0);
  EXPECT_EQ(KindOf([&] {
              Explain("integrated_gradients", m, Tensor::Vector({1, 1, 1}), 0,
                      p, 0);
            }),
            ErrorKind::kPrecondition);
}

TEST(ExplainTest, LinearModelMethodsRecoverWeights) {
  const Model m = Lin3();
  const Tensor x = Tensor::Vector({1, 1, 1});
  const Tensor want = Tensor::Vector({1, -2, 3});
  Params ig;
  ig.Set("baseline", "zero");
  Params occ;
  occ.Set("window_side", 1.0).Set("stride", 1.0).Set("replacement", "zero");
  EXPECT_LT(MaxAbsDiff(Explain("vanilla_gradients", m, x, 0, {}, 0).values,
                       want), 1e-12);
  EXPECT_LT(MaxAbsDiff(Explain("input_x_gradient", m, x, 0, {}, 0).values,
                       want), 1e-12);
  EXPECT_LT(MaxAbsDiff(
                Explain("integrated_gradients", m, x, 0, ig, 0).values, want),
            1e-12);
  EXPECT_LT(MaxAbsDiff(Explain("occlusion", m, x, 0, occ, 0).values, want),
            1e-12);
  EXPECT_LT(MaxAbsDiff(BruteForceShapley(ModelBlackBox(m), x, 0,
                                         Tensor({3}, 0.0)),
                       want), 1e-12);
}

TEST(ExplainTest, MapsHaveInputShapeAndSeedOnlyWhenRandom) {
  const Model m = InitializeParameters(CnnArch(6, 3), 1);
  const Tensor x = RandomTensor({6, 6}, 2);
  const int t = ArgMax(Logits(m, x));
  for (const MethodDescriptor& d : Registry()) {
    Params p;
    if (d.id == "rise") p.Set("mask_count", 20.0);
    if (d.id == "lime") p.Set("sample_count", 40.0);
    if (d.id == "kernel_shap") p.Set("coalition_budget", 40.0);
    if (d.id == "sis") p.Set("confidence_threshold", 0.3);
    const SaliencyMap s = Explain(d.id, m, x, t, p, 5);
    EXPECT_EQ(s.values.shape(), x.shape()) << d.id;
    EXPECT_EQ(s.method_id, d.id);
    EXPECT_EQ(s.target, t);
    EXPECT_EQ(s.seed.has_value(), !d.declared_deterministic) << d.id;
  }
}

TEST(GradientMethodsTest, VanillaMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Model m = RandomReluNet(seed, 6, {8, 8}, 3);
    const Tensor x = RandomTensor({6}, 50 + seed);
    const Tensor g = Explain("vanilla_gradients", m, x, 2, {}, 0).values;
    EXPECT_LT(MaxAbsDiff(g, NumericGradient(m, x, 2, 1e-5)), 1e-6);
    const Tensor ixg = Explain("input_x_gradient", m, x, 2, {}, 0).values;
    EXPECT_LT(MaxAbsDiff(ixg, x * g), 1e-15);
  }
}

TEST(GradientMethodsTest, SingleKinkGapShrinksWhenStepsDouble) {
  // One hidden unit puts at most one kink on the path, so the midpoint
  // error |J| * dist(u n, Z) / n never grows when n doubles.
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = RandomReluNet(seed, 3, {1}, 2);
    const Tensor x = RandomTensor({3}, 300 + seed, -2.0, 2.0);
    const double delta = Logits(m, x)[0] - Logits(m, Tensor({3}, 0.0))[0];
    double previous = 1e300;
    for (int steps = 1; steps <= 1024; steps *= 2) {
      Params p;
      p.Set("baseline", "zero").Set("steps", static_cast<double>(steps));
      const double gap = std::fabs(
          Sum(Explain("integrated_gradients", m, x, 0, p, 0).values) - delta);
      EXPECT_LE(gap, previous + 1e-12) << "seed " << seed << " steps " << steps;
      previous = gap;
    }
  }
}

TEST(GradientMethodsTest, IntegratedGradientsMidpointOracle) {
  const Model m = RandomReluNet(4, 3, {5}, 2);
  const Tensor x = RandomTensor({3}, 9);
  const Tensor b = Tensor::Vector({0.2, -0.1, 0.3});
  Params p;
  p.Set("baseline", 0.0).Set("steps", 8.0);
  Params shifted;
  shifted.Set("steps", 8.0).reference = b;
  shifted.Set("baseline", "mean");
  for (const Params* params : {&p, &shifted}) {
    const Tensor base = params == &p ? Tensor({3}, 0.0) : b;
    Tensor oracle({3}, 0.0);
    for (int k = 0; k < 8; ++k) {
      const double a = (k + 0.5) / 8.0;
      const Tensor point = base + a * (x - base);
      const Tensor g = NumericGradient(m, point, 1, 1e-6);
      for (int i = 0; i < 3; ++i) {
        oracle[i] += (x[i] - base[i]) * g[i] / 8.0;
      }
    }
    const Tensor got =
        Explain("integrated_gradients", m, x, 1, *params, 0).values;
    EXPECT_LT(MaxAbsDiff(got, oracle), 1e-8);
  }
}

TEST(GradientMethodsTest, SmoothGradWithoutNoiseIsVanilla) {
  const Model m = RandomReluNet(2, 4, {6}, 2);
  const Tensor x = RandomTensor({4}, 3);
  Params p;
  p.Set("noise_level", 0.0).Set("samples", 5.0);
  const Tensor sg = Explain("smoothgrad", m, x, 0, p, 11).values;
  const Tensor vg = Explain("vanilla_gradients", m, x, 0, {}, 0).values;
  EXPECT_LT(MaxAbsDiff(sg, vg), 1e-12);
  Params noisy;
  noisy.Set("samples", 5.0);
  EXPECT_EQ(Explain("smoothgrad", m, x, 0, noisy, 11).values,
            Explain("smoothgrad", m, x, 0, noisy, 11).values);
  EXPECT_NE(Explain("smoothgrad", m, x, 0, noisy, 11).values,
            Explain("smoothgrad", m, x, 0, noisy, 12).values);
}

TEST(GradientMethodsTest, GuidedBackpropOracle) {
  const Model m = InitializeParameters(MlpArch(3, 6, 2), 7);
  const Tensor x = RandomTensor({3, 3}, 4);
  const Tensor& w1 = m.layers()[1].weights;
  const Tensor& w2 = m.layers()[3].weights;
  const Tensor h = Forward(m, x).tape.layer_output(1);
  std::vector<double> oracle(9, 0.0);
  for (int j = 0; j < 6; ++j) {
    const double g = w2[1 * 6 + j];
    if (h[j] <= 0.0 || g <= 0.0) continue;
    for (int i = 0; i < 9; ++i) oracle[i] += w1[j * 9 + i] * g;
  }
  const Tensor got = Explain("guided_backprop", m, x, 1, {}, 0).values;
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(got[i], oracle[i], 1e-12);
}

TEST(GradientMethodsTest, GradCamOracle) {
  const int side = 5;
  const Model m = InitializeParameters(CnnArch(side, 3), 6);
  const Tensor x = RandomTensor({side, side}, 8);
  const int target = 2;
  const Tensor a = Forward(m, x).tape.layer_output(3);
  const Tensor& w = m.layers()[5].weights;
  const int plane = side * side, channels = 8;
  std::vector<double> cam(plane, 0.0);
  for (int c = 0; c < channels; ++c) {
    double alpha = 0.0;
    for (int i = 0; i < plane; ++i) {
      alpha += w[target * channels * plane + c * plane + i];
    }
    alpha /= plane;
    for (int i = 0; i < plane; ++i) cam[i] += alpha * a[c * plane + i];
  }
  const Tensor got = Explain("grad_cam", m, x, target, {}, 0).values;
  for (int i = 0; i < plane; ++i) {
    EXPECT_NEAR(got[i], std::max(cam[i], 0.0), 1e-12);
  }
  EXPECT_EQ(KindOf([&] {
              Explain("grad_cam", MlpArch(3, 4, 2), Tensor({3, 3}), 0, {}, 0);
            }),
            ErrorKind::kUnsupportedArchitecture);
  Params p;
  p.Set("conv_layer_index", 1.0);
  EXPECT_EQ(KindOf([&] { Explain("grad_cam", m, x, 0, p, 0); }),
            ErrorKind::kIndex);
}

TEST(PerturbationTest, OcclusionOracleOnGrid) {
  const Model m = InitializeParameters(MlpArch(4, 5, 2), 3);
  const Tensor x = RandomTensor({4, 4}, 1);
  Params p;
  p.Set("window_side", 2.0).Set("stride", 2.0).Set("replacement", "zero");
  const Tensor got = Explain("occlusion", m, x, 0, p, 0).values;
  const double full = Logits(m, x)[0];
  for (int wr = 0; wr < 4; wr += 2) {
    for (int wc = 0; wc < 4; wc += 2) {
      Tensor masked = x;
      for (int r = wr; r < wr + 2; ++r) {
        for (int c = wc; c < wc + 2; ++c) masked[r * 4 + c] = 0.0;
      }
      const double drop = full - Logits(m, masked)[0];
      for (int r = wr; r < wr + 2; ++r) {
        for (int c = wc; c < wc + 2; ++c) {
          EXPECT_NEAR(got[r * 4 + c], drop, 1e-12);
        }
      }
    }
  }
}

TEST(PerturbationTest, RiseWithAllKeptIsConstantProbability) {
  const Model m = InitializeParameters(MlpArch(4, 5, 3), 2);
  const Tensor x = RandomTensor({4, 4}, 6);
  Params p;
  p.Set("keep_prob", 1.0).Set("mask_count", 10.0).Set("grid_side", 2.0);
  const Tensor got = Explain("rise", m, x, 1, p, 3).values;
  const double prob = Predict(m, x)[1];
  for (double v : got.values()) EXPECT_NEAR(v, prob, 1e-12);
}

TEST(PerturbationTest, RiseDependsOnSeedOnly) {
  const Model m = InitializeParameters(MlpArch(4, 5, 3), 2);
  const Tensor x = RandomTensor({4, 4}, 6);
  Params p;
  p.Set("mask_count", 30.0).Set("grid_side", 2.0);
  EXPECT_EQ(Explain("rise", m, x, 1, p, 3).values,
            Explain("rise", m, x, 1, p, 3).values);
  EXPECT_NE(Explain("rise", m, x, 1, p, 3).values,
            Explain("rise", m, x, 1, p, 4).values);
}

// Weighted ridge with an unpenalized intercept, solved by Gauss-Jordan.
std::vector<double> WeightedRidge(const std::vector<std::vector<double>>& z,
                                  const std::vector<double>& y,
                                  const std::vector<double>& w, double ridge) {
  const size_t k = z[0].size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (size_t s = 0; s < z.size(); ++s) {
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = 0; j < k; ++j) a[i][j] += w[s] * z[s][i] * z[s][j];
      a[i][k] += w[s] * z[s][i] * y[s];
    }
  }
  for (size_t i = 0; i + 1 < k; ++i) a[i][i] += ridge;
  for (size_t c = 0; c < k; ++c) {
    size_t piv = c;
    for (size_t r = c; r < k; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> out(k);
  for (size_t i = 0; i < k; ++i) out[i] = a[i][k] / a[i][i];
  return out;
}

TEST(SurrogateTest, ExhaustiveLimeMatchesWeightedRidgeOracle) {
  const Model m = RandomReluNet(3, 4, {6}, 2);
  const Tensor x = RandomTensor({4}, 12);
  const double width = 0.25, ridge = 0.001;
  Params p;
  p.Set("exhaustive", 1.0).Set("patch_grid", 4.0).Set("replacement", "zero");
  const Tensor got = Explain("lime", m, x, 1, p, 0).values;
  std::vector<std::vector<double>> z;
  std::vector<double> y, w;
  for (int bits = 0; bits < 16; ++bits) {
    Tensor xs({4}, 0.0);
    std::vector<double> row;
    int off = 0;
    for (int j = 0; j < 4; ++j) {
      const bool on = (bits >> j) & 1;
      row.push_back(on ? 1.0 : 0.0);
      if (on) xs[j] = x[j]; else ++off;
    }
    row.push_back(1.0);
    z.push_back(row);
    y.push_back(Predict(m, xs)[1]);
    const double d = off / 4.0;
    w.push_back(std::exp(-(d * d) / (width * width)));
  }
  const std::vector<double> want = WeightedRidge(z, y, w, ridge);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(got[j], want[j], 1e-9);
}

TEST(SurrogateTest, KernelShapEnumerationMatchesBruteForce) {
  for (int d = 2; d <= 8; ++d) {
    const Model m = RandomReluNet(100 + d, d, {6, 5}, 3);
    const Tensor x = RandomTensor({d}, 200 + d);
    Params p;
    p.Set("baseline", "zero");
    const Tensor shap = Explain("kernel_shap", m, x, 1, p, 0).values;
    const Tensor exact =
        BruteForceShapley(ModelBlackBox(m), x, 1, Tensor({d}, 0.0));
    EXPECT_LT(MaxAbsDiff(shap, exact), 1e-6) << "d = " << d;
    const double delta = Logits(m, x)[1] - Logits(m, Tensor({d}, 0.0))[1];
    EXPECT_NEAR(Sum(exact), delta, 1e-9);
  }
}

TEST(SurrogateTest, SampledKernelShapKeepsEfficiency) {
  const Model m = RandomReluNet(5, 12, {8}, 2);
  const Tensor x = RandomTensor({12}, 5);
  Params p;
  p.Set("baseline", "zero").Set("coalition_budget", 300.0);
  const Tensor shap = Explain("kernel_shap", m, x, 0, p, 8).values;
  const double delta = Logits(m, x)[0] - Logits(m, Tensor({12}, 0.0))[0];
  EXPECT_NEAR(Sum(shap), delta, 1e-8);
}

TEST(SurrogateTest, BruteForceShapleyAxioms) {
  // Dummy feature gets zero; symmetric features get equal shares.
  Layer dense = DenseLayer(3, 2);
  dense.weights = Tensor({2, 3}, {2.0, 2.0, 0.0, 0.0, 0.0, 0.0});
  const Model m({3}, 2, {dense});
  const Tensor phi =
      BruteForceShapley(ModelBlackBox(m), Tensor::Vector({1, 1, 5}), 0,
                        Tensor({3}, 0.0));
  EXPECT_NEAR(phi[0], phi[1], 1e-15);
  EXPECT_EQ(phi[2], 0.0);
  EXPECT_THROW(BruteForceShapley(ModelBlackBox(RandomReluNet(1, 17, {2}, 2)),
                                 Tensor({17}), 0, Tensor({17})),
               Error);
}

TEST(SisTest, RetainedSetIsSufficientAndEachFeatureNecessary) {
  const Model m = RandomReluNet(8, 6, {10}, 2);
  Tensor x = RandomTensor({6}, 30);
  const int t = ArgMax(Logits(m, x));
  const double tau = 0.5 * (0.5 + Predict(m, x)[t]);
  Params p;
  p.Set("confidence_threshold", tau).Set("replacement", "zero");
  const Tensor s = Explain("sis", m, x, t, p, 0).values;
  Tensor kept({6}, 0.0);
  for (int i = 0; i < 6; ++i) {
    ASSERT_TRUE(s[i] == 0.0 || s[i] == 1.0);
    if (s[i] == 1.0) kept[i] = x[i];
  }
  EXPECT_GE(Predict(m, kept)[t], tau);
  for (int i = 0; i < 6; ++i) {
    if (s[i] != 1.0) continue;
    Tensor fewer = kept;
    fewer[i] = 0.0;
    EXPECT_LT(Predict(m, fewer)[t], tau) << "feature " << i;
  }
  p.Set("confidence_threshold", 0.999999);
  if (Predict(m, x)[t] < 0.999999) {
    EXPECT_EQ(KindOf([&] { Explain("sis", m, x, t, p, 0); }),
              ErrorKind::kPrecondition);
  }
}

TEST(BlackBoxTest, BlackBoxMethodsNeedOnlyOutputs) {
  const Model m = InitializeParameters(MlpArch(4, 5, 3), 9);
  const Tensor x = RandomTensor({4, 4}, 2);
  const FunctionBlackBox box(m.input_shape(), m.class_count(),
                             [&](const Tensor& in) { return Logits(m, in); });
  for (const std::string id : {"occlusion", "rise", "lime", "kernel_shap"}) {
    Params p;
    if (id == "rise") p.Set("mask_count", 20.0);
    if (id == "lime") p.Set("sample_count", 50.0);
    if (id == "kernel_shap") p.Set("coalition_budget", 50.0);
    EXPECT_EQ(ExplainBlackBox(id, box, x, 0, p, 4).values,
              Explain(id, m, x, 0, p, 4).values)
        << id;
  }
  EXPECT_EQ(KindOf([&] {
              ExplainBlackBox("vanilla_gradients", box, x, 0, {}, 0);
            }),
            ErrorKind::kUnsupportedArchitecture);
}

TEST(UtilityTest, BilinearResizeHalfPixel) {
  const std::vector<double> g = {0, 1, 2, 3};
  EXPECT_EQ(BilinearResize(g, 2, 2, 2, 2), g);
  const std::vector<double> up = BilinearResize(g, 2, 2, 4, 4);
  const std::vector<double> row0 = {0, 0.25, 0.75, 1};
  const std::vector<double> row1 = {0.5, 0.75, 1.25, 1.5};
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(up[c], row0[c], 1e-15);
    EXPECT_NEAR(up[4 + c], row1[c], 1e-15);
  }
  for (double v : BilinearResize({2, 2, 2, 2, 2, 2}, 2, 3, 5, 7)) {
    EXPECT_NEAR(v, 2.0, 1e-15);
  }
}

TEST(UtilityTest, RankByMagnitudeBreaksTiesByIndex) {
  EXPECT_EQ(RankByMagnitude(Tensor::Vector({1, -3, 3, 0, -1})),
            (std::vector<size_t>{1, 2, 0, 4, 3}));
}

TEST(UtilityTest, ResolveFill) {
  const Tensor x = Tensor::Vector({1, 3});
  EXPECT_EQ(ResolveFill("zero", x, {}), Tensor::Vector({0, 0}));
  EXPECT_EQ(ResolveFill("ones", x, {}), Tensor::Vector({1, 1}));
  EXPECT_EQ(ResolveFill("mean", x, {}), Tensor::Vector({2, 2}));
  EXPECT_EQ(ResolveFill("mean", x, Tensor::Vector({5, 6})),
            Tensor::Vector({5, 6}));
  EXPECT_EQ(ResolveFill(0.5, x, {}), Tensor::Vector({0.5, 0.5}));
  EXPECT_THROW(ResolveFill("purple", x, {}), Error);
}

}  // namespace
}  // namespace salcard
