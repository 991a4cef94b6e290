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

#ifndef SALCARD_EVALUATION_H_
#define SALCARD_EVALUATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salcard/saliency.h"
#include "salcard/tensor.h"

namespace salcard {

enum class Attribute {
  kInputSensitivity,
  kLabelSensitivity,
  kModelSensitivity,
  kMinimality,
  kPerceptualCorrespondence,
};

std::string_view AttributeName(Attribute attribute);
// Throws kVocabulary for unknown names.
Attribute ParseAttribute(std::string_view name);

enum class Verdict { kPass, kFail, kInconclusive };

std::string_view VerdictName(Verdict verdict);
// Throws kVocabulary for anything outside {pass, fail, inconclusive}.
Verdict ParseVerdict(std::string_view name);

enum class CompareOp { kLess, kLessEqual, kGreater, kGreaterEqual };

std::string_view CompareOpSymbol(CompareOp op);
CompareOp ParseCompareOp(std::string_view symbol);

using Scores = std::map<std::string, double>;

// `score op value`. A predicate on a score absent from the map is false.
struct Predicate {
  std::string score;
  CompareOp op = CompareOp::kLess;
  double value = 0.0;

  bool Holds(const Scores& scores) const;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Verdict rule: inconclusive if any guard fails; otherwise pass if pass_if
// holds, fail if fail_if holds, inconclusive in between. pass_if and fail_if
// name the same score and describe disjoint regions.
struct ThresholdSpec {
  Predicate pass_if;
  Predicate fail_if;
  std::vector<Predicate> guards;

  // Throws kPrecondition when the two regions overlap or name different
  // scores.
  void Validate() const;
  Verdict Apply(const Scores& scores) const;
  friend bool operator==(const ThresholdSpec&, const ThresholdSpec&) = default;
};

ThresholdSpec MakeThreshold(const std::string& score, CompareOp pass_op,
                            double pass_value, CompareOp fail_op,
                            double fail_value);

struct EvalResult {
  std::string metric_id;
  Attribute attribute = Attribute::kInputSensitivity;
  Scores scores;
  Verdict verdict = Verdict::kInconclusive;
  ThresholdSpec threshold_spec;
  std::vector<uint64_t> seeds;
  double runtime_seconds = 0.0;
  std::vector<std::string> notes;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

// Fills `verdict` from the scores; throws kNumeric on non-finite scores.
EvalResult Conclude(std::string metric_id, Attribute attribute, Scores scores,
                    ThresholdSpec spec, std::vector<uint64_t> seeds);

nlohmann::ordered_json PredicateToJson(const Predicate& p);
Predicate PredicateFromJson(const nlohmann::ordered_json& j);
nlohmann::ordered_json ThresholdToJson(const ThresholdSpec& spec);
ThresholdSpec ThresholdFromJson(const nlohmann::ordered_json& j);
nlohmann::ordered_json EvalResultToJson(const EvalResult& result);
// Throws kFormat on missing or mistyped fields.
EvalResult EvalResultFromJson(const nlohmann::ordered_json& j);

enum class SimilarityMetric { kSpearman, kPearson };

std::string_view SimilarityMetricName(SimilarityMetric metric);
SimilarityMetric ParseSimilarityMetric(std::string_view name);

// Ranks with ties sharing their average rank, 1-based.
std::vector<double> AverageRanks(const std::vector<double>& values);
// Correlation of two equally long samples; 0 when either is constant.
double PearsonCorrelation(const std::vector<double>& a,
                          const std::vector<double>& b);
double SpearmanCorrelation(const std::vector<double>& a,
                           const std::vector<double>& b);

// Correlation of |a| and |b|; 0 when either magnitude map is constant.
double SaliencySimilarity(
    const Tensor& a, const Tensor& b,
    SimilarityMetric metric = SimilarityMetric::kSpearman);
double SaliencySimilarity(
    const SaliencyMap& a, const SaliencyMap& b,
    SimilarityMetric metric = SimilarityMetric::kSpearman);

// True when |values| is constant, so every correlation against it is 0.
bool IsConstantMagnitude(const Tensor& values);

}  // namespace salcard

#endif  // SALCARD_EVALUATION_H_
