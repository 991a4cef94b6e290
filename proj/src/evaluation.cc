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

#include "salcard/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "salcard/error.h"

namespace salcard {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kAttributeNames[] = {
    "input_sensitivity", "label_sensitivity", "model_sensitivity",
    "minimality", "perceptual_correspondence"};

bool IsLower(CompareOp op) {
  return op == CompareOp::kLess || op == CompareOp::kLessEqual;
}

bool IsStrict(CompareOp op) {
  return op == CompareOp::kLess || op == CompareOp::kGreater;
}

template <typename T>
T Field(const ordered_json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kFormat, std::string("missing field \"") + key +
                                        "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kFormat,
                std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

std::string_view AttributeName(Attribute attribute) {
  return kAttributeNames[static_cast<int>(attribute)];
}

Attribute ParseAttribute(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kAttributeNames[i] == name) return static_cast<Attribute>(i);
  }
  throw Error(ErrorKind::kVocabulary,
              "unknown attribute \"" + std::string(name) + "\"");
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Verdict ParseVerdict(std::string_view name) {
  if (name == "pass") return Verdict::kPass;
  if (name == "fail") return Verdict::kFail;
  if (name == "inconclusive") return Verdict::kInconclusive;
  throw Error(ErrorKind::kVocabulary,
              "verdict \"" + std::string(name) +
                  "\" not in {pass, fail, inconclusive}");
}

std::string_view CompareOpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kLess:
      return "<";
    case CompareOp::kLessEqual:
      return "<=";
    case CompareOp::kGreater:
      return ">";
    case CompareOp::kGreaterEqual:
      return ">=";
  }
  return "<";
}

CompareOp ParseCompareOp(std::string_view symbol) {
  if (symbol == "<") return CompareOp::kLess;
  if (symbol == "<=") return CompareOp::kLessEqual;
  if (symbol == ">") return CompareOp::kGreater;
  if (symbol == ">=") return CompareOp::kGreaterEqual;
  throw Error(ErrorKind::kFormat,
              "unknown comparison \"" + std::string(symbol) + "\"");
}

bool Predicate::Holds(const Scores& scores) const {
  auto it = scores.find(score);
  if (it == scores.end()) return false;
  const double v = it->second;
  switch (op) {
    case CompareOp::kLess:
      return v < value;
    case CompareOp::kLessEqual:
      return v <= value;
    case CompareOp::kGreater:
      return v > value;
    case CompareOp::kGreaterEqual:
      return v >= value;
  }
  return false;
}

void ThresholdSpec::Validate() const {
  if (pass_if.score != fail_if.score) {
    throw Error(ErrorKind::kPrecondition,
                "pass_if and fail_if must test the same score");
  }
  bool disjoint = false;
  if (IsLower(pass_if.op) != IsLower(fail_if.op)) {
    const Predicate& lo = IsLower(pass_if.op) ? pass_if : fail_if;
    const Predicate& hi = IsLower(pass_if.op) ? fail_if : pass_if;
    disjoint = lo.value < hi.value ||
               (lo.value == hi.value && (IsStrict(lo.op) || IsStrict(hi.op)));
  }
  if (!disjoint) {
    throw Error(ErrorKind::kPrecondition,
                "pass_if and fail_if regions overlap for score \"" +
                    pass_if.score + "\"");
  }
}

Verdict ThresholdSpec::Apply(const Scores& scores) const {
  for (const Predicate& g : guards) {
    if (!g.Holds(scores)) return Verdict::kInconclusive;
  }
  if (pass_if.Holds(scores)) return Verdict::kPass;
  if (fail_if.Holds(scores)) return Verdict::kFail;
  return Verdict::kInconclusive;
}

ThresholdSpec MakeThreshold(const std::string& score, CompareOp pass_op,
                            double pass_value, CompareOp fail_op,
                            double fail_value) {
  ThresholdSpec spec{{score, pass_op, pass_value},
                     {score, fail_op, fail_value},
                     {}};
  spec.Validate();
  return spec;
}

EvalResult Conclude(std::string metric_id, Attribute attribute, Scores scores,
                    ThresholdSpec spec, std::vector<uint64_t> seeds) {
  for (const auto& [name, value] : scores) {
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::kNumeric,
                  metric_id + " score \"" + name + "\" is not finite");
    }
  }
  spec.Validate();
  EvalResult r;
  r.metric_id = std::move(metric_id);
  r.attribute = attribute;
  r.verdict = spec.Apply(scores);
  r.scores = std::move(scores);
  r.threshold_spec = std::move(spec);
  r.seeds = std::move(seeds);
  return r;
}

ordered_json PredicateToJson(const Predicate& p) {
  ordered_json j;
  j["score"] = p.score;
  j["op"] = std::string(CompareOpSymbol(p.op));
  j["value"] = p.value;
  return j;
}

Predicate PredicateFromJson(const ordered_json& j) {
  return {Field<std::string>(j, "score"),
          ParseCompareOp(Field<std::string>(j, "op")),
          Field<double>(j, "value")};
}

ordered_json ThresholdToJson(const ThresholdSpec& spec) {
  ordered_json j;
  j["pass_if"] = PredicateToJson(spec.pass_if);
  j["fail_if"] = PredicateToJson(spec.fail_if);
  ordered_json guards = ordered_json::array();
  for (const Predicate& g : spec.guards) guards.push_back(PredicateToJson(g));
  j["guards"] = guards;
  return j;
}

ThresholdSpec ThresholdFromJson(const ordered_json& j) {
  ThresholdSpec spec;
  spec.pass_if = PredicateFromJson(Field<ordered_json>(j, "pass_if"));
  spec.fail_if = PredicateFromJson(Field<ordered_json>(j, "fail_if"));
  if (j.contains("guards")) {
    for (const ordered_json& g : j.at("guards")) {
      spec.guards.push_back(PredicateFromJson(g));
    }
  }
  return spec;
}

ordered_json EvalResultToJson(const EvalResult& r) {
  ordered_json j;
  j["metric_id"] = r.metric_id;
  j["attribute"] = std::string(AttributeName(r.attribute));
  ordered_json scores = ordered_json::object();
  for (const auto& [name, value] : r.scores) scores[name] = value;
  j["scores"] = scores;
  j["verdict"] = std::string(VerdictName(r.verdict));
  j["threshold_spec"] = ThresholdToJson(r.threshold_spec);
  j["seeds"] = r.seeds;
  j["runtime_seconds"] = r.runtime_seconds;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

EvalResult EvalResultFromJson(const ordered_json& j) {
  EvalResult r;
  r.metric_id = Field<std::string>(j, "metric_id");
  r.attribute = ParseAttribute(Field<std::string>(j, "attribute"));
  r.scores = Field<std::map<std::string, double>>(j, "scores");
  r.verdict = ParseVerdict(Field<std::string>(j, "verdict"));
  r.threshold_spec =
      ThresholdFromJson(Field<ordered_json>(j, "threshold_spec"));
  r.seeds = Field<std::vector<uint64_t>>(j, "seeds");
  r.runtime_seconds = Field<double>(j, "runtime_seconds");
  if (j.contains("notes"))
    r.notes = Field<std::vector<std::string>>(j, "notes");
  return r;
}

std::string_view SimilarityMetricName(SimilarityMetric metric) {
  return metric == SimilarityMetric::kSpearman ? "spearman" : "pearson";
}

SimilarityMetric ParseSimilarityMetric(std::string_view name) {
  if (name == "spearman") return SimilarityMetric::kSpearman;
  if (name == "pearson") return SimilarityMetric::kPearson;
  throw Error(ErrorKind::kPrecondition,
              "similarity metric must be spearman or pearson");
}

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double PearsonCorrelation(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kShape, "correlation of samples of unequal length");
  }
  const size_t n = a.size();
  if (n == 0) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double SpearmanCorrelation(const std::vector<double>& a,
                           const std::vector<double>& b) {
  return PearsonCorrelation(AverageRanks(a), AverageRanks(b));
}

bool IsConstantMagnitude(const Tensor& values) {
  for (size_t i = 1; i < values.size(); ++i) {
    if (std::fabs(values[i]) != std::fabs(values[0])) return false;
  }
  return true;
}

double SaliencySimilarity(const Tensor& a, const Tensor& b,
                          SimilarityMetric metric) {
  RequireSameShape(a, b, "saliency similarity");
  std::vector<double> ma(a.size()), mb(b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    ma[i] = std::fabs(a[i]);
    mb[i] = std::fabs(b[i]);
  }
  return metric == SimilarityMetric::kSpearman ? SpearmanCorrelation(ma, mb)
                                               : PearsonCorrelation(ma, mb);
}

double SaliencySimilarity(const SaliencyMap& a, const SaliencyMap& b,
                          SimilarityMetric metric) {
  return SaliencySimilarity(a.values, b.values, metric);
}

}  // namespace salcard
