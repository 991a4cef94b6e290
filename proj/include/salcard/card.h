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

#ifndef SALCARD_CARD_H_
#define SALCARD_CARD_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salcard/evaluation.h"
#include "salcard/profiler.h"
#include "salcard/saliency.h"

namespace salcard {

inline constexpr int kCardSchemaVersion = 1;
inline constexpr std::string_view kToolName = "salcard";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct MetricInfo {
  std::string metric_id;
  std::string display_name;
  Attribute attribute;
  bool implemented;
  std::string citation;
};

// Every published evaluation metric, grouped by attribute; `implemented`
// marks the ones this battery runs.
const std::vector<MetricInfo>& MetricVocabulary();
// nullptr for unknown ids.
const MetricInfo* FindMetric(std::string_view metric_id);

struct MethodologyField {
  std::string text;
  // Measured evidence; null when not measured.
  nlohmann::ordered_json result;

  friend bool operator==(const MethodologyField&,
                         const MethodologyField&) = default;
};

struct Provenance {
  std::string tool = std::string(kToolName);
  std::string version = std::string(kToolVersion);
  std::string preset = "standard";
  uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SaliencyCard {
  int schema_version = kCardSchemaVersion;
  std::string method_id;
  std::string method_name;
  std::string method_version = std::string(kToolVersion);
  std::string summary;
  std::vector<std::string> references;
  std::optional<std::string> example_output;

  MethodologyField determinism;
  MethodologyField hyperparameter_dependence;
  MethodologyField model_agnosticism;
  MethodologyField computational_efficiency;
  MethodologyField semantic_directness;

  std::vector<EvalResult> input_sensitivity;
  std::vector<EvalResult> label_sensitivity;
  std::vector<EvalResult> model_sensitivity;
  std::vector<EvalResult> minimality;
  std::vector<EvalResult> perceptual_correspondence;

  std::vector<std::string> caveats;
  Provenance provenance;

  std::vector<EvalResult>& Section(Attribute attribute);
  const std::vector<EvalResult>& Section(Attribute attribute) const;

  friend bool operator==(const SaliencyCard&, const SaliencyCard&) = default;
};

// Routes each result to the section of its attribute. Throws kVocabulary for
// unknown metric ids and kPrecondition when a result's attribute disagrees
// with the vocabulary.
SaliencyCard BuildCard(const MethodDescriptor& descriptor,
                       const std::optional<Profile>& profile,
                       const std::vector<EvalResult>& results,
                       const Provenance& provenance = {});

std::string RenderMarkdown(const SaliencyCard& card);
nlohmann::ordered_json CardToJson(const SaliencyCard& card);
std::string RenderJson(const SaliencyCard& card);
// Throws kParse (with line and column) on malformed JSON and kFormat on
// schema problems.
SaliencyCard ParseCardJson(std::string_view text);

// Lints a card document (JSON, or Markdown when the text starts with '#').
// Empty iff the card is valid.
std::vector<std::string> ValidateCard(std::string_view text);

enum class MatrixScope { kMethodology, kEvaluations };

struct ComparisonMatrix {
  MatrixScope scope = MatrixScope::kEvaluations;
  std::vector<std::string> columns;  // method ids
  std::vector<std::string> groups;   // per row
  std::vector<std::string> rows;     // metric ids or methodology fields
  std::vector<std::vector<std::string>> cells;

  std::string ToMarkdown() const;
  nlohmann::ordered_json ToJson() const;
};

// Evaluation cells: "✓" every run passed, "✗" some run failed, "—"
// otherwise, "" not tested. Methodology cells hold the card text.
ComparisonMatrix CompareMatrix(const std::vector<SaliencyCard>& cards,
                               MatrixScope scope);

}  // namespace salcard

#endif  // SALCARD_CARD_H_
