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

#include "salcard/card.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "salcard/error.h"

namespace salcard {

using nlohmann::ordered_json;

namespace {

constexpr Attribute kInput = Attribute::kInputSensitivity;
constexpr Attribute kLabel = Attribute::kLabelSensitivity;
constexpr Attribute kModel = Attribute::kModelSensitivity;
constexpr Attribute kMinimal = Attribute::kMinimality;
constexpr Attribute kPerceptual = Attribute::kPerceptualCorrespondence;

constexpr Attribute kAllAttributes[] = {kInput, kLabel, kModel, kMinimal,
                                        kPerceptual};

struct Heading {
  const char* key;
  const char* title;
};

constexpr Heading kMethodologyHeadings[] = {
    {"determinism", "Determinism"},
    {"hyperparameter_dependence", "Hyperparameter Dependence"},
    {"model_agnosticism", "Model Agnosticism"},
    {"computational_efficiency", "Computational Efficiency"},
    {"semantic_directness", "Semantic Directness"},
};

constexpr const char* kSectionTitles[] = {
    "Summary", "References", "Methodology", "Sensitivity Testing",
    "Perceptibility Testing", "Caveats"};

// JSON section and key of each evaluated attribute.
struct Placement {
  Attribute attribute;
  const char* section;
  const char* key;
  const char* title;
};

constexpr Placement kPlacements[] = {
    {kInput, "sensitivity", "input", "Input Sensitivity"},
    {kLabel, "sensitivity", "label", "Label Sensitivity"},
    {kModel, "sensitivity", "model", "Model Sensitivity"},
    {kMinimal, "perceptibility", "minimality", "Minimality"},
    {kPerceptual, "perceptibility", "perceptual_correspondence",
     "Perceptual Correspondence"},
};

std::vector<MetricInfo> BuildVocabulary() {
  return {
      {"completeness", "Completeness", kInput, true,
       "Sundararajan et al. 2017"},
      {"deletion", "Deletion", kInput, true, "Petsiuk et al. 2018"},
      {"faithfulness", "Faithfulness", kInput, false,
       "Alvarez-Melis and Jaakkola 2018"},
      {"infidelity", "Infidelity", kInput, true, "Yeh et al. 2019"},
      {"input_consistency", "Input Consistency", kInput, false,
       "Ding and Koehn 2021"},
      {"input_invariance", "Input Invariance", kInput, true,
       "Kindermans et al. 2019"},
      {"insertion", "Insertion", kInput, true, "Petsiuk et al. 2018"},
      {"perturbation_testing_lerf", "Perturbation Testing (LeRF)", kInput,
       false, "Ancona et al. 2017"},
      {"perturbation_testing_morf", "Perturbation Testing (MoRF)", kInput,
       false, "Ancona et al. 2017"},
      {"region_perturbation", "Region Perturbation", kInput, false,
       "Samek et al. 2016"},
      {"roar", "ROAR", kInput, true, "Hooker et al. 2019"},
      {"robustness", "Robustness", kInput, false,
       "Alvarez-Melis and Jaakkola 2018"},
      {"sensitivity", "Sensitivity", kInput, true, "Yeh et al. 2019"},
      {"stability", "Stability", kInput, false,
       "Alvarez-Melis and Jaakkola 2018"},
      {"sufficiency", "Sufficiency", kInput, false, "Carter et al. 2019"},
      {"data_randomization", "Data Randomization", kLabel, true,
       "Adebayo et al. 2018"},
      {"model_contrast_score", "Model Contrast Score", kLabel, false,
       "Yang and Kim 2019"},
      {"cascading_model_randomization", "Cascading Model Randomization", kModel,
       true, "Adebayo et al. 2018"},
      {"implementation_invariance", "Implementation Invariance", kModel, false,
       "Sundararajan et al. 2017"},
      {"independent_model_randomization", "Independent Model Randomization",
       kModel, true, "Adebayo et al. 2018"},
      {"linearity", "Linearity", kModel, false, "Sundararajan et al. 2017"},
      {"model_consistency", "Model Consistency", kModel, false,
       "Ding and Koehn 2021"},
      {"model_weight_randomization", "Model Weight Randomization", kModel,
       false, "Arun et al. 2020"},
      {"repeatability", "Repeatability", kModel, true, "Arun et al. 2020"},
      {"reproducibility", "Reproducibility", kModel, false, "Arun et al. 2020"},
      {"minimality", "Minimality", kMinimal, true, "Carter et al. 2019"},
      {"sparsity", "Sparsity", kMinimal, true, "Gomez et al. 2022"},
      {"visual_sharpening", "Visual Sharpening", kMinimal, true,
       "Smilkov et al. 2017"},
      {"localization_utility", "Localization Utility", kPerceptual, false,
       "Arun et al. 2020"},
      {"luminosity_calibration", "Luminosity Calibration", kPerceptual, true,
       "Gomez et al. 2022"},
      {"mean_iou", "Mean IoU", kPerceptual, true, "Saporta et al. 2022"},
      {"plausibility", "Plausibility", kPerceptual, false,
       "Ding and Koehn 2021"},
      {"pointing_game", "The Pointing Game", kPerceptual, true,
       "Zhang et al. 2016; Saporta et al. 2022"},
  };
}

// Shortest text that parses back to the same double.
std::string FormatNumber(double v) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string PredicateText(const Predicate& p) {
  return p.score + " " + std::string(CompareOpSymbol(p.op)) + " " +
         FormatNumber(p.value);
}

std::string ThresholdText(const ThresholdSpec& spec) {
  std::string text = "pass if " + PredicateText(spec.pass_if) +
                     "; fail if " + PredicateText(spec.fail_if);
  if (!spec.guards.empty()) {
    text += "; inconclusive unless";
    for (size_t i = 0; i < spec.guards.size(); ++i) {
      text += (i == 0 ? " " : " and ") + PredicateText(spec.guards[i]);
    }
  }
  return text;
}

std::string EscapeCell(std::string text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string ResultLine(const ordered_json& result) {
  std::string out;
  for (auto it = result.begin(); it != result.end(); ++it) {
    if (!out.empty()) out += ", ";
    out += it.key() + " = ";
    if (it->is_number_float()) {
      out += FormatNumber(it->get<double>());
    } else if (it->is_string()) {
      out += it->get<std::string>();
    } else {
      out += it->dump();
    }
  }
  return out;
}

ordered_json MethodologyJson(const MethodologyField& f) {
  ordered_json j;
  j["text"] = f.text;
  if (!f.result.is_null()) j["result"] = f.result;
  return j;
}

std::string Where(const std::string& text, size_t byte) {
  size_t line = 1, column = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

ordered_json ParseText(std::string_view text) {
  const std::string s(text);
  try {
    return ordered_json::parse(s);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, "parse error at " +
                                       Where(s, e.byte > 0 ? e.byte - 1 : 0) +
                                       ": malformed JSON");
  }
}

const ordered_json& Require(const ordered_json& j, const char* key,
                            const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kFormat,
                where + " is missing \"" + std::string(key) + "\"");
  }
  return j.at(key);
}

std::string RequireString(const ordered_json& j, const char* key,
                          const std::string& where) {
  const ordered_json& v = Require(j, key, where);
  if (!v.is_string()) {
    throw Error(ErrorKind::kFormat,
                where + "." + key + " must be a string");
  }
  return v.get<std::string>();
}

std::vector<std::string> RequireStrings(const ordered_json& j, const char* key,
                                        const std::string& where) {
  const ordered_json& v = Require(j, key, where);
  std::vector<std::string> out;
  if (!v.is_array()) {
    throw Error(ErrorKind::kFormat, where + "." + key + " must be an array");
  }
  for (const ordered_json& e : v) {
    if (!e.is_string()) {
      throw Error(ErrorKind::kFormat,
                  where + "." + key + " must hold strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string CellFor(const std::vector<EvalResult>& results,
                    const std::string& metric_id) {
  bool seen = false, all_pass = true, any_fail = false;
  for (const EvalResult& r : results) {
    if (r.metric_id != metric_id) continue;
    seen = true;
    all_pass = all_pass && r.verdict == Verdict::kPass;
    any_fail = any_fail || r.verdict == Verdict::kFail;
  }
  if (!seen) return "";
  if (any_fail) return "✗";
  return all_pass ? "✓" : "—";
}

void ValidateMarkdown(std::string_view text, std::vector<std::string>& out) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> h2, h3;
  bool h1 = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) h1 = true;
    if (line.rfind("## ", 0) == 0) h2.push_back(line.substr(3));
    if (line.rfind("### ", 0) == 0) h3.push_back(line.substr(4));
  }
  if (!h1) out.push_back("missing H1 method name");
  size_t next = 0;
  for (const char* title : kSectionTitles) {
    auto it = std::find(h2.begin() + std::min(next, h2.size()), h2.end(),
                        std::string(title));
    if (it == h2.end()) {
      out.push_back("missing or misplaced section \"" + std::string(title) +
                    "\"");
    } else {
      next = static_cast<size_t>(it - h2.begin()) + 1;
    }
  }
  for (const Heading& h : kMethodologyHeadings) {
    if (std::find(h3.begin(), h3.end(), h.title) == h3.end()) {
      out.push_back("missing attribute section \"" + std::string(h.title) +
                    "\"");
    }
  }
  for (const Placement& p : kPlacements) {
    if (std::find(h3.begin(), h3.end(), p.title) == h3.end()) {
      out.push_back("missing attribute section \"" + std::string(p.title) +
                    "\"");
    }
  }
}

void ValidateResult(const ordered_json& r, const std::string& where,
                    Attribute section, std::vector<std::string>& out) {
  if (!r.is_object()) {
    out.push_back(where + ": result must be an object");
    return;
  }
  const MetricInfo* info = nullptr;
  if (!r.contains("metric_id") || !r.at("metric_id").is_string()) {
    out.push_back(where + ": missing metric_id");
  } else {
    const std::string id = r.at("metric_id").get<std::string>();
    info = FindMetric(id);
    if (info == nullptr) {
      out.push_back(where + ": unknown metric_id \"" + id + "\"");
    } else if (info->attribute != section) {
      out.push_back(where + ": result \"" + id + "\" under wrong attribute " +
                    std::string(AttributeName(section)) + "; belongs to " +
                    std::string(AttributeName(info->attribute)));
    }
  }
  if (r.contains("attribute")) {
    const ordered_json& a = r.at("attribute");
    if (!a.is_string() ||
        a.get<std::string>() != std::string(AttributeName(section))) {
      out.push_back(where + ": attribute field \"" +
                    (a.is_string() ? a.get<std::string>() : a.dump()) +
                    "\" disagrees with section " +
                    std::string(AttributeName(section)));
    }
  } else {
    out.push_back(where + ": missing attribute");
  }
  if (!r.contains("scores") || !r.at("scores").is_object()) {
    out.push_back(where + ": missing scores");
  } else {
    for (auto it = r.at("scores").begin(); it != r.at("scores").end(); ++it) {
      if (!it->is_number() || !std::isfinite(it->get<double>())) {
        out.push_back(where + ": score \"" + it.key() +
                      "\" is not a finite number");
      }
    }
  }
  if (r.contains("verdict")) {
    const ordered_json& v = r.at("verdict");
    const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
    if (name != "pass" && name != "fail" && name != "inconclusive") {
      out.push_back(where + ": verdict \"" + name +
                    "\" not in {pass, fail, inconclusive}");
    }
    if (!r.contains("threshold_spec")) {
      out.push_back(where + ": verdict without threshold_spec");
    } else {
      try {
        ThresholdFromJson(r.at("threshold_spec")).Validate();
      } catch (const Error& e) {
        out.push_back(where + ": invalid threshold_spec: " + e.what());
      }
    }
  } else {
    out.push_back(where + ": missing verdict");
  }
}

void ValidateJsonCard(const ordered_json& j, std::vector<std::string>& out) {
  if (!j.is_object()) {
    out.push_back("card must be a JSON object");
    return;
  }
  for (const char* key :
       {"schema_version", "method", "summary", "references", "methodology",
        "sensitivity", "perceptibility", "caveats"}) {
    if (!j.contains(key)) {
      out.push_back("missing field \"" + std::string(key) + "\"");
    }
  }
  if (j.contains("schema_version") &&
      j.at("schema_version") != kCardSchemaVersion) {
    out.push_back("unsupported schema_version " +
                  j.at("schema_version").dump());
  }
  if (j.contains("method")) {
    const ordered_json& m = j.at("method");
    for (const char* key : {"id", "name", "version"}) {
      if (!m.is_object() || !m.contains(key) || !m.at(key).is_string()) {
        out.push_back("method." + std::string(key) + " must be a string");
      }
    }
  }
  if (j.contains("methodology")) {
    const ordered_json& m = j.at("methodology");
    for (const Heading& h : kMethodologyHeadings) {
      if (!m.is_object() || !m.contains(h.key)) {
        out.push_back("missing attribute section methodology." +
                      std::string(h.key));
      } else if (!m.at(h.key).is_object() || !m.at(h.key).contains("text") ||
                 !m.at(h.key).at("text").is_string()) {
        out.push_back("methodology." + std::string(h.key) +
                      " needs a text string");
      }
    }
  }
  for (const Placement& p : kPlacements) {
    if (!j.contains(p.section)) continue;
    const ordered_json& s = j.at(p.section);
    const std::string where = std::string(p.section) + "." + p.key;
    if (!s.is_object() || !s.contains(p.key)) {
      out.push_back("missing attribute section " + where);
      continue;
    }
    if (!s.at(p.key).is_array()) {
      out.push_back(where + " must be an array");
      continue;
    }
    size_t i = 0;
    for (const ordered_json& r : s.at(p.key)) {
      ValidateResult(r, where + "[" + std::to_string(i++) + "]", p.attribute,
                     out);
    }
  }
}

}  // namespace

const std::vector<MetricInfo>& MetricVocabulary() {
  static const std::vector<MetricInfo> vocabulary = BuildVocabulary();
  return vocabulary;
}

const MetricInfo* FindMetric(std::string_view metric_id) {
  for (const MetricInfo& m : MetricVocabulary()) {
    if (m.metric_id == metric_id) return &m;
  }
  return nullptr;
}

std::vector<EvalResult>& SaliencyCard::Section(Attribute attribute) {
  switch (attribute) {
    case Attribute::kInputSensitivity:
      return input_sensitivity;
    case Attribute::kLabelSensitivity:
      return label_sensitivity;
    case Attribute::kModelSensitivity:
      return model_sensitivity;
    case Attribute::kMinimality:
      return minimality;
    case Attribute::kPerceptualCorrespondence:
      return perceptual_correspondence;
  }
  return input_sensitivity;
}

const std::vector<EvalResult>& SaliencyCard::Section(
    Attribute attribute) const {
  return const_cast<SaliencyCard*>(this)->Section(attribute);
}

SaliencyCard BuildCard(const MethodDescriptor& d,
                       const std::optional<Profile>& profile,
                       const std::vector<EvalResult>& results,
                       const Provenance& provenance) {
  SaliencyCard card;
  card.method_id = d.id;
  card.method_name = d.display_name;
  card.summary = d.summary;
  card.references = d.references;
  card.provenance = provenance;

  card.determinism.text = d.determinism_text;
  card.hyperparameter_dependence.text = d.hyperparameter_text;
  if (!d.hyperparameters.empty()) {
    std::string defaults = " Defaults:";
    for (size_t i = 0; i < d.hyperparameters.size(); ++i) {
      defaults += (i == 0 ? " " : ", ") + d.hyperparameters[i].name + " = " +
                  d.hyperparameters[i].default_value;
    }
    card.hyperparameter_dependence.text += defaults + ".";
  }
  card.model_agnosticism.text = d.agnosticism_text;
  card.computational_efficiency.text = d.efficiency_text;
  card.semantic_directness.text = d.semantic_directness_text;

  if (profile) {
    const DeterminismReport& det = profile->determinism;
    ordered_json r;
    r["classification"] =
        det.deterministic ? "deterministic" : "nondeterministic";
    r["max_deviation"] = det.max_deviation;
    r["declared_deterministic"] = det.declared_deterministic;
    r["mismatch"] = det.mismatch;
    r["runs"] = det.seeds.size();
    card.determinism.result = r;

    ordered_json h;
    if (!profile->hyperparameters.per_param_dispersion.empty()) {
      ordered_json per = ordered_json::object();
      for (const auto& [name, v] :
           profile->hyperparameters.per_param_dispersion) {
        per[name] = v;
      }
      h["dispersion"] = per;
      h["overall"] = profile->hyperparameters.overall;
      h["comparator"] = "1 - spearman(|map|)";
      card.hyperparameter_dependence.result = h;
    }

    ordered_json a;
    a["access_requirement"] =
        std::string(AccessRequirementName(profile->agnosticism.access));
    if (profile->agnosticism.black_box_verified) {
      a["black_box_verified"] = *profile->agnosticism.black_box_verified;
    }
    card.model_agnosticism.result = a;

    if (profile->efficiency) {
      ordered_json e;
      e["order_of_magnitude_seconds"] = profile->efficiency->order_of_magnitude;
      e["median_seconds"] = profile->efficiency->median_seconds;
      e["repetitions"] = profile->efficiency->repetitions;
      card.computational_efficiency.result = e;
    }
  }

  for (const EvalResult& r : results) {
    const MetricInfo* info = FindMetric(r.metric_id);
    if (info == nullptr) {
      throw Error(ErrorKind::kVocabulary,
                  "unknown metric_id \"" + r.metric_id + "\"");
    }
    if (info->attribute != r.attribute) {
      throw Error(ErrorKind::kPrecondition,
                  "result \"" + r.metric_id + "\" carries attribute " +
                      std::string(AttributeName(r.attribute)) +
                      " but belongs to " +
                      std::string(AttributeName(info->attribute)));
    }
    card.Section(r.attribute).push_back(r);
  }

  card.caveats.push_back(
      "Similarities compare absolute attribution values with Spearman rank "
      "correlation; a constant map scores 0 against anything.");
  card.caveats.push_back(
      "Verdict thresholds are configuration and partly subjective; every "
      "verdict lists the threshold that produced it.");
  card.caveats.push_back(
      "Model randomization results cannot certify that a randomized model is "
      "a meaningfully different model; they only show whether the map "
      "changed.");
  card.caveats.push_back(
      "Localization scores assume the model relies on the ground-truth "
      "features. They are computed on synthetic data built to make that "
      "true, but a faithful method can still score low on a model that uses "
      "spurious signal.");
  card.caveats.push_back(
      "Visual sharpening has no standard metric; it is reported as the gain "
      "in sparsity ratio over plain vanilla gradients.");
  if (d.HasHyperparameter("baseline")) {
    card.caveats.push_back(
        "Baselines carry meaning: a zero or constant baseline treats inputs "
        "equal to it as unimportant, which misleads where dark or constant "
        "regions are informative.");
  }
  if (provenance.preset == "quick") {
    card.caveats.push_back(
        "Produced with the quick preset: Monte-Carlo budgets are reduced "
        "tenfold.");
  }
  return card;
}

std::string RenderMarkdown(const SaliencyCard& card) {
  std::ostringstream md;
  md << "# " << card.method_name << " Saliency Card\n\n";
  md << "## Summary\n\n" << card.summary << "\n\n";
  md << "Method id: `" << card.method_id << "`, version " << card.method_version
     << ".\n";
  if (card.example_output) {
    md << "\nExample output: `" << *card.example_output << "`\n";
  }
  md << "\n## References\n\n";
  if (card.references.empty()) md << "None listed.\n";
  for (const std::string& r : card.references) md << "- " << r << "\n";

  md << "\n## Methodology\n";
  const MethodologyField* fields[] = {
      &card.determinism, &card.hyperparameter_dependence,
      &card.model_agnosticism, &card.computational_efficiency,
      &card.semantic_directness};
  for (int i = 0; i < 5; ++i) {
    md << "\n### " << kMethodologyHeadings[i].title << "\n\n"
       << fields[i]->text << "\n";
    if (!fields[i]->result.is_null()) {
      md << "\nMeasured: " << ResultLine(fields[i]->result) << "\n";
    } else if (i < 4) {
      md << "\nMeasured: not yet evaluated.\n";
    }
  }

  auto section = [&](const Placement& p) {
    md << "\n### " << p.title << "\n\n";
    const std::vector<EvalResult>& results = card.Section(p.attribute);
    if (results.empty()) {
      md << "Not yet evaluated.\n";
      return;
    }
    md << "| Metric | Verdict | Scores | Threshold |\n"
       << "| --- | --- | --- | --- |\n";
    for (const EvalResult& r : results) {
      std::string scores;
      for (const auto& [name, v] : r.scores) {
        if (!scores.empty()) scores += ", ";
        scores += name + " = " + FormatNumber(v);
      }
      const MetricInfo* info = FindMetric(r.metric_id);
      md << "| " << (info ? info->display_name : r.metric_id) << " | "
         << VerdictName(r.verdict) << " | " << EscapeCell(scores) << " | "
         << EscapeCell(ThresholdText(r.threshold_spec)) << " |\n";
    }
    for (const EvalResult& r : results) {
      for (const std::string& note : r.notes) {
        md << "\nNote (" << r.metric_id << "): " << note << "\n";
      }
    }
  };
  md << "\n## Sensitivity Testing\n";
  for (int i = 0; i < 3; ++i) section(kPlacements[i]);
  md << "\n## Perceptibility Testing\n";
  for (int i = 3; i < 5; ++i) section(kPlacements[i]);

  md << "\n## Caveats\n\n";
  if (card.caveats.empty()) md << "None.\n";
  for (const std::string& c : card.caveats) md << "- " << c << "\n";
  md << "\n---\nGenerated by " << card.provenance.tool << " "
     << card.provenance.version << " (preset " << card.provenance.preset
     << ", seed " << card.provenance.seed << ").\n";
  return md.str();
}

ordered_json CardToJson(const SaliencyCard& card) {
  ordered_json j;
  j["schema_version"] = card.schema_version;
  j["method"] = {{"id", card.method_id},
                 {"name", card.method_name},
                 {"version", card.method_version}};
  j["summary"] = card.summary;
  j["references"] = card.references;
  if (card.example_output) j["example_output"] = *card.example_output;
  ordered_json m;
  m["determinism"] = MethodologyJson(card.determinism);
  m["hyperparameter_dependence"] =
      MethodologyJson(card.hyperparameter_dependence);
  m["model_agnosticism"] = MethodologyJson(card.model_agnosticism);
  m["computational_efficiency"] =
      MethodologyJson(card.computational_efficiency);
  m["semantic_directness"] = MethodologyJson(card.semantic_directness);
  j["methodology"] = m;
  for (const Placement& p : kPlacements) {
    ordered_json list = ordered_json::array();
    for (const EvalResult& r : card.Section(p.attribute)) {
      list.push_back(EvalResultToJson(r));
    }
    j[p.section][p.key] = list;
  }
  j["caveats"] = card.caveats;
  j["provenance"] = {{"tool", card.provenance.tool},
                     {"version", card.provenance.version},
                     {"preset", card.provenance.preset},
                     {"seed", card.provenance.seed}};
  return j;
}

std::string RenderJson(const SaliencyCard& card) {
  return CardToJson(card).dump(2) + "\n";
}

SaliencyCard ParseCardJson(std::string_view text) {
  const ordered_json j = ParseText(text);
  std::vector<std::string> violations;
  ValidateJsonCard(j, violations);
  if (!violations.empty()) {
    throw Error(ErrorKind::kFormat, "invalid card: " + violations.front());
  }
  SaliencyCard card;
  card.schema_version = j.at("schema_version").get<int>();
  const ordered_json& m = j.at("method");
  card.method_id = RequireString(m, "id", "method");
  card.method_name = RequireString(m, "name", "method");
  card.method_version = RequireString(m, "version", "method");
  card.summary = RequireString(j, "summary", "card");
  card.references = RequireStrings(j, "references", "card");
  if (j.contains("example_output")) {
    card.example_output = RequireString(j, "example_output", "card");
  }
  const ordered_json& meth = j.at("methodology");
  MethodologyField* fields[] = {
      &card.determinism, &card.hyperparameter_dependence,
      &card.model_agnosticism, &card.computational_efficiency,
      &card.semantic_directness};
  for (int i = 0; i < 5; ++i) {
    const ordered_json& f = meth.at(kMethodologyHeadings[i].key);
    fields[i]->text = f.at("text").get<std::string>();
    if (f.contains("result")) fields[i]->result = f.at("result");
  }
  for (const Placement& p : kPlacements) {
    for (const ordered_json& r : j.at(p.section).at(p.key)) {
      card.Section(p.attribute).push_back(EvalResultFromJson(r));
    }
  }
  card.caveats = RequireStrings(j, "caveats", "card");
  if (j.contains("provenance")) {
    const ordered_json& p = j.at("provenance");
    card.provenance.tool = RequireString(p, "tool", "provenance");
    card.provenance.version = RequireString(p, "version", "provenance");
    card.provenance.preset = RequireString(p, "preset", "provenance");
    const ordered_json& seed = Require(p, "seed", "provenance");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw Error(ErrorKind::kFormat, "provenance.seed must be an integer");
    }
    card.provenance.seed = seed.get<uint64_t>();
  }
  return card;
}

std::vector<std::string> ValidateCard(std::string_view text) {
  std::vector<std::string> out;
  const size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '#') {
    ValidateMarkdown(text, out);
    return out;
  }
  try {
    ValidateJsonCard(ParseText(text), out);
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  return out;
}

ComparisonMatrix CompareMatrix(const std::vector<SaliencyCard>& cards,
                               MatrixScope scope) {
  if (cards.empty()) {
    throw Error(ErrorKind::kPrecondition, "comparison needs at least one card");
  }
  ComparisonMatrix m;
  m.scope = scope;
  for (const SaliencyCard& c : cards) m.columns.push_back(c.method_id);
  if (scope == MatrixScope::kEvaluations) {
    for (Attribute a : kAllAttributes) {
      for (const MetricInfo& info : MetricVocabulary()) {
        if (info.attribute != a) continue;
        m.groups.push_back(std::string(AttributeName(a)));
        m.rows.push_back(info.metric_id);
        std::vector<std::string> row;
        for (const SaliencyCard& c : cards) {
          row.push_back(CellFor(c.Section(a), info.metric_id));
        }
        m.cells.push_back(std::move(row));
      }
    }
  } else {
    for (int i = 0; i < 5; ++i) {
      m.groups.push_back("methodology");
      m.rows.push_back(kMethodologyHeadings[i].key);
      std::vector<std::string> row;
      for (const SaliencyCard& c : cards) {
        const MethodologyField* fields[] = {
            &c.determinism, &c.hyperparameter_dependence,
            &c.model_agnosticism, &c.computational_efficiency,
            &c.semantic_directness};
        row.push_back(fields[i]->text);
      }
      m.cells.push_back(std::move(row));
    }
  }
  return m;
}

std::string ComparisonMatrix::ToMarkdown() const {
  std::ostringstream md;
  md << "| Attribute | " << (scope == MatrixScope::kEvaluations
                                  ? "Metric"
                                  : "Field");
  for (const std::string& c : columns) md << " | " << c;
  md << " |\n| --- | ---";
  for (size_t i = 0; i < columns.size(); ++i) md << " | ---";
  md << " |\n";
  for (size_t r = 0; r < rows.size(); ++r) {
    std::string label = rows[r];
    if (scope == MatrixScope::kEvaluations) {
      if (const MetricInfo* info = FindMetric(rows[r])) {
        label = info->display_name;
      }
    }
    md << "| " << groups[r] << " | " << label;
    for (const std::string& cell : cells[r]) md << " | " << EscapeCell(cell);
    md << " |\n";
  }
  if (scope == MatrixScope::kEvaluations) {
    md << "\n✓ pass, ✗ fail, — inconclusive, blank not tested.\n";
  }
  return md.str();
}

ordered_json ComparisonMatrix::ToJson() const {
  ordered_json j;
  j["scope"] = scope == MatrixScope::kEvaluations ? "evaluations"
                                                  : "methodology";
  j["columns"] = columns;
  ordered_json rows_json = ordered_json::array();
  for (size_t r = 0; r < rows.size(); ++r) {
    rows_json.push_back(
        {{"group", groups[r]}, {"id", rows[r]}, {"cells", cells[r]}});
  }
  j["rows"] = rows_json;
  return j;
}

}  // namespace salcard
