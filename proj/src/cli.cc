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

#include "salcard/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "salcard/battery.h"
#include "salcard/card.h"
#include "salcard/data.h"
#include "salcard/error.h"
#include "salcard/fixtures.h"
#include "salcard/model.h"
#include "salcard/profiler.h"
#include "salcard/random.h"
#include "salcard/train.h"

namespace salcard {

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kFormat, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kFormat, "cannot write " + path);
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool IsMarkdownPath(const std::string& path) {
  return EndsWith(path, ".md") || EndsWith(path, ".markdown");
}

ParamValue ParseParamText(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (!text.empty() && end == text.c_str() + text.size() && std::isfinite(v)) {
    return v;
  }
  return text;
}

// Options shared by the subcommands that run a battery or a profile.
struct RunFlags {
  std::string model_path;
  std::string data_path;
  std::string method;
  std::string out_path;
  std::string config_path;
  uint64_t seed = 0;
  bool quick = false;
  bool no_timing = false;
  int jobs = 1;
};

void AddRunFlags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--model", f.model_path, "Model JSON file")->required();
  cmd->add_option("--data", f.data_path,
                  "Dataset JSON file or directory")->required();
  cmd->add_option("--method", f.method, "Saliency method id")->required();
  cmd->add_option("--out", f.out_path,
                  "Card output (.md for Markdown, JSON otherwise)")
      ->required();
  cmd->add_option("--config", f.config_path, "Battery config JSON file");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_flag("--quick", f.quick, "Shrink Monte-Carlo budgets 10x");
  cmd->add_flag("--no-timing", f.no_timing,
                "Omit wall-clock fields for byte-stable output");
}

BatteryConfig LoadConfig(const RunFlags& f) {
  BatteryConfig config = f.config_path.empty()
                             ? DefaultBatteryConfig()
                             : LoadBatteryConfigFile(f.config_path);
  if (f.quick) config = QuickPreset(config);
  return config;
}

void WriteCard(const SaliencyCard& card, const std::string& path) {
  WriteFile(path, IsMarkdownPath(path) ? RenderMarkdown(card)
                                       : RenderJson(card));
}

int Evaluate(const RunFlags& f, bool methodology_only, std::ostream& out) {
  const BatteryConfig config = LoadConfig(f);
  const Model model = LoadModelFile(f.model_path);
  const Dataset data = LoadDatasetPath(f.data_path);
  const MethodDescriptor& descriptor = Describe(f.method);
  const Provenance provenance{std::string(kToolName),
                              std::string(kToolVersion), config.preset,
                              f.seed};
  SaliencyCard card;
  if (methodology_only) {
    ProfileOptions p = config.profile;
    p.timing = !f.no_timing;
    const Profile profile = ProfileMethod(
        ConfiguredMethod(f.method, config, data), model, data.inputs, p);
    card = BuildCard(descriptor, profile, {}, provenance);
  } else {
    BatteryOptions options;
    options.seed = f.seed;
    options.jobs = f.jobs;
    options.timing = !f.no_timing;
    const BatteryRun run = RunBattery(f.method, model, data, config, options);
    card = BuildCard(descriptor, run.profile, run.results, provenance);
    for (const std::string& s : run.skipped) {
      card.caveats.push_back("Not evaluated: " + s + ".");
    }
  }
  WriteCard(card, f.out_path);
  out << "wrote " << f.out_path << "\n";
  return kExitOk;
}

int Compare(const std::vector<std::string>& paths, const std::string& out_path,
            const std::string& scope, std::ostream& out) {
  std::vector<SaliencyCard> cards;
  for (const std::string& p : paths)
    cards.push_back(ParseCardJson(ReadFile(p)));
  MatrixScope s;
  if (scope == "evaluations") {
    s = MatrixScope::kEvaluations;
  } else if (scope == "methodology") {
    s = MatrixScope::kMethodology;
  } else {
    throw CLI::ValidationError("--scope",
                               "must be evaluations or methodology");
  }
  const ComparisonMatrix m = CompareMatrix(cards, s);
  const std::string text =
      EndsWith(out_path, ".json") ? m.ToJson().dump(2) + "\n" : m.ToMarkdown();
  if (out_path.empty()) {
    out << text;
  } else {
    WriteFile(out_path, text);
  }
  return kExitOk;
}

int Validate(const std::vector<std::string>& paths, std::ostream& out,
             std::ostream& err) {
  int status = kExitOk;
  for (const std::string& p : paths) {
    const std::vector<std::string> violations = ValidateCard(ReadFile(p));
    if (violations.empty()) {
      out << p << ": valid\n";
      continue;
    }
    status = kExitDomainError;
    for (const std::string& v : violations) err << p << ": " << v << "\n";
  }
  return status;
}

int TrainFixture(const std::string& arch_name, const std::string& data_path,
                 const std::string& out_path, uint64_t seed, int epochs,
                 std::ostream& out) {
  const Dataset data = LoadDatasetPath(data_path);
  if (data.size() == 0) {
    throw Error(ErrorKind::kPrecondition, "training set is empty");
  }
  const Shape& shape = data.inputs.front().shape();
  std::optional<Model> arch;
  if (arch_name == "cnn" || arch_name == "mlp") {
    if (shape.size() != 2 || shape[0] != shape[1]) {
      throw Error(ErrorKind::kShape, arch_name + " fixture needs square " +
                                         "(side, side) inputs, got " +
                                         ShapeToString(shape));
    }
    arch = arch_name == "cnn"
               ? CnnArch(static_cast<int>(shape[0]), data.class_count)
               : MlpArch(static_cast<int>(shape[0]), 32, data.class_count);
  } else {
    throw CLI::ValidationError("--arch", "must be cnn or mlp");
  }
  TrainConfig cfg = FixtureTrainConfig(DeriveSeed(seed, 1));
  if (epochs > 0) cfg.epochs = epochs;
  const TrainResult r =
      Train(InitializeParameters(*arch, DeriveSeed(seed, 0)), data, cfg);
  SaveModelFile(r.model, out_path);
  char line[128];
  std::snprintf(line, sizeof(line), "train accuracy %.4f, final loss %.6f\n",
                r.train_accuracy, r.final_loss);
  out << line;
  return kExitOk;
}

int ExplainOne(const std::string& model_path, const std::string& data_path,
               const std::string& method, size_t index,
               std::optional<int> target,
               const std::vector<std::string>& params, uint64_t seed,
               const std::string& out_path, const std::string& pgm_path) {
  const Model model = LoadModelFile(model_path);
  const Dataset data = LoadDatasetPath(data_path);
  if (index >= data.size()) {
    throw Error(ErrorKind::kIndex, "input index " + std::to_string(index) +
                                       " out of range for " +
                                       std::to_string(data.size()) +
                                       " inputs");
  }
  Params p;
  p.reference = data.FeatureMean();
  for (const std::string& kv : params) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw CLI::ValidationError("--param", "expected name=value, got " + kv);
    }
    p.Set(kv.substr(0, eq), ParseParamText(kv.substr(eq + 1)));
  }
  const Tensor& x = data.inputs[index];
  const int t = target.value_or(ArgMax(Logits(model, x)));
  const SaliencyMap map = Explain(method, model, x, t, p, seed);
  nlohmann::ordered_json j;
  j["method_id"] = map.method_id;
  j["target"] = map.target;
  j["index"] = index;
  if (map.seed) {
    j["seed"] = *map.seed;
  } else {
    j["seed"] = nullptr;
  }
  j["shape"] = map.values.shape();
  j["values"] = map.values.data();
  WriteFile(out_path, j.dump(2) + "\n");
  if (!pgm_path.empty()) WriteFile(pgm_path, RenderPgm(map.values));
  return kExitOk;
}

}  // namespace

std::string RenderPgm(const Tensor& map) {
  int height = 1, width = static_cast<int>(map.size()), channels = 1;
  if (map.rank() >= 2) {
    const SpatialLayout l = SpatialLayout::Of(map.shape());
    height = l.height;
    width = l.width;
    channels = l.channels;
  }
  std::vector<double> grid(static_cast<size_t>(height) * width, 0.0);
  for (int c = 0; c < channels; ++c) {
    for (size_t i = 0; i < grid.size(); ++i) {
      grid[i] += std::fabs(map[c * grid.size() + i]);
    }
  }
  const double top = grid.empty() ? 0.0
                                  : *std::max_element(grid.begin(), grid.end());
  std::ostringstream out;
  out << "P2\n" << width << " " << height << "\n255\n";
  for (int r = 0; r < height; ++r) {
    for (int col = 0; col < width; ++col) {
      const double v = grid[static_cast<size_t>(r) * width + col];
      const long level = top > 0.0 ? std::lround(255.0 * v / top) : 0;
      out << level << (col + 1 < width ? " " : "\n");
    }
  }
  return out.str();
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Saliency card toolkit"};
  app.name("salcard");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  RunFlags eval_flags;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Run the battery and write a card");
  AddRunFlags(evaluate, eval_flags);
  evaluate->add_option("--jobs", eval_flags.jobs, "Concurrent battery jobs")
      ->check(CLI::PositiveNumber);

  RunFlags profile_flags;
  CLI::App* profile =
      app.add_subcommand("profile", "Write a methodology-only card");
  AddRunFlags(profile, profile_flags);

  std::vector<std::string> compare_paths;
  std::string compare_out, compare_scope = "evaluations";
  CLI::App* compare =
      app.add_subcommand("compare", "Build a comparison matrix from cards");
  compare->add_option("cards", compare_paths, "Card JSON files")->required();
  compare->add_option("--out", compare_out,
                      "Output (.json for JSON, Markdown otherwise)");
  compare->add_option("--scope", compare_scope,
                      "evaluations or methodology");

  std::vector<std::string> validate_paths;
  CLI::App* validate =
      app.add_subcommand("validate", "Lint cards; violations go to stderr");
  validate->add_option("cards", validate_paths, "Card files")->required();

  std::string train_arch = "cnn", train_data, train_out;
  uint64_t train_seed = 0;
  int train_epochs = 0;
  CLI::App* train = app.add_subcommand("train", "Train a fixture model");
  train->add_option("--arch", train_arch, "cnn or mlp");
  train->add_option("--data", train_data, "Training dataset")->required();
  train->add_option("--out", train_out, "Model JSON output")->required();
  train->add_option("--seed", train_seed, "Initialization seed");
  train->add_option("--epochs", train_epochs,
                    "Epoch override (default from the fixture config)");

  SynthConfig synth;
  std::string synth_out;
  CLI::App* synth_cmd =
      app.add_subcommand("synth-data", "Write a synthetic ground-truth set");
  synth_cmd->add_option("--out", synth_out, "Dataset JSON output")->required();
  synth_cmd->add_option("--count", synth.count, "Number of images");
  synth_cmd->add_option("--side", synth.image_side, "Image side");
  synth_cmd->add_option("--patch", synth.patch_side, "Patch side");
  synth_cmd->add_option("--classes", synth.class_count, "Class count");
  synth_cmd->add_option("--noise", synth.noise_std, "Noise std");
  synth_cmd->add_option("--seed", synth.seed, "Seed");

  std::string ex_model, ex_data, ex_method, ex_out, ex_pgm;
  size_t ex_index = 0;
  int ex_target = -1;
  uint64_t ex_seed = 0;
  std::vector<std::string> ex_params;
  CLI::App* explain =
      app.add_subcommand("explain", "Explain one input; JSON and PGM output");
  explain->add_option("--model", ex_model, "Model JSON file")->required();
  explain->add_option("--data", ex_data, "Dataset")->required();
  explain->add_option("--method", ex_method, "Saliency method id")
      ->required();
  explain->add_option("--index", ex_index, "Input index");
  explain->add_option("--target", ex_target, "Target class (default argmax)");
  explain->add_option("--param", ex_params, "name=value, repeatable");
  explain->add_option("--seed", ex_seed, "Seed");
  explain->add_option("--out", ex_out, "Map JSON output")->required();
  explain->add_option("--pgm", ex_pgm, "Heat grid PGM output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "salcard: " << e.what() << "\n\n" << app.help();
    return kExitUsageError;
  }

  try {
    if (*evaluate) return Evaluate(eval_flags, false, out);
    if (*profile) return Evaluate(profile_flags, true, out);
    if (*compare)
      return Compare(compare_paths, compare_out, compare_scope, out);
    if (*validate) return Validate(validate_paths, out, err);
    if (*train) {
      return TrainFixture(train_arch, train_data, train_out, train_seed,
                          train_epochs, out);
    }
    if (*synth_cmd) {
      SaveDatasetFile(SynthGroundTruth(synth), synth_out);
      return kExitOk;
    }
    if (*explain) {
      std::optional<int> target;
      if (ex_target >= 0) target = ex_target;
      return ExplainOne(ex_model, ex_data, ex_method, ex_index, target,
                        ex_params, ex_seed, ex_out, ex_pgm);
    }
  } catch (const CLI::ValidationError& e) {
    err << "salcard: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    err << "salcard: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "salcard: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageError;
}

}  // namespace salcard
