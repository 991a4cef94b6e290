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

#include "salcard/error.h"

#include <cmath>

#include "salcard/random.h"

namespace salcard {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape:
      return "shape";
    case ErrorKind::kIndex:
      return "index";
    case ErrorKind::kFormat:
      return "format";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kPrecondition:
      return "precondition";
    case ErrorKind::kTraining:
      return "training";
    case ErrorKind::kDegenerate:
      return "degenerate";
    case ErrorKind::kUnsupportedArchitecture:
      return "unsupported-architecture";
    case ErrorKind::kVocabulary:
      return "vocabulary";
    case ErrorKind::kParse:
      return "parse";
  }
  return "unknown";
}

uint64_t Rng::UniformInt(uint64_t n) {
  if (n <= 1) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % n;
}

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

}  // namespace salcard
