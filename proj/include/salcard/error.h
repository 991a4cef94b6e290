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

#ifndef SALCARD_ERROR_H_
#define SALCARD_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace salcard {

// Coarse classification of failures. The CLI maps every ErrorKind to exit
// code 1 (domain error); usage errors never reach this type.
enum class ErrorKind {
  kShape,
  kIndex,
  kFormat,
  kNumeric,
  kPrecondition,
  kTraining,
  kDegenerate,
  kUnsupportedArchitecture,
  kVocabulary,
  kParse,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " +
                           message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace salcard

#endif  // SALCARD_ERROR_H_
