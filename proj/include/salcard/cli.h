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

#ifndef SALCARD_CLI_H_
#define SALCARD_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "salcard/saliency.h"

namespace salcard {

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

// `args` excludes the program name. Subcommands: evaluate, compare,
// validate, profile, train, synth-data, explain. Only reads and writes the
// files named on the command line.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Plain (P2) PGM heat grid of |map|, scaled so the largest magnitude is 255.
// Channels are summed; rank-1 maps become a single row.
std::string RenderPgm(const Tensor& map);

}  // namespace salcard

#endif  // SALCARD_CLI_H_
