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

#ifndef SALCARD_ENCODING_H_
#define SALCARD_ENCODING_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace salcard {

std::string Base64Encode(const std::vector<uint8_t>& bytes);
// Throws kFormat on characters outside the standard alphabet or bad padding.
std::vector<uint8_t> Base64Decode(std::string_view text);

// Little-endian IEEE-754 binary64, base64 encoded.
std::string EncodeDoubles(const std::vector<double>& values);
std::vector<double> DecodeDoubles(std::string_view text);

}  // namespace salcard

#endif  // SALCARD_ENCODING_H_
