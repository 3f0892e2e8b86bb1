// Copyright 2026 the groundqa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small byte-oriented text helpers shared by ingestion, chunking, the stub
// backends and the metrics. Offsets are UTF-8 byte offsets throughout.
namespace groundqa::text {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view strip(std::string_view s) noexcept;

/// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercased word tokens. ASCII letters/digits and all non-ASCII bytes are
/// word characters; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

/// Truncates to at most max_bytes without splitting a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes) noexcept;

std::size_t count_non_space(std::string_view s) noexcept;

/// Non-whitespace bytes of s, in order.
std::string non_space_chars(std::string_view s);

}  // namespace groundqa::text
