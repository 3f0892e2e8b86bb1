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
#include <cstdint>
#include <string>
#include <string_view>

namespace groundqa {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// SHA-256 of data, truncated to 128 bits and rendered as 32 lowercase hex digits.
std::string content_hash128(std::string_view data);

std::string make_document_id(std::string_view file_name, std::string_view content);

std::string make_chunk_id(std::string_view document_id, std::size_t chunk_index, std::string_view text);

/// Random 128-bit identifier in hex, for conversations.
std::string random_id128();

/// Current UTC time as an ISO-8601 string with second precision.
std::string utc_timestamp();

}  // namespace groundqa
