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

#include "groundqa/hash.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/sha.h>

#include <array>
#include <chrono>
#include <random>

namespace groundqa {

std::string content_hash128(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
    std::string out;
    out.reserve(32);
    for (std::size_t i = 0; i < 16; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string make_document_id(std::string_view file_name, std::string_view content) {
    std::string buf;
    buf.reserve(file_name.size() + content.size() + 1);
    buf.append(file_name);
    buf.push_back('\0');
    buf.append(content);
    return content_hash128(buf);
}

std::string make_chunk_id(std::string_view document_id, std::size_t chunk_index, std::string_view text) {
    return content_hash128(fmt::format("{}\x1f{}\x1f{}", document_id, chunk_index, text));
}

std::string random_id128() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    return fmt::format("{:016x}{:016x}", rng(), rng());
}

std::string utc_timestamp() {
    auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

}  // namespace groundqa
