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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "groundqa/gateway.hpp"

namespace groundqa {

struct SentenceSpan {
    std::size_t index = 0;
    std::string text;
    std::size_t start_offset = 0;  ///< byte offset of the first character
    std::size_t end_offset = 0;    ///< one past the last character

    bool operator==(const SentenceSpan&) const = default;
};

enum class BreakpointMethod { kStandardDeviation, kPercentile, kGradient };

std::string_view to_string(BreakpointMethod m) noexcept;
BreakpointMethod parse_breakpoint_method(std::string_view name);

struct SemanticChunkConfig {
    BreakpointMethod method = BreakpointMethod::kStandardDeviation;
    double amount = 1.0;  ///< σ multiplier, or quantile fraction in (0,1]
    std::size_t buffer_size = 1;

    void validate() const;
};

struct RecursiveChunkConfig {
    std::size_t chunk_size = 1000;
    std::size_t overlap = 200;

    void validate() const;
};

using ChunkerConfig = std::variant<SemanticChunkConfig, RecursiveChunkConfig>;

/// Stable human-readable name, e.g. "semantic/standard_deviation/1" or
/// "recursive/750/200". Used as the config column of benchmark reports.
std::string describe(const ChunkerConfig& config);

/// A contiguous retrieval unit. Provenance fields are filled by ingestion;
/// the chunkers only set text, offsets and chunk_index.
struct Chunk {
    std::string chunk_id;
    std::string document_id;
    int page_number = 0;
    std::string text;
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    std::size_t chunk_index = 0;
    Vector embedding;
};

/// Sentence boundaries fall after '.', '?' or '!' followed by whitespace or end
/// of text, except after known abbreviations and mid-sentence initials. A
/// blank line always ends a sentence. Spans exclude surrounding whitespace.
std::vector<SentenceSpan> split_sentences(std::string_view text);

/// d_i = 1 - cos(e(group_i), e(group_{i+1})) where group_i joins the sentences
/// within buffer_size of i. Requires at least two sentences.
std::vector<double> consecutive_distances(std::span<const SentenceSpan> sentences, Embedder& embedder,
                                          std::size_t buffer_size);

/// Linear-interpolation quantile of values, q in [0,1].
double quantile(std::span<const double> values, double q);

/// Indices i such that a chunk boundary follows sentence i. Constant input
/// yields an empty set.
std::set<std::size_t> compute_breakpoints(std::span<const double> distances, const SemanticChunkConfig& config);

std::vector<Chunk> semantic_chunk(std::string_view text, const SemanticChunkConfig& config, Embedder& embedder);

std::vector<Chunk> recursive_chunk(std::string_view text, const RecursiveChunkConfig& config);

/// Dispatches on the config alternative. The embedder is unused for the
/// recursive chunker.
std::vector<Chunk> chunk_text(std::string_view text, const ChunkerConfig& config, Embedder& embedder);

}  // namespace groundqa
