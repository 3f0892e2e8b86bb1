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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundqa/gateway.hpp"
#include "groundqa/store.hpp"
#include "groundqa/vector_index.hpp"

namespace groundqa {

inline constexpr std::string_view kDefaultHydeTemplate =
    "Write a short passage, as it would appear in the document described below, that directly answers the user's "
    "question. Use only plausible document language. Document summary: {summary}";

inline constexpr std::string_view kDefaultMultiQueryTemplate =
    "Rewrite the user's question in 5 semantically different ways, one per line, numbered 1-5. Context summary: "
    "{summary}";

inline constexpr std::size_t kRewordingCount = 5;

struct RetrievalConfig {
    std::size_t k_per_list = 10;
    double rrf_k = 60.0;
    double fuse_top_p = 0.75;
    double rerank_top_p = 0.9;
    std::size_t max_context_chunks = 12;
    bool include_original_query = false;

    std::string model;  ///< generator model for HyDE and rewording prompts
    double temperature = 0.1;
    int context_window = 32000;
    std::string hyde_template{kDefaultHydeTemplate};
    std::string multi_query_template{kDefaultMultiQueryTemplate};
    std::size_t scope_summary_chars = 2000;

    void validate() const;
};

/// origin is "hyde", "reword_1".."reword_5" or "original_query".
struct RankedList {
    std::string origin;
    std::vector<SearchHit> hits;
};

struct FusedCandidate {
    std::string chunk_id;
    double rrf_score = 0.0;
    std::vector<std::string> contributing_origins;  ///< sorted
};

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;

    bool operator==(const ScoredChunk&) const = default;
};

struct StageText {
    std::string text;
    bool degraded = false;
};

struct Rewordings {
    std::vector<std::string> texts;  ///< always kRewordingCount entries
    bool degraded = false;
    std::size_t attempts = 0;
};

/// Replaces every "{summary}" in the template.
std::string render_template(std::string_view tmpl, std::string_view summary);

/// Falls back to the raw query, flagged degraded, when the backend is down
/// or returns nothing.
StageText hyde_generate(std::string_view query, std::string_view summary, Generator& generator,
                        const RetrievalConfig& config);

/// One rewording per non-empty line with leading "1.", "1)", "-", "*" or
/// "•" markers removed.
std::vector<std::string> parse_rewordings(std::string_view output);

/// Exactly five rewordings: one retry when fewer parse, then padding with the
/// original query. Backend failure yields five copies of the query.
Rewordings multi_query_generate(std::string_view query, std::string_view summary, Generator& generator,
                                const RetrievalConfig& config);

/// One list per input text: embed, then search_knn(k). Throws EmptyIndex.
std::vector<RankedList> retrieve_lists(std::span<const std::string> texts, std::span<const std::string> origins,
                                       Embedder& embedder, const Store& store, std::size_t k);

/// score(c) = sum over lists containing c of 1/(rrf_k + rank). Sorted by
/// score descending, ties by chunk_id ascending.
std::vector<FusedCandidate> rrf_fuse(std::span<const RankedList> lists, double rrf_k);

/// Length of the shortest prefix whose sum-normalized weight reaches p,
/// at least 1 and at most max_items. Scores must be sorted descending;
/// negative scores count as zero. All-zero scores keep only the first.
/// Throws EmptyCandidates.
std::size_t top_p_prefix(std::span<const double> scores, double p,
                         std::size_t max_items = std::numeric_limits<std::size_t>::max());

std::vector<FusedCandidate> top_p_filter(std::vector<FusedCandidate> candidates, double p,
                                         std::size_t max_items = std::numeric_limits<std::size_t>::max());
std::vector<ScoredChunk> top_p_filter(std::vector<ScoredChunk> candidates, double p,
                                      std::size_t max_items = std::numeric_limits<std::size_t>::max());

struct RerankOutcome {
    std::vector<ScoredChunk> scored;  ///< every candidate, score descending, ties by chunk_id
    std::vector<ScoredChunk> kept;    ///< top-p prefix of scored
    bool degraded = false;
};

/// Scores candidate texts against the original query. When the reranker is
/// unavailable the lexical reranker is used instead and the outcome is
/// flagged degraded.
RerankOutcome rerank(std::string_view query, std::span<const std::string> chunk_ids,
                     std::span<const std::string> texts, Reranker& reranker, double top_p,
                     std::size_t max_items = std::numeric_limits<std::size_t>::max());

struct RetrievalTrace {
    std::string query;
    std::string scope;  ///< "all" or the scoped document id
    std::string hypothetical_answer;
    bool hyde_degraded = false;
    std::vector<std::string> rewordings;
    bool multi_query_degraded = false;
    std::vector<RankedList> lists;
    std::vector<FusedCandidate> fused;
    std::size_t fused_kept = 0;
    std::vector<ScoredChunk> reranked;
    std::size_t rerank_kept = 0;
    bool rerank_degraded = false;
    std::vector<std::string> final_chunk_ids;
    std::size_t dropped_for_budget = 0;  ///< filled in by prompt assembly

    nlohmann::json to_json() const;
};

struct RetrievedChunk {
    ChunkRecord chunk;
    std::string file_name;
    double score = 0.0;  ///< rerank score
};

struct RetrievalResult {
    std::vector<RetrievedChunk> chunks;
    RetrievalTrace trace;
};

/// HyDE -> rewordings -> one list per text -> RRF -> top-p -> rerank ->
/// top-p. Stateless per call and safe to share across threads.
class RetrievalPipeline {
  public:
    RetrievalPipeline(const Store& store, Embedder& embedder, Generator& generator, Reranker& reranker,
                      RetrievalConfig config);

    /// Throws EmptyIndex when nothing is stored and NotFound for an unknown
    /// document scope.
    RetrievalResult run(std::string_view query, const std::optional<std::string>& document_id = std::nullopt) const;

    /// Summary of the scoped document, or every summary joined and cut to
    /// scope_summary_chars.
    std::string scope_summary(const std::optional<std::string>& document_id) const;

    const RetrievalConfig& config() const noexcept { return config_; }

  private:
    const Store& store_;
    Embedder& embedder_;
    Generator& generator_;
    Reranker& reranker_;
    RetrievalConfig config_;
};

}  // namespace groundqa
