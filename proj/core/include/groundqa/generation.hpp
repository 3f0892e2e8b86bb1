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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundqa/gateway.hpp"
#include "groundqa/retrieval.hpp"
#include "groundqa/store.hpp"

namespace groundqa {

inline constexpr std::string_view kDefaultSentinel = "not enough context";

inline constexpr std::string_view kDefaultAnswerSystemTemplate =
    "You answer questions about the user's documents. Answer only from the numbered excerpts supplied with the "
    "question; do not add outside knowledge. Direct quotations from the source are preferred. Mark each excerpt you "
    "rely on with its [n] number. If the excerpts do not support an answer, reply exactly with \"{sentinel}\".";

struct GenerationConfig {
    std::string model;
    double temperature = 0.1;
    int context_window = 32000;
    std::size_t context_budget_chars = 96000;  ///< system + prompt, in bytes
    std::size_t history_turns = 5;
    std::string sentinel{kDefaultSentinel};
    bool refusal_exact_match = false;
    std::string system_template{kDefaultAnswerSystemTemplate};  ///< "{sentinel}" is substituted

    void validate() const;
};

struct Citation {
    std::string chunk_id;
    std::string file_name;
    int page_number = 1;
    std::string text;
    double rerank_score = 0.0;

    bool operator==(const Citation&) const = default;
};

struct PromptBundle {
    std::string system;
    std::string context_block;
    std::string history_block;  ///< empty when there is no history
    std::string question;
    std::vector<Citation> chunks;  ///< the chunks rendered into context_block, in order
    std::size_t dropped_chunks = 0;

    /// The user prompt as sent to the generator.
    std::string prompt() const;
};

/// Numbers chunks [1..n] with "({file}, p.{page})" labels, keeps the last
/// history_turns turns, and drops chunks from the tail while the rendered
/// system + prompt exceeds the context budget.
PromptBundle build_prompt(std::span<const Citation> chunks, std::span<const ConversationTurn> history,
                          std::string_view question, const GenerationConfig& config);

/// Lowercases, collapses whitespace and trims surrounding punctuation and
/// quotes, then matches the sentinel exactly or, unless exact is set, as a
/// word-bounded phrase starting within the first 40 characters.
bool detect_refusal(std::string_view response, std::string_view sentinel = kDefaultSentinel, bool exact = false);

struct Answer {
    std::string text;
    bool insufficient_context = false;
    std::vector<Citation> citations;
    std::optional<std::string> error;
    std::optional<RetrievalTrace> trace;
    std::size_t turn_index = 0;

    nlohmann::json to_json(bool include_trace) const;
};

/// retrieve -> build prompt -> generate -> refusal check -> persist turn.
/// Calls on one conversation are serialized; different conversations run
/// concurrently.
class AnswerEngine {
  public:
    AnswerEngine(Store& store, const RetrievalPipeline& pipeline, Generator& generator, GenerationConfig config);

    /// Throws NotFound for an unknown conversation or scoped document and
    /// InvalidArgument for an empty question. With nothing indexed the
    /// generator is not called and the answer is the sentinel.
    Answer answer_query(std::string_view conversation_id, std::string_view question,
                        const std::optional<std::string>& document_id = std::nullopt);

    const GenerationConfig& config() const noexcept { return config_; }

  private:
    std::mutex& conversation_mutex(std::string_view conversation_id);
    Answer refuse(std::string_view conversation_id, std::string_view question, std::optional<std::string> error);

    Store& store_;
    const RetrievalPipeline& pipeline_;
    Generator& generator_;
    GenerationConfig config_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> locks_;
};

}  // namespace groundqa
