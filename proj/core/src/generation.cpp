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


#include "groundqa/generation.hpp"

#include <fmt/format.h>

#include <cctype>
#include <nlohmann/json.hpp>

#include "groundqa/error.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

namespace {

constexpr std::size_t kRefusalWindow = 40;

std::string render_sentinel(std::string_view tmpl, std::string_view sentinel) {
    std::string out(tmpl);
    constexpr std::string_view kSlot = "{sentinel}";
    for (auto pos = out.find(kSlot); pos != std::string::npos; pos = out.find(kSlot, pos + sentinel.size())) {
        out.replace(pos, kSlot.size(), sentinel);
    }
    return out;
}

std::string render_context(std::span<const Citation> chunks) {
    if (chunks.empty()) return "Excerpts:\nNo relevant excerpts found.";
    std::string out = "Excerpts:\n";
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += fmt::format("[{}] ({}, p.{})\n{}", i + 1, chunks[i].file_name, chunks[i].page_number, chunks[i].text);
    }
    return out;
}

bool is_trim_char(std::string_view s, std::size_t pos, std::size_t& width) {
    const auto c = static_cast<unsigned char>(s[pos]);
    width = 1;
    if (c < 0x80) return std::ispunct(c) || text::is_space(static_cast<char>(c));
    // Curly quotes U+2018, U+2019, U+201C, U+201D.
    if (c == 0xE2 && pos + 2 < s.size() && static_cast<unsigned char>(s[pos + 1]) == 0x80) {
        const auto d = static_cast<unsigned char>(s[pos + 2]);
        if (d == 0x98 || d == 0x99 || d == 0x9C || d == 0x9D) {
            width = 3;
            return true;
        }
    }
    return false;
}

std::string normalize_response(std::string_view raw) {
    std::string s = text::normalize_whitespace(text::to_lower(raw));
    std::string_view v = s;
    std::size_t w = 0;
    while (!v.empty() && is_trim_char(v, 0, w)) v.remove_prefix(w);
    while (!v.empty()) {
        // Step back over one trailing character (ASCII or a 3-byte quote).
        std::size_t start = v.size() - 1;
        if (v.size() >= 3 && static_cast<unsigned char>(v[v.size() - 3]) == 0xE2) start = v.size() - 3;
        if (!is_trim_char(v, start, w) || start + w != v.size()) break;
        v.remove_suffix(w);
    }
    return std::string(v);
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80; }

}  // namespace

void GenerationConfig::validate() const {
    if (temperature < 0.0) raise(ErrorCode::kInvalidArgument, "generate.temperature must be >= 0");
    if (context_window <= 0) raise(ErrorCode::kInvalidArgument, "generate.num_ctx must be > 0");
    if (context_budget_chars == 0) raise(ErrorCode::kInvalidArgument, "generate.context_budget_chars must be > 0");
    if (text::count_non_space(sentinel) == 0) raise(ErrorCode::kInvalidArgument, "generate.sentinel must be non-empty");
}

std::string PromptBundle::prompt() const {
    std::string out = context_block;
    if (!history_block.empty()) out += "\n\nConversation so far:\n" + history_block;
    out += "\n\nQuestion: " + question;
    return out;
}

PromptBundle build_prompt(std::span<const Citation> chunks, std::span<const ConversationTurn> history,
                          std::string_view question, const GenerationConfig& config) {
    PromptBundle b;
    b.system = render_sentinel(config.system_template, config.sentinel);
    b.question = std::string(text::strip(question));
    const std::size_t keep = std::min(history.size(), config.history_turns);
    for (std::size_t i = history.size() - keep; i < history.size(); ++i) {
        if (!b.history_block.empty()) b.history_block += "\n";
        b.history_block += fmt::format("Q: {}\nA: {}", history[i].question, history[i].answer);
    }
    b.chunks.assign(chunks.begin(), chunks.end());
    for (;;) {
        b.context_block = render_context(b.chunks);
        if (b.chunks.empty() || b.system.size() + b.prompt().size() <= config.context_budget_chars) break;
        b.chunks.pop_back();
        ++b.dropped_chunks;
    }
    return b;
}

bool detect_refusal(std::string_view response, std::string_view sentinel, bool exact) {
    const std::string s = normalize_response(response);
    const std::string target = normalize_response(sentinel);
    if (target.empty()) return false;
    if (s == target) return true;
    if (exact) return false;
    for (auto pos = s.find(target); pos != std::string::npos && pos < kRefusalWindow; pos = s.find(target, pos + 1)) {
        const bool left = pos == 0 || !word_char(s[pos - 1]);
        const std::size_t end = pos + target.size();
        const bool right = end == s.size() || !word_char(s[end]);
        if (left && right) return true;
    }
    return false;
}

nlohmann::json Answer::to_json(bool include_trace) const {
    using nlohmann::json;
    json cites = json::array();
    for (const auto& c : citations) {
        cites.push_back({{"chunk_id", c.chunk_id},
                         {"file_name", c.file_name},
                         {"page_number", c.page_number},
                         {"text", c.text},
                         {"score", c.rerank_score}});
    }
    json j{{"answer", text}, {"insufficient_context", insufficient_context}, {"citations", std::move(cites)},
           {"turn_index", turn_index}};
    if (error) j["error"] = *error;
    if (include_trace && trace) j["trace"] = trace->to_json();
    return j;
}

AnswerEngine::AnswerEngine(Store& store, const RetrievalPipeline& pipeline, Generator& generator,
                           GenerationConfig config)
    : store_(store), pipeline_(pipeline), generator_(generator), config_(std::move(config)) {
    config_.validate();
}

std::mutex& AnswerEngine::conversation_mutex(std::string_view conversation_id) {
    std::lock_guard lock(locks_mutex_);
    auto it = locks_.find(conversation_id);
    if (it == locks_.end()) it = locks_.emplace(std::string(conversation_id), std::make_unique<std::mutex>()).first;
    return *it->second;
}

Answer AnswerEngine::refuse(std::string_view conversation_id, std::string_view question,
                            std::optional<std::string> error) {
    Answer a;
    a.text = config_.sentinel;
    a.insufficient_context = true;
    a.error = std::move(error);
    ConversationTurn turn;
    turn.question = std::string(question);
    turn.answer = a.text;
    turn.insufficient_context = true;
    a.turn_index = store_.append_turn(conversation_id, std::move(turn)).turn_index;
    return a;
}

Answer AnswerEngine::answer_query(std::string_view conversation_id, std::string_view question,
                                  const std::optional<std::string>& document_id) {
    if (text::count_non_space(question) == 0) raise(ErrorCode::kInvalidArgument, "question must be non-empty");
    if (!store_.has_conversation(conversation_id)) {
        raise(ErrorCode::kNotFound, fmt::format("conversation {} not found", conversation_id));
    }
    if (document_id) store_.get_document(*document_id);
    std::lock_guard lock(conversation_mutex(conversation_id));

    if (store_.chunk_count() == 0) return refuse(conversation_id, question, std::nullopt);
    auto retrieved = pipeline_.run(question, document_id);
    if (retrieved.chunks.empty()) return refuse(conversation_id, question, std::nullopt);

    std::vector<Citation> citations;
    citations.reserve(retrieved.chunks.size());
    for (const auto& r : retrieved.chunks) {
        citations.push_back({r.chunk.chunk_id, r.file_name, r.chunk.page_number, r.chunk.text, r.score});
    }
    const auto history = store_.get_history(conversation_id, config_.history_turns);
    auto bundle = build_prompt(citations, history, question, config_);
    retrieved.trace.dropped_for_budget = bundle.dropped_chunks;

    GenerationRequest req;
    req.model = config_.model;
    req.system = bundle.system;
    req.prompt = bundle.prompt();
    req.temperature = config_.temperature;
    req.context_window = config_.context_window;

    std::string response;
    try {
        response = generator_.generate(req);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kBackendUnavailable && e.code() != ErrorCode::kContextOverflow) throw;
        Answer a = refuse(conversation_id, question, std::string(e.what()));
        a.trace = std::move(retrieved.trace);
        return a;
    }

    Answer a;
    a.insufficient_context = detect_refusal(response, config_.sentinel, config_.refusal_exact_match);
    a.text = a.insufficient_context ? config_.sentinel : std::string(text::strip(response));
    a.citations = std::move(bundle.chunks);
    a.trace = std::move(retrieved.trace);

    ConversationTurn turn;
    turn.question = std::string(question);
    turn.answer = a.text;
    turn.insufficient_context = a.insufficient_context;
    for (const auto& c : a.citations) turn.citation_chunk_ids.push_back(c.chunk_id);
    a.turn_index = store_.append_turn(conversation_id, std::move(turn)).turn_index;
    return a;
}

}  // namespace groundqa
