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


#include "groundqa/retrieval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "groundqa/error.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

namespace {

bool backend_failure(const Error& e) {
    return e.code() == ErrorCode::kBackendUnavailable || e.code() == ErrorCode::kContextOverflow;
}

std::string question_prompt(std::string_view query) { return fmt::format("Question: {}", query); }

GenerationRequest stage_request(const RetrievalConfig& config, std::string system, std::string_view query) {
    GenerationRequest req;
    req.model = config.model;
    req.system = std::move(system);
    req.prompt = question_prompt(query);
    req.temperature = config.temperature;
    req.context_window = config.context_window;
    return req;
}

std::string_view strip_enumeration(std::string_view line) {
    line = text::strip(line);
    std::size_t i = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        line.remove_prefix(i + 1);
    } else if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
        line.remove_prefix(1);
    } else if (line.substr(0, 3) == "\xE2\x80\xA2") {
        line.remove_prefix(3);
    }
    return text::strip(line);
}

bool by_score_then_id(const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_id < b.chunk_id;
}

}  // namespace

void RetrievalConfig::validate() const {
    if (k_per_list == 0) raise(ErrorCode::kInvalidArgument, "retrieval.k_per_list must be >= 1");
    if (!(rrf_k >= 0.0)) raise(ErrorCode::kInvalidArgument, "retrieval.rrf_k must be >= 0");
    if (!(fuse_top_p > 0.0 && fuse_top_p <= 1.0)) raise(ErrorCode::kInvalidArgument, "retrieval.fuse_top_p must be in (0,1]");
    if (!(rerank_top_p > 0.0 && rerank_top_p <= 1.0)) {
        raise(ErrorCode::kInvalidArgument, "retrieval.rerank_top_p must be in (0,1]");
    }
    if (max_context_chunks == 0) raise(ErrorCode::kInvalidArgument, "retrieval.max_context_chunks must be >= 1");
    if (temperature < 0.0) raise(ErrorCode::kInvalidArgument, "temperature must be >= 0");
    if (context_window <= 0) raise(ErrorCode::kInvalidArgument, "context window must be > 0");
}

std::string render_template(std::string_view tmpl, std::string_view summary) {
    std::string out;
    constexpr std::string_view kSlot = "{summary}";
    std::size_t pos = 0;
    for (;;) {
        const auto hit = tmpl.find(kSlot, pos);
        if (hit == std::string_view::npos) break;
        out.append(tmpl.substr(pos, hit - pos));
        out.append(summary);
        pos = hit + kSlot.size();
    }
    out.append(tmpl.substr(pos));
    return out;
}

StageText hyde_generate(std::string_view query, std::string_view summary, Generator& generator,
                        const RetrievalConfig& config) {
    if (text::count_non_space(query) == 0) raise(ErrorCode::kInvalidArgument, "query must be non-empty");
    try {
        auto out = generator.generate(stage_request(config, render_template(config.hyde_template, summary), query));
        if (text::count_non_space(out) > 0) return {std::string(text::strip(out)), false};
    } catch (const Error& e) {
        if (!backend_failure(e)) throw;
    }
    return {std::string(query), true};
}

std::vector<std::string> parse_rewordings(std::string_view output) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= output.size()) {
        auto nl = output.find('\n', pos);
        if (nl == std::string_view::npos) nl = output.size();
        const auto line = strip_enumeration(output.substr(pos, nl - pos));
        if (!line.empty()) out.emplace_back(line);
        pos = nl + 1;
    }
    return out;
}

Rewordings multi_query_generate(std::string_view query, std::string_view summary, Generator& generator,
                                const RetrievalConfig& config) {
    if (text::count_non_space(query) == 0) raise(ErrorCode::kInvalidArgument, "query must be non-empty");
    Rewordings out;
    const auto req = stage_request(config, render_template(config.multi_query_template, summary), query);
    std::vector<std::string> best;
    for (int attempt = 0; attempt < 2 && best.size() < kRewordingCount; ++attempt) {
        ++out.attempts;
        try {
            auto parsed = parse_rewordings(generator.generate(req));
            if (parsed.size() > best.size()) best = std::move(parsed);
        } catch (const Error& e) {
            if (!backend_failure(e)) throw;
            out.degraded = true;
            break;
        }
    }
    if (best.size() > kRewordingCount) best.resize(kRewordingCount);
    while (best.size() < kRewordingCount) best.emplace_back(query);
    out.texts = std::move(best);
    return out;
}

std::vector<RankedList> retrieve_lists(std::span<const std::string> texts, std::span<const std::string> origins,
                                       Embedder& embedder, const Store& store, std::size_t k) {
    if (texts.size() != origins.size()) raise(ErrorCode::kInvalidArgument, "one origin per query text required");
    if (store.index_size() == 0) raise(ErrorCode::kEmptyIndex, "no chunks are indexed");
    std::vector<RankedList> lists;
    if (texts.empty()) return lists;
    const auto vectors = embedder.embed_batch(texts);
    lists.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) lists.push_back({origins[i], store.search(vectors[i], k)});
    return lists;
}

std::vector<FusedCandidate> rrf_fuse(std::span<const RankedList> lists, double rrf_k) {
    std::map<std::string, FusedCandidate> acc;
    for (const auto& list : lists) {
        for (const auto& hit : list.hits) {
            auto& c = acc[hit.chunk_id];
            c.chunk_id = hit.chunk_id;
            c.rrf_score += 1.0 / (rrf_k + static_cast<double>(hit.rank));
            c.contributing_origins.push_back(list.origin);
        }
    }
    std::vector<FusedCandidate> out;
    out.reserve(acc.size());
    for (auto& [id, c] : acc) {
        std::sort(c.contributing_origins.begin(), c.contributing_origins.end());
        c.contributing_origins.erase(std::unique(c.contributing_origins.begin(), c.contributing_origins.end()),
                                     c.contributing_origins.end());
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const FusedCandidate& a, const FusedCandidate& b) {
        if (a.rrf_score != b.rrf_score) return a.rrf_score > b.rrf_score;
        return a.chunk_id < b.chunk_id;
    });
    return out;
}

std::size_t top_p_prefix(std::span<const double> scores, double p, std::size_t max_items) {
    if (scores.empty()) raise(ErrorCode::kEmptyCandidates, "top-p filter needs at least one candidate");
    if (!(p > 0.0 && p <= 1.0)) raise(ErrorCode::kInvalidArgument, "top-p must be in (0,1]");
    const std::size_t cap = std::max<std::size_t>(1, std::min(max_items, scores.size()));
    double total = 0.0;
    for (double s : scores) total += std::max(0.0, s);
    if (!(total > 0.0)) return 1;
    constexpr double kTolerance = 1e-12;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < cap; ++i) {
        cumulative += std::max(0.0, scores[i]) / total;
        if (cumulative >= p - kTolerance) return i + 1;
    }
    return cap;
}

std::vector<FusedCandidate> top_p_filter(std::vector<FusedCandidate> candidates, double p, std::size_t max_items) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) scores.push_back(c.rrf_score);
    candidates.resize(top_p_prefix(scores, p, max_items));
    return candidates;
}

std::vector<ScoredChunk> top_p_filter(std::vector<ScoredChunk> candidates, double p, std::size_t max_items) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) scores.push_back(c.score);
    candidates.resize(top_p_prefix(scores, p, max_items));
    return candidates;
}

RerankOutcome rerank(std::string_view query, std::span<const std::string> chunk_ids,
                     std::span<const std::string> texts, Reranker& reranker, double top_p, std::size_t max_items) {
    if (chunk_ids.empty()) raise(ErrorCode::kEmptyCandidates, "rerank needs at least one candidate");
    if (chunk_ids.size() != texts.size()) raise(ErrorCode::kInvalidArgument, "one text per candidate required");
    RerankOutcome out;
    std::vector<double> scores;
    try {
        scores = reranker.rerank_scores(query, texts);
    } catch (const Error& e) {
        if (!backend_failure(e)) throw;
        LexicalReranker lexical;
        scores = lexical.rerank_scores(query, texts);
        out.degraded = true;
    }
    out.scored.reserve(chunk_ids.size());
    for (std::size_t i = 0; i < chunk_ids.size(); ++i) out.scored.push_back({chunk_ids[i], scores[i]});
    std::stable_sort(out.scored.begin(), out.scored.end(), by_score_then_id);
    out.kept = top_p_filter(out.scored, top_p, max_items);
    return out;
}

nlohmann::json RetrievalTrace::to_json() const {
    using nlohmann::json;
    json j;
    j["query"] = query;
    j["scope"] = scope;
    j["hypothetical_answer"] = hypothetical_answer;
    j["hyde_degraded"] = hyde_degraded;
    j["rewordings"] = rewordings;
    j["multi_query_degraded"] = multi_query_degraded;
    json jl = json::array();
    for (const auto& l : lists) {
        json hits = json::array();
        for (const auto& h : l.hits) hits.push_back({{"chunk_id", h.chunk_id}, {"similarity", h.similarity}, {"rank", h.rank}});
        jl.push_back({{"origin", l.origin}, {"hits", std::move(hits)}});
    }
    j["lists"] = std::move(jl);
    json jf = json::array();
    for (const auto& c : fused) {
        jf.push_back({{"chunk_id", c.chunk_id}, {"rrf_score", c.rrf_score}, {"origins", c.contributing_origins}});
    }
    j["fused"] = std::move(jf);
    j["fused_kept"] = fused_kept;
    json jr = json::array();
    for (const auto& c : reranked) jr.push_back({{"chunk_id", c.chunk_id}, {"score", c.score}});
    j["reranked"] = std::move(jr);
    j["rerank_kept"] = rerank_kept;
    j["rerank_degraded"] = rerank_degraded;
    j["final_chunk_ids"] = final_chunk_ids;
    j["dropped_for_budget"] = dropped_for_budget;
    return j;
}

RetrievalPipeline::RetrievalPipeline(const Store& store, Embedder& embedder, Generator& generator,
                                     Reranker& reranker, RetrievalConfig config)
    : store_(store), embedder_(embedder), generator_(generator), reranker_(reranker), config_(std::move(config)) {
    config_.validate();
}

std::string RetrievalPipeline::scope_summary(const std::optional<std::string>& document_id) const {
    if (document_id) return store_.get_document(*document_id).summary;
    std::string joined;
    for (const auto& d : store_.list_documents()) {
        if (!joined.empty()) joined += "\n\n";
        joined += d.summary;
        if (joined.size() >= config_.scope_summary_chars) break;
    }
    return std::string(text::utf8_prefix(joined, config_.scope_summary_chars));
}

RetrievalResult RetrievalPipeline::run(std::string_view query, const std::optional<std::string>& document_id) const {
    if (text::count_non_space(query) == 0) raise(ErrorCode::kInvalidArgument, "query must be non-empty");
    if (store_.index_size() == 0) raise(ErrorCode::kEmptyIndex, "no chunks are indexed");
    RetrievalResult result;
    auto& trace = result.trace;
    trace.query = std::string(query);
    trace.scope = document_id ? *document_id : "all";
    const std::string summary = scope_summary(document_id);

    const auto hyde = hyde_generate(query, summary, generator_, config_);
    trace.hypothetical_answer = hyde.text;
    trace.hyde_degraded = hyde.degraded;
    const auto rewordings = multi_query_generate(query, summary, generator_, config_);
    trace.rewordings = rewordings.texts;
    trace.multi_query_degraded = rewordings.degraded;

    std::vector<std::string> texts{hyde.text};
    std::vector<std::string> origins{"hyde"};
    for (std::size_t i = 0; i < rewordings.texts.size(); ++i) {
        texts.push_back(rewordings.texts[i]);
        origins.push_back(fmt::format("reword_{}", i + 1));
    }
    if (config_.include_original_query) {
        texts.emplace_back(query);
        origins.emplace_back("original_query");
    }
    trace.lists = retrieve_lists(texts, origins, embedder_, store_, config_.k_per_list);

    trace.fused = rrf_fuse(trace.lists, config_.rrf_k);
    const auto kept = top_p_filter(trace.fused, config_.fuse_top_p, config_.max_context_chunks);
    trace.fused_kept = kept.size();

    std::vector<std::string> ids;
    std::vector<std::string> bodies;
    std::map<std::string, ChunkRecord> records;
    for (const auto& c : kept) {
        try {
            auto rec = store_.get_chunk(c.chunk_id);
            ids.push_back(c.chunk_id);
            bodies.push_back(rec.text);
            records.emplace(c.chunk_id, std::move(rec));
        } catch (const Error& e) {
            // A concurrent delete can remove a chunk between search and lookup.
            if (e.code() != ErrorCode::kNotFound) throw;
        }
    }
    if (ids.empty()) raise(ErrorCode::kEmptyIndex, "no retrievable chunks remain");

    const auto reranked = rerank(query, ids, bodies, reranker_, config_.rerank_top_p, config_.max_context_chunks);
    trace.reranked = reranked.scored;
    trace.rerank_kept = reranked.kept.size();
    trace.rerank_degraded = reranked.degraded;

    std::map<std::string, std::string> file_names;
    for (const auto& s : reranked.kept) {
        auto& rec = records.at(s.chunk_id);
        auto it = file_names.find(rec.document_id);
        if (it == file_names.end()) {
            auto doc = store_.find_document(rec.document_id);
            it = file_names.emplace(rec.document_id, doc ? doc->file_name : std::string()).first;
        }
        trace.final_chunk_ids.push_back(s.chunk_id);
        result.chunks.push_back({rec, it->second, s.score});
    }
    return result;
}

}  // namespace groundqa
