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

#include "groundqa/gateway.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "groundqa/error.hpp"
#include "groundqa/hash.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

void l2_normalize(std::span<float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    if (!(sq > 0.0) || !std::isfinite(sq)) raise(ErrorCode::kZeroVector, "cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : v) x = static_cast<float>(x * inv);
}

double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

double jaccard_similarity(std::string_view a, std::string_view b) {
    auto ta = text::tokenize(a);
    auto tb = text::tokenize(b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------

std::vector<Vector> Embedder::embed_batch(std::span<const std::string> inputs) {
    if (inputs.empty()) raise(ErrorCode::kInvalidArgument, "embed_batch needs at least one input");
    for (const auto& in : inputs) {
        if (in.empty()) raise(ErrorCode::kInvalidArgument, "embed_batch inputs must be non-empty");
    }
    auto vectors = embed_raw(inputs);
    if (vectors.size() != inputs.size()) {
        raise(ErrorCode::kDimensionMismatch,
              fmt::format("backend returned {} vectors for {} inputs", vectors.size(), inputs.size()));
    }
    std::size_t dim = dimension();
    for (auto& v : vectors) {
        if (v.empty()) raise(ErrorCode::kDimensionMismatch, "backend returned an empty vector");
        if (dim == 0) {
            dim = v.size();
            set_dimension(dim);
        }
        if (v.size() != dim) {
            raise(ErrorCode::kDimensionMismatch, fmt::format("expected dimension {}, backend returned {}", dim, v.size()));
        }
        l2_normalize(v);
    }
    return vectors;
}

Vector Embedder::embed(std::string_view input) {
    std::string s(input);
    return std::move(embed_batch(std::span<const std::string>(&s, 1)).front());
}

HashedTokenEmbedder::HashedTokenEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) raise(ErrorCode::kInvalidArgument, "hashed embedder dimension must be positive");
    set_dimension(dim_);
}

std::string HashedTokenEmbedder::model() const { return fmt::format("hashed-token-{}", dim_); }

std::vector<Vector> HashedTokenEmbedder::embed_raw(std::span<const std::string> inputs) {
    calls_.fetch_add(1);
    std::vector<Vector> out;
    out.reserve(inputs.size());
    for (const auto& input : inputs) {
        Vector v(dim_, 0.0f);
        auto add = [&](std::string_view token) {
            const std::uint64_t h = fnv1a64(token);
            const std::size_t bucket = static_cast<std::size_t>((h >> 1) % dim_);
            v[bucket] += (h & 1U) ? -1.0f : 1.0f;
        };
        auto tokens = text::tokenize(input);
        for (const auto& t : tokens) add(t);
        if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) {
            // No word tokens, or every token cancelled out: hash the raw text
            // so the result is still a deterministic unit vector.
            add(input);
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string Generator::generate(const GenerationRequest& request) {
    if (request.prompt.empty()) raise(ErrorCode::kInvalidArgument, "generation prompt must be non-empty");
    if (!(request.temperature >= 0.0)) raise(ErrorCode::kInvalidArgument, "temperature must be >= 0");
    if (request.context_window <= 0) raise(ErrorCode::kInvalidArgument, "context window must be positive");
    return generate_raw(request);
}

ScriptedGenerator::ScriptedGenerator(std::string default_response) : default_response_(std::move(default_response)) {}

ScriptedGenerator& ScriptedGenerator::on(std::string needle, std::string response) {
    return on(std::move(needle), std::vector<std::string>{std::move(response)});
}

ScriptedGenerator& ScriptedGenerator::on(std::string needle, std::vector<std::string> responses_in_order) {
    std::lock_guard lock(mutex_);
    rules_.push_back(Rule{std::move(needle), std::move(responses_in_order), 0});
    return *this;
}

ScriptedGenerator& ScriptedGenerator::fallback(Fallback fn) {
    std::lock_guard lock(mutex_);
    fallback_ = std::move(fn);
    return *this;
}

std::vector<GenerationRequest> ScriptedGenerator::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::string ScriptedGenerator::generate_raw(const GenerationRequest& request) {
    calls_.fetch_add(1);
    if (!up_.load()) raise(ErrorCode::kBackendUnavailable, "scripted generator is marked unavailable");
    std::lock_guard lock(mutex_);
    log_.push_back(request);
    const std::string haystack = request.system + "\n" + request.prompt;
    for (auto& rule : rules_) {
        if (haystack.find(rule.needle) == std::string::npos || rule.responses.empty()) continue;
        // Sequenced responses: advance until the last one, then repeat it.
        const std::string& r = rule.responses[std::min(rule.next, rule.responses.size() - 1)];
        if (rule.next < rule.responses.size()) ++rule.next;
        return r;
    }
    if (fallback_) return fallback_(request);
    if (default_response_) return *default_response_;
    raise(ErrorCode::kBackendUnavailable, "scripted generator has no rule for this prompt");
}

ExtractiveGenerator::ExtractiveGenerator(std::string sentinel) : sentinel_(std::move(sentinel)) {}

namespace {

std::string question_line(std::string_view prompt) {
    const std::string_view marker = "Question:";
    auto pos = prompt.rfind(marker);
    if (pos == std::string_view::npos) return std::string(text::strip(prompt));
    auto rest = prompt.substr(pos + marker.size());
    auto nl = rest.find('\n');
    return std::string(text::strip(rest.substr(0, nl)));
}

}  // namespace

std::string ExtractiveGenerator::generate_raw(const GenerationRequest& request) {
    const std::string_view prompt = request.prompt;
    const std::string question = question_line(prompt);
    if (request.system.find("Rewrite the user's question") != std::string::npos) {
        std::string out;
        for (int i = 1; i <= 5; ++i) out += fmt::format("{}. {}\n", i, question);
        return out;
    }
    if (request.system.find("Summarize") != std::string::npos) {
        return std::string(text::utf8_prefix(text::normalize_whitespace(prompt), 400));
    }
    const auto excerpts = prompt.find("Excerpts:\n");
    if (excerpts != std::string_view::npos) {
        const auto first = prompt.find("[1] (", excerpts);
        if (first == std::string_view::npos) return sentinel_;
        const auto body_start = prompt.find('\n', first);
        if (body_start == std::string_view::npos) return sentinel_;
        auto body = prompt.substr(body_start + 1);
        body = body.substr(0, body.find("\n\n"));
        std::string quote(text::utf8_prefix(text::normalize_whitespace(body), 300));
        return fmt::format("Per [1], \"{}\"", quote);
    }
    return question;
}

// ---------------------------------------------------------------------------

std::vector<double> Reranker::rerank_scores(std::string_view query, std::span<const std::string> passages) {
    if (passages.empty()) raise(ErrorCode::kInvalidArgument, "rerank needs at least one passage");
    auto scores = score_raw(query, passages);
    if (scores.size() != passages.size()) {
        raise(ErrorCode::kDimensionMismatch,
              fmt::format("reranker returned {} scores for {} passages", scores.size(), passages.size()));
    }
    for (double& s : scores) {
        if (!std::isfinite(s)) raise(ErrorCode::kBackendUnavailable, "reranker returned a non-finite score");
        if (logistic_mapping_) s = logistic(s);
    }
    return scores;
}

std::vector<double> LexicalReranker::score_raw(std::string_view query, std::span<const std::string> passages) {
    std::vector<double> out;
    out.reserve(passages.size());
    for (const auto& p : passages) out.push_back(jaccard_similarity(query, p));
    return out;
}

}  // namespace groundqa
