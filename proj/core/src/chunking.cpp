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

#include "groundqa/chunking.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "groundqa/error.hpp"
#include "groundqa/text.hpp"
#include "groundqa/vector_index.hpp"

namespace groundqa {

std::string_view to_string(BreakpointMethod m) noexcept {
    switch (m) {
        case BreakpointMethod::kStandardDeviation: return "standard_deviation";
        case BreakpointMethod::kPercentile: return "percentile";
        case BreakpointMethod::kGradient: return "gradient";
    }
    return "unknown";
}

BreakpointMethod parse_breakpoint_method(std::string_view name) {
    if (name == "standard_deviation") return BreakpointMethod::kStandardDeviation;
    if (name == "percentile") return BreakpointMethod::kPercentile;
    if (name == "gradient") return BreakpointMethod::kGradient;
    raise(ErrorCode::kInvalidArgument, fmt::format("unknown breakpoint method '{}'", name));
}

void SemanticChunkConfig::validate() const {
    if (!(amount > 0.0)) raise(ErrorCode::kInvalidArgument, "breakpoint amount must be > 0");
    if (method != BreakpointMethod::kStandardDeviation && amount > 1.0) {
        raise(ErrorCode::kInvalidArgument, "percentile/gradient amount is a quantile fraction in (0,1]");
    }
}

void RecursiveChunkConfig::validate() const {
    if (chunk_size == 0) raise(ErrorCode::kInvalidArgument, "chunk_size must be positive");
    if (overlap >= chunk_size) raise(ErrorCode::kInvalidArgument, "overlap must be smaller than chunk_size");
}

std::string describe(const ChunkerConfig& config) {
    if (const auto* s = std::get_if<SemanticChunkConfig>(&config)) {
        return fmt::format("semantic/{}/{:g}", to_string(s->method), s->amount);
    }
    const auto& r = std::get<RecursiveChunkConfig>(config);
    return fmt::format("recursive/{}/{}", r.chunk_size, r.overlap);
}

// ---------------------------------------------------------------------------
// Sentence splitting

namespace {

constexpr std::array<std::string_view, 9> kAbbreviations = {"Mr.",  "Mrs.", "Ms.", "Dr.", "No.",
                                                            "e.g.", "i.e.", "etc.", "vs."};

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_initial(std::string_view word) { return word.size() == 2 && is_upper(word[0]) && word[1] == '.'; }

/// Position of the first character after a blank line starting at i, or npos.
std::size_t paragraph_break_end(std::string_view s, std::size_t i) {
    if (s[i] != '\n') return std::string_view::npos;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
    if (j < s.size() && s[j] == '\n') return j + 1;
    return std::string_view::npos;
}

std::string_view next_word(std::string_view s, std::size_t from) {
    while (from < s.size() && text::is_space(s[from])) ++from;
    std::size_t end = from;
    while (end < s.size() && !text::is_space(s[end])) ++end;
    return s.substr(from, end - from);
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view s) {
    std::vector<SentenceSpan> out;
    std::size_t start = std::string_view::npos;  // first byte of the open sentence

    auto close = [&](std::size_t end) {
        if (start == std::string_view::npos) return;
        while (end > start && text::is_space(s[end - 1])) --end;
        if (end > start) out.push_back({out.size(), std::string(s.substr(start, end - start)), start, end});
        start = std::string_view::npos;
    };

    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (text::is_space(c)) {
            if (const auto after = paragraph_break_end(s, i); after != std::string_view::npos) {
                close(i);
                i = after;
                continue;
            }
            ++i;
            continue;
        }
        if (start == std::string_view::npos) start = i;
        if (!is_terminal(c) || (i + 1 < s.size() && is_terminal(s[i + 1]))) {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        while (end < s.size() && is_closer(s[end])) ++end;
        if (end < s.size() && !text::is_space(s[end])) {
            i = end;
            continue;
        }
        if (c == '.') {
            std::size_t w = i;
            while (w > start && !text::is_space(s[w - 1])) --w;
            std::string_view word = s.substr(w, i + 1 - w);
            while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.remove_prefix(1);
            const bool abbreviation = std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
            // Initials ("John F. Kennedy", "J. R. R. Tolkien") do not end a
            // sentence, but a lone letter opening a sentence ("A. B? C!") does.
            const bool initial = is_initial(word) && (w != start || is_initial(next_word(s, end)));
            if (abbreviation || initial) {
                i = end;
                continue;
            }
        }
        close(end);
        i = end;
    }
    close(s.size());
    return out;
}

// ---------------------------------------------------------------------------
// Semantic chunking

std::vector<double> consecutive_distances(std::span<const SentenceSpan> sentences, Embedder& embedder,
                                          std::size_t buffer_size) {
    if (sentences.size() < 2) raise(ErrorCode::kInvalidArgument, "need at least two sentences");
    const std::size_t n = sentences.size();
    std::vector<std::string> groups;
    groups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= buffer_size ? i - buffer_size : 0;
        const std::size_t hi = std::min(n - 1, i + buffer_size);
        std::string g;
        for (std::size_t j = lo; j <= hi; ++j) {
            if (!g.empty()) g.push_back(' ');
            g += sentences[j].text;
        }
        groups.push_back(std::move(g));
    }
    const auto vectors = embedder.embed_batch(groups);
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dist = 1.0 - cosine_similarity(vectors[i], vectors[i + 1]);
        d.push_back(std::clamp(dist, 0.0, 2.0));
    }
    return d;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) raise(ErrorCode::kInvalidArgument, "quantile of an empty sequence");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::set<std::size_t> compute_breakpoints(std::span<const double> distances, const SemanticChunkConfig& config) {
    config.validate();
    if (distances.empty()) raise(ErrorCode::kInvalidArgument, "no distances to threshold");
    std::set<std::size_t> out;
    if (std::all_of(distances.begin(), distances.end(), [&](double d) { return d == distances.front(); })) return out;

    std::vector<double> signal(distances.begin(), distances.end());
    double threshold = 0.0;
    switch (config.method) {
        case BreakpointMethod::kStandardDeviation: {
            const double n = static_cast<double>(signal.size());
            const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / n;
            double var = 0.0;
            for (double d : signal) var += (d - mean) * (d - mean);
            threshold = mean + config.amount * std::sqrt(var / n);
            break;
        }
        case BreakpointMethod::kPercentile:
            threshold = quantile(signal, config.amount);
            break;
        case BreakpointMethod::kGradient: {
            if (signal.size() < 2) return out;
            // Rise into boundary i: d_i - d_{i-1}. Slot 0 repeats the first difference.
            std::vector<double> g(signal.size());
            for (std::size_t i = 1; i < signal.size(); ++i) g[i] = signal[i] - signal[i - 1];
            g[0] = g[1];
            signal = std::move(g);
            threshold = quantile(signal, config.amount);
            break;
        }
    }
    for (std::size_t i = 0; i < signal.size(); ++i) {
        if (signal[i] > threshold) out.insert(i);
    }
    return out;
}

std::vector<Chunk> semantic_chunk(std::string_view text, const SemanticChunkConfig& config, Embedder& embedder) {
    config.validate();
    const auto sentences = split_sentences(text);
    std::vector<Chunk> chunks;
    if (sentences.empty()) return chunks;

    std::set<std::size_t> boundaries;
    if (sentences.size() >= 2) {
        boundaries = compute_breakpoints(consecutive_distances(sentences, embedder, config.buffer_size), config);
    }
    std::size_t first = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i + 1 != sentences.size() && !boundaries.count(i)) continue;
        Chunk c;
        for (std::size_t j = first; j <= i; ++j) {
            if (!c.text.empty()) c.text.push_back(' ');
            c.text += text::normalize_whitespace(sentences[j].text);
        }
        c.start_offset = sentences[first].start_offset;
        c.end_offset = sentences[i].end_offset;
        c.chunk_index = chunks.size();
        chunks.push_back(std::move(c));
        first = i + 1;
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// Recursive character chunking

namespace {

struct Span {
    std::size_t begin;
    std::size_t end;
    std::size_t size() const { return end - begin; }
};

constexpr std::array<std::string_view, 5> kSeparators = {"\n\n", "\n", ". ", " ", ""};

class RecursiveSplitter {
  public:
    RecursiveSplitter(std::string_view text, std::size_t chunk_size) : text_(text), chunk_size_(chunk_size) {}

    std::vector<Span> split(Span span, std::size_t level) const {
        if (level >= kSeparators.size()) return {span};
        const std::string_view body = text_.substr(span.begin, span.size());
        while (!kSeparators[level].empty() && body.find(kSeparators[level]) == std::string_view::npos) ++level;
        const std::string_view sep = kSeparators[level];

        // Pieces keep their trailing separator so they tile the span exactly.
        std::vector<Span> pieces;
        if (sep.empty()) {
            std::size_t i = span.begin;
            while (i < span.end) {
                std::size_t j = i + 1;
                while (j < span.end && (static_cast<unsigned char>(text_[j]) & 0xC0) == 0x80) ++j;
                pieces.push_back({i, j});
                i = j;
            }
        } else {
            std::size_t i = span.begin;
            while (i < span.end) {
                const auto hit = text_.substr(0, span.end).find(sep, i);
                const std::size_t j = hit == std::string_view::npos ? span.end : hit + sep.size();
                pieces.push_back({i, j});
                i = j;
            }
        }

        std::vector<Span> out;
        std::vector<Span> pending;
        for (const auto& p : pieces) {
            if (p.size() <= chunk_size_) {
                pending.push_back(p);
                continue;
            }
            merge(pending, out);
            pending.clear();
            auto sub = split(p, level + 1);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        merge(pending, out);
        return out;
    }

  private:
    void merge(const std::vector<Span>& pieces, std::vector<Span>& out) const {
        if (pieces.empty()) return;
        Span current = pieces.front();
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            if (pieces[i].end - current.begin <= chunk_size_) {
                current.end = pieces[i].end;
            } else {
                out.push_back(current);
                current = pieces[i];
            }
        }
        out.push_back(current);
    }

    std::string_view text_;
    std::size_t chunk_size_;
};

}  // namespace

std::vector<Chunk> recursive_chunk(std::string_view text, const RecursiveChunkConfig& config) {
    config.validate();
    std::vector<Chunk> chunks;
    if (text.empty()) return chunks;
    const auto spans = RecursiveSplitter(text, config.chunk_size).split({0, text.size()}, 0);

    std::size_t prev_start = 0;
    for (const auto& span : spans) {
        if (text::count_non_space(text.substr(span.begin, span.size())) == 0) continue;
        std::size_t start = span.begin;
        if (!chunks.empty()) {
            // Prefix with the predecessor's tail, keeping starts strictly increasing.
            start = span.begin >= config.overlap ? span.begin - config.overlap : 0;
            start = std::max(start, prev_start + 1);
            while (start > 0 && start < span.begin && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) ++start;
        }
        Chunk c;
        c.text = std::string(text.substr(start, span.end - start));
        c.start_offset = start;
        c.end_offset = span.end;
        c.chunk_index = chunks.size();
        chunks.push_back(std::move(c));
        prev_start = start;
    }
    return chunks;
}

std::vector<Chunk> chunk_text(std::string_view text, const ChunkerConfig& config, Embedder& embedder) {
    if (const auto* s = std::get_if<SemanticChunkConfig>(&config)) return semantic_chunk(text, *s, embedder);
    return recursive_chunk(text, std::get<RecursiveChunkConfig>(config));
}

}  // namespace groundqa
