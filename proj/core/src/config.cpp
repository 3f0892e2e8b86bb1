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


#include "groundqa/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "fileio.hpp"
#include "groundqa/error.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const auto hit = s.find(sep, pos);
        const auto part = text::strip(s.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos));
        if (!part.empty()) out.emplace_back(part);
        if (hit == std::string_view::npos) break;
        pos = hit + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view raw) {
    const auto s = text::strip(raw);
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
        char* end = nullptr;
        const std::string copy(s);
        value = static_cast<T>(std::strtod(copy.c_str(), &end));
        if (copy.empty() || *end != '\0') raise(ErrorCode::kInvalidArgument, fmt::format("{}: '{}' is not a number", key, raw));
    } else {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            raise(ErrorCode::kInvalidArgument, fmt::format("{}: '{}' is not an integer", key, raw));
        }
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view raw) {
    const auto s = text::to_lower(text::strip(raw));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    raise(ErrorCode::kInvalidArgument, fmt::format("{}: '{}' is not a boolean", key, raw));
}

class Reader {
  public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    void str(const char* key, std::string& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = std::string(text::strip(*v));
    }
    void path(const char* key, std::filesystem::path& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = std::string(text::strip(*v));
    }
    template <typename T>
    void num(const char* key, T& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = parse_number<T>(key, *v);
    }
    void flag(const char* key, bool& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = parse_bool(key, *v);
    }
    void millis(const char* key, std::chrono::milliseconds& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = std::chrono::milliseconds(parse_number<long>(key, *v));
    }
    void seconds(const char* key, std::chrono::seconds& out) const {
        if (auto v = tree_.get_optional<std::string>(key)) out = std::chrono::seconds(parse_number<long>(key, *v));
    }
    bool has(const char* key) const { return tree_.get_optional<std::string>(key).has_value(); }

    void backend(const std::string& section, HttpBackendOptions& out) const {
        str((section + ".base_url").c_str(), out.base_url);
        str((section + ".model").c_str(), out.model);
        num((section + ".batch_limit").c_str(), out.batch_limit);
        num((section + ".max_in_flight").c_str(), out.max_in_flight);
        num((section + ".max_retries").c_str(), out.max_retries);
        millis((section + ".backoff_ms").c_str(), out.backoff);
        seconds((section + ".timeout_s").c_str(), out.timeout);
    }

  private:
    const pt::ptree& tree_;
};

void check_mode(std::string_view key, const std::string& value, std::initializer_list<std::string_view> allowed) {
    for (auto a : allowed) {
        if (value == a) return;
    }
    raise(ErrorCode::kInvalidArgument, fmt::format("{}: unknown mode '{}'", key, value));
}

}  // namespace

ChunkerConfig parse_chunker_spec(std::string_view spec) {
    const auto parts = split(spec, ':');
    if (parts.size() >= 3 && parts[0] == "semantic") {
        SemanticChunkConfig c;
        c.method = parse_breakpoint_method(parts[1]);
        c.amount = parse_number<double>("chunker amount", parts[2]);
        if (parts.size() >= 4) c.buffer_size = parse_number<std::size_t>("chunker buffer_size", parts[3]);
        c.validate();
        return c;
    }
    if (parts.size() == 3 && parts[0] == "recursive") {
        RecursiveChunkConfig c;
        c.chunk_size = parse_number<std::size_t>("chunker chunk_size", parts[1]);
        c.overlap = parse_number<std::size_t>("chunker overlap", parts[2]);
        c.validate();
        return c;
    }
    raise(ErrorCode::kInvalidArgument, fmt::format("cannot parse chunker spec '{}'", spec));
}

EngineConfig EngineConfig::from_ini(std::string_view ini) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(ini)};
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        raise(ErrorCode::kInvalidArgument, fmt::format("config: {}", e.what()));
    }
    const Reader r(tree);
    EngineConfig c;

    r.str("server.host", c.host);
    r.num("server.port", c.port);
    r.path("server.static_dir", c.static_dir);
    r.str("server.cors_origin", c.cors_origin);
    r.path("data.dir", c.data_dir);

    r.backend("embed", c.embed);
    if (!c.embed.base_url.empty()) c.embed_mode = "http";
    r.str("embed.mode", c.embed_mode);
    r.num("embed.dim", c.embed_dim);

    r.backend("generate", c.generate);
    if (!c.generate.base_url.empty()) c.generate_mode = "http";
    r.str("generate.mode", c.generate_mode);
    c.generation.model = c.generate.model;
    r.num("generate.temperature", c.generation.temperature);
    r.num("generate.num_ctx", c.generation.context_window);
    r.num("generate.context_budget_chars", c.generation.context_budget_chars);
    r.num("generate.history_turns", c.generation.history_turns);
    r.str("generate.sentinel", c.generation.sentinel);
    r.flag("generate.refusal_exact_match", c.generation.refusal_exact_match);
    r.str("generate.system_template", c.generation.system_template);

    r.backend("rerank", c.rerank);
    if (!c.rerank.base_url.empty()) c.rerank_mode = "http";
    r.str("rerank.mode", c.rerank_mode);
    r.flag("rerank.logistic", c.rerank_logistic);

    if (r.has("chunking.method")) {
        std::string method;
        r.str("chunking.method", method);
        if (method == "semantic") {
            SemanticChunkConfig s;
            std::string breakpoint = std::string(to_string(s.method));
            r.str("chunking.breakpoint", breakpoint);
            s.method = parse_breakpoint_method(breakpoint);
            r.num("chunking.amount", s.amount);
            r.num("chunking.buffer_size", s.buffer_size);
            c.chunker = s;
        } else if (method == "recursive") {
            RecursiveChunkConfig rc;
            r.num("chunking.chunk_size", rc.chunk_size);
            r.num("chunking.overlap", rc.overlap);
            c.chunker = rc;
        } else {
            raise(ErrorCode::kInvalidArgument, fmt::format("chunking.method: unknown method '{}'", method));
        }
    }

    r.num("summary.batch_chars", c.summary.batch_chars);
    r.num("summary.max_chars", c.summary.max_chars);

    r.num("index.M", c.index.M);
    r.num("index.ef_construction", c.index.ef_construction);
    r.num("index.ef_search", c.index.ef_search);
    r.num("index.seed", c.index.seed);

    r.num("retrieval.k_per_list", c.retrieval.k_per_list);
    r.num("retrieval.rrf_k", c.retrieval.rrf_k);
    r.num("retrieval.fuse_top_p", c.retrieval.fuse_top_p);
    r.num("retrieval.rerank_top_p", c.retrieval.rerank_top_p);
    r.num("retrieval.max_context_chunks", c.retrieval.max_context_chunks);
    r.flag("retrieval.include_original_query", c.retrieval.include_original_query);
    r.str("retrieval.hyde_template", c.retrieval.hyde_template);
    r.str("retrieval.multi_query_template", c.retrieval.multi_query_template);

    // HyDE, rewording and summary prompts share the answer model settings.
    c.retrieval.model = c.generation.model;
    c.retrieval.temperature = c.generation.temperature;
    c.retrieval.context_window = c.generation.context_window;
    c.summary.model = c.generation.model;
    c.summary.temperature = c.generation.temperature;
    c.summary.context_window = c.generation.context_window;

    if (auto v = tree.get_optional<std::string>("eval.k_values")) {
        c.eval.k_values.clear();
        for (const auto& k : split(*v, ',')) c.eval.k_values.push_back(parse_number<std::size_t>("eval.k_values", k));
    }
    r.path("eval.wikiqa_tsv", c.eval.wikiqa_tsv);
    if (auto v = tree.get_optional<std::string>("eval.chunkers")) {
        for (const auto& spec : split(*v, ',')) c.eval.chunkers.push_back(parse_chunker_spec(spec));
    }
    r.path("eval.corpus", c.eval.corpus);
    r.path("eval.queries", c.eval.queries);
    r.path("eval.qrels", c.eval.qrels);
    r.path("eval.generation_dataset", c.eval.generation_dataset);
    if (auto v = tree.get_optional<std::string>("eval.generation_documents")) {
        for (const auto& p : split(*v, ',')) c.eval.generation_documents.emplace_back(p);
    }

    c.validate();
    return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
    auto c = from_ini(fileio::read_file(path));
    // Relative paths in the file are resolved against the file's directory.
    const auto base = path.parent_path();
    auto anchor = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    anchor(c.data_dir);
    anchor(c.static_dir);
    anchor(c.eval.wikiqa_tsv);
    anchor(c.eval.corpus);
    anchor(c.eval.queries);
    anchor(c.eval.qrels);
    anchor(c.eval.generation_dataset);
    for (auto& p : c.eval.generation_documents) anchor(p);
    return c;
}

void EngineConfig::apply_env_overrides() {
    if (const char* dir = std::getenv("ENGINE_DATA_DIR"); dir && *dir) data_dir = dir;
    if (const char* port_env = std::getenv("ENGINE_PORT"); port_env && *port_env) {
        port = parse_number<int>("ENGINE_PORT", port_env);
    }
    validate();
}

void EngineConfig::validate() const {
    if (port < 0 || port > 65535) raise(ErrorCode::kInvalidArgument, "server.port must be in [0, 65535]");
    check_mode("embed.mode", embed_mode, {"hashed", "http"});
    check_mode("generate.mode", generate_mode, {"extractive", "http"});
    check_mode("rerank.mode", rerank_mode, {"lexical", "http"});
    if (embed_mode == "http" && embed.base_url.empty()) raise(ErrorCode::kInvalidArgument, "embed.base_url is required");
    if (generate_mode == "http" && generate.base_url.empty()) {
        raise(ErrorCode::kInvalidArgument, "generate.base_url is required");
    }
    if (rerank_mode == "http" && rerank.base_url.empty()) raise(ErrorCode::kInvalidArgument, "rerank.base_url is required");
    if (embed_dim == 0) raise(ErrorCode::kInvalidArgument, "embed.dim must be > 0");
    std::visit([](const auto& ch) { ch.validate(); }, chunker);
    index.validate();
    retrieval.validate();
    generation.validate();
    for (auto k : eval.k_values) {
        if (k == 0) raise(ErrorCode::kInvalidArgument, "eval.k_values must be >= 1");
    }
}

}  // namespace groundqa
