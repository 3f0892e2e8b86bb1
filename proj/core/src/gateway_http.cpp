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

#include <fmt/format.h>
#include <httplib.h>

#include <nlohmann/json.hpp>
#include <semaphore>
#include <thread>

#include "groundqa/error.hpp"
#include "groundqa/gateway.hpp"

namespace groundqa {

namespace {

using json = nlohmann::json;

struct Endpoint {
    std::string origin;  // scheme://host:port
    std::string prefix;  // path prefix without trailing slash
};

Endpoint split_base_url(const std::string& base_url) {
    if (base_url.empty()) raise(ErrorCode::kInvalidArgument, "backend base_url is not configured");
    const auto scheme_end = base_url.find("://");
    const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto slash = base_url.find('/', host_start);
    Endpoint ep;
    ep.origin = base_url.substr(0, slash);
    if (slash != std::string::npos) {
        ep.prefix = base_url.substr(slash);
        while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
    }
    return ep;
}

bool looks_like_context_overflow(const std::string& body) {
    auto lower = body;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower.find("context") != std::string::npos &&
           (lower.find("exceed") != std::string::npos || lower.find("overflow") != std::string::npos ||
            lower.find("too long") != std::string::npos || lower.find("length") != std::string::npos);
}

/// JSON POST with bounded concurrency and retry on transport errors and 5xx.
/// Requests carry no side effects on the backend, so replaying them is safe.
class JsonTransport {
  public:
    explicit JsonTransport(const HttpBackendOptions& options)
        : endpoint_(split_base_url(options.base_url)),
          options_(options),
          slots_(std::max(1, options.max_in_flight)) {}

    json post(const std::string& path, const json& body) {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};

        const std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(options_.backoff * (1 << (attempt - 1)));
            httplib::Client cli(endpoint_.origin);
            cli.set_connection_timeout(std::chrono::seconds(5));
            cli.set_read_timeout(options_.timeout);
            cli.set_write_timeout(options_.timeout);
            auto res = cli.Post(endpoint_.prefix + path, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status == 413 || (res->status >= 400 && looks_like_context_overflow(res->body))) {
                raise(ErrorCode::kContextOverflow, fmt::format("{} rejected the prompt: {}", path, res->body));
            }
            if (res->status >= 500) {
                last_error = fmt::format("HTTP {}", res->status);
                continue;
            }
            if (res->status != 200) {
                raise(ErrorCode::kBackendUnavailable, fmt::format("{} returned HTTP {}: {}", path, res->status, res->body));
            }
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                raise(ErrorCode::kBackendUnavailable, fmt::format("{} returned invalid JSON: {}", path, e.what()));
            }
        }
        raise(ErrorCode::kBackendUnavailable,
              fmt::format("{}{} unreachable after {} attempts: {}", endpoint_.origin, endpoint_.prefix + path,
                          options_.max_retries + 1, last_error));
    }

    bool reachable() {
        httplib::Client cli(endpoint_.origin);
        cli.set_connection_timeout(std::chrono::seconds(2));
        cli.set_read_timeout(std::chrono::seconds(2));
        auto res = cli.Get(endpoint_.prefix + "/");
        return static_cast<bool>(res);
    }

  private:
    Endpoint endpoint_;
    HttpBackendOptions options_;
    std::counting_semaphore<> slots_;
};

}  // namespace

struct HttpEmbedder::Transport : JsonTransport {
    using JsonTransport::JsonTransport;
};
struct HttpGenerator::Transport : JsonTransport {
    using JsonTransport::JsonTransport;
};
struct HttpReranker::Transport : JsonTransport {
    using JsonTransport::JsonTransport;
};

// ---------------------------------------------------------------------------

HttpEmbedder::HttpEmbedder(HttpBackendOptions options)
    : options_(std::move(options)), transport_(std::make_unique<Transport>(options_)) {
    if (options_.batch_limit == 0) options_.batch_limit = 1;
}

HttpEmbedder::~HttpEmbedder() = default;

bool HttpEmbedder::available() { return transport_->reachable(); }

std::vector<Vector> HttpEmbedder::embed_raw(std::span<const std::string> inputs) {
    std::vector<Vector> out;
    out.reserve(inputs.size());
    for (std::size_t begin = 0; begin < inputs.size(); begin += options_.batch_limit) {
        const std::size_t end = std::min(inputs.size(), begin + options_.batch_limit);
        json body{{"model", options_.model}, {"input", json::array()}};
        for (std::size_t i = begin; i < end; ++i) body["input"].push_back(inputs[i]);
        const json res = transport_->post("/api/embed", body);
        if (!res.contains("embeddings") || !res["embeddings"].is_array()) {
            raise(ErrorCode::kBackendUnavailable, "embed response lacks an 'embeddings' array");
        }
        const auto& embs = res["embeddings"];
        if (embs.size() != end - begin) {
            raise(ErrorCode::kDimensionMismatch,
                  fmt::format("embed returned {} vectors for a batch of {}", embs.size(), end - begin));
        }
        for (const auto& e : embs) out.push_back(e.get<Vector>());
    }
    return out;
}

// ---------------------------------------------------------------------------

HttpGenerator::HttpGenerator(HttpBackendOptions options)
    : options_(std::move(options)), transport_(std::make_unique<Transport>(options_)) {}

HttpGenerator::~HttpGenerator() = default;

bool HttpGenerator::available() { return transport_->reachable(); }

std::string HttpGenerator::request_body(const GenerationRequest& request) {
    json body{
        {"model", request.model},
        {"system", request.system},
        {"prompt", request.prompt},
        {"options", {{"temperature", request.temperature}, {"num_ctx", request.context_window}}},
        {"stream", false},
    };
    return body.dump();
}

std::string HttpGenerator::generate_raw(const GenerationRequest& request) {
    GenerationRequest r = request;
    if (r.model.empty()) r.model = options_.model;
    const json res = transport_->post("/api/generate", json::parse(request_body(r)));
    if (!res.contains("response") || !res["response"].is_string()) {
        raise(ErrorCode::kBackendUnavailable, "generate response lacks a 'response' string");
    }
    return res["response"].get<std::string>();
}

// ---------------------------------------------------------------------------

HttpReranker::HttpReranker(HttpBackendOptions options, bool logistic_mapping)
    : Reranker(logistic_mapping), options_(std::move(options)), transport_(std::make_unique<Transport>(options_)) {}

HttpReranker::~HttpReranker() = default;

bool HttpReranker::available() { return transport_->reachable(); }

std::vector<double> HttpReranker::score_raw(std::string_view query, std::span<const std::string> passages) {
    json body{{"query", std::string(query)}, {"documents", json::array()}};
    for (const auto& p : passages) body["documents"].push_back(p);
    const json res = transport_->post("/api/rerank", body);
    if (!res.contains("scores") || !res["scores"].is_array()) {
        raise(ErrorCode::kBackendUnavailable, "rerank response lacks a 'scores' array");
    }
    return res["scores"].get<std::vector<double>>();
}

}  // namespace groundqa
