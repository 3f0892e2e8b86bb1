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

/// \file gateway.hpp
/// \brief The only boundary to model inference: embeddings, text generation
/// and rerank scoring.
///
/// Each capability is an abstract class with a non-virtual public entry point
/// that enforces the contract (input validation, L2 normalization, logistic
/// mapping) and a protected virtual hook that talks to the backend. Backends:
///  - HTTP adapters speaking the JSON protocol (/api/embed, /api/generate,
///    /api/rerank);
///  - deterministic in-process doubles used by tests, benchmarks and the
///    offline mode of the service.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace groundqa {

using Vector = std::vector<float>;

/// Scales v to unit L2 norm in place. Throws ZeroVector for an all-zero input.
void l2_normalize(std::span<float> v);

double logistic(double x) noexcept;

/// |tokens(a) ∩ tokens(b)| / |tokens(a) ∪ tokens(b)| over lowercased word sets.
double jaccard_similarity(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Embeddings

class Embedder {
  public:
    virtual ~Embedder() = default;

    /// One unit-norm vector per input, all of the same dimension.
    /// Throws InvalidArgument on an empty batch or empty input string,
    /// DimensionMismatch when the backend returns inconsistent shapes.
    std::vector<Vector> embed_batch(std::span<const std::string> inputs);

    Vector embed(std::string_view input);

    virtual std::string model() const = 0;

    /// Dimension observed so far (0 before the first call for remote backends).
    std::size_t dimension() const noexcept { return dimension_.load(); }

    /// Cheap liveness probe used by the health endpoint.
    virtual bool available() { return true; }

  protected:
    virtual std::vector<Vector> embed_raw(std::span<const std::string> inputs) = 0;

    void set_dimension(std::size_t dim) noexcept { dimension_.store(dim); }

  private:
    std::atomic<std::size_t> dimension_{0};
};

/// Deterministic bag-of-words embedder. Every token is hashed with FNV-1a into
/// one of `dim` buckets with a ±1 sign; the sum is L2-normalized.
class HashedTokenEmbedder final : public Embedder {
  public:
    explicit HashedTokenEmbedder(std::size_t dim = 256);

    std::string model() const override;

    std::size_t calls() const noexcept { return calls_.load(); }

  protected:
    std::vector<Vector> embed_raw(std::span<const std::string> inputs) override;

  private:
    std::size_t dim_;
    std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Generation

struct GenerationRequest {
    std::string model;
    std::string system;
    std::string prompt;
    double temperature = 0.1;
    int context_window = 32000;
};

class Generator {
  public:
    virtual ~Generator() = default;

    /// Full response text, never truncated client-side. Throws
    /// InvalidArgument for an empty prompt or negative temperature,
    /// BackendUnavailable / ContextOverflow from the backend.
    std::string generate(const GenerationRequest& request);

    virtual bool available() { return true; }

  protected:
    virtual std::string generate_raw(const GenerationRequest& request) = 0;
};

/// Test double answering from substring rules. Rules are checked in insertion
/// order against system + "\n" + prompt; the first match wins.
class ScriptedGenerator final : public Generator {
  public:
    using Fallback = std::function<std::string(const GenerationRequest&)>;

    ScriptedGenerator() = default;
    explicit ScriptedGenerator(std::string default_response);

    ScriptedGenerator& on(std::string needle, std::string response);
    ScriptedGenerator& on(std::string needle, std::vector<std::string> responses_in_order);
    ScriptedGenerator& fallback(Fallback fn);

    void set_available(bool up) noexcept { up_.store(up); }
    bool available() override { return up_.load(); }

    std::size_t calls() const noexcept { return calls_.load(); }
    std::vector<GenerationRequest> requests() const;

  protected:
    std::string generate_raw(const GenerationRequest& request) override;

  private:
    struct Rule {
        std::string needle;
        std::vector<std::string> responses;
        std::size_t next = 0;
    };

    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
    std::optional<std::string> default_response_;
    Fallback fallback_;
    std::vector<GenerationRequest> log_;
    std::atomic<bool> up_{true};
    std::atomic<std::size_t> calls_{0};
};

/// Offline generator for running the engine with no model server. It
/// recognises the engine's own prompt shapes: rewording requests get five
/// numbered copies of the question, grounded-answer requests quote the first
/// excerpt (or emit the refusal sentinel when none are supplied), everything
/// else echoes the question.
class ExtractiveGenerator final : public Generator {
  public:
    explicit ExtractiveGenerator(std::string sentinel = "not enough context");

  protected:
    std::string generate_raw(const GenerationRequest& request) override;

  private:
    std::string sentinel_;
};

// ---------------------------------------------------------------------------
// Reranking

class Reranker {
  public:
    explicit Reranker(bool logistic_mapping = false) : logistic_mapping_(logistic_mapping) {}
    virtual ~Reranker() = default;

    /// One finite score per passage, higher is more relevant. When logistic
    /// mapping is enabled raw backend logits are mapped into (0,1).
    std::vector<double> rerank_scores(std::string_view query, std::span<const std::string> passages);

    bool logistic_mapping() const noexcept { return logistic_mapping_; }

    virtual bool available() { return true; }

  protected:
    virtual std::vector<double> score_raw(std::string_view query, std::span<const std::string> passages) = 0;

  private:
    bool logistic_mapping_;
};

/// Jaccard token overlap; the offline reranker and the degraded-mode fallback.
class LexicalReranker final : public Reranker {
  public:
    LexicalReranker() : Reranker(false) {}

  protected:
    std::vector<double> score_raw(std::string_view query, std::span<const std::string> passages) override;
};

// ---------------------------------------------------------------------------
// HTTP backends

struct HttpBackendOptions {
    std::string base_url;  ///< e.g. "http://127.0.0.1:11434", optional path prefix allowed
    std::string model;
    std::size_t batch_limit = 64;  ///< embed: max inputs per request
    int max_in_flight = 4;
    int max_retries = 2;
    std::chrono::milliseconds backoff{200};
    std::chrono::seconds timeout{300};
};

class HttpEmbedder final : public Embedder {
  public:
    explicit HttpEmbedder(HttpBackendOptions options);
    ~HttpEmbedder() override;

    std::string model() const override { return options_.model; }
    bool available() override;

  protected:
    std::vector<Vector> embed_raw(std::span<const std::string> inputs) override;

  private:
    struct Transport;
    HttpBackendOptions options_;
    std::unique_ptr<Transport> transport_;
};

class HttpGenerator final : public Generator {
  public:
    explicit HttpGenerator(HttpBackendOptions options);
    ~HttpGenerator() override;

    bool available() override;

    /// Request body as sent on the wire; exposed for protocol tests.
    static std::string request_body(const GenerationRequest& request);

  protected:
    std::string generate_raw(const GenerationRequest& request) override;

  private:
    struct Transport;
    HttpBackendOptions options_;
    std::unique_ptr<Transport> transport_;
};

class HttpReranker final : public Reranker {
  public:
    HttpReranker(HttpBackendOptions options, bool logistic_mapping);
    ~HttpReranker() override;

    bool available() override;

  protected:
    std::vector<double> score_raw(std::string_view query, std::span<const std::string> passages) override;

  private:
    struct Transport;
    HttpBackendOptions options_;
    std::unique_ptr<Transport> transport_;
};

}  // namespace groundqa
