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

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "groundqa/chunking.hpp"
#include "groundqa/engine.hpp"
#include "groundqa/error.hpp"
#include "groundqa/eval.hpp"
#include "groundqa/gateway.hpp"

namespace httplib {
class Server;
}

namespace groundqa::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

std::filesystem::path fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);

/// Maps each text to the normalized count of its tokens per topic, one axis
/// per topic plus a final axis for texts with no topic word. Texts from
/// different topics are exactly orthogonal.
class TopicEmbedder final : public Embedder {
  public:
    explicit TopicEmbedder(std::vector<std::vector<std::string>> topic_words);

    std::string model() const override { return "topic-stub"; }
    std::size_t calls() const noexcept { return calls_.load(); }

  protected:
    std::vector<Vector> embed_raw(std::span<const std::string> inputs) override;

  private:
    std::map<std::string, std::size_t> axis_;
    std::size_t dim_;
    std::atomic<std::size_t> calls_{0};
};

/// Twelve sentences in three topic blocks of four; boundaries after
/// sentences 3 and 7.
struct PlantedCorpus {
    std::string text;
    std::vector<std::vector<std::string>> topic_words;
    std::set<std::size_t> boundaries;
};
PlantedCorpus planted_topic_corpus();

/// WikiQA-shaped rows for the chunking comparison: `articles` titles with
/// disjoint vocabularies, each holding `sentences` sentences of which one gold
/// sentence is longer than `gold_min_chars`.
std::vector<WikiQaRow> straddling_wikiqa_rows(std::size_t articles, std::size_t sentences,
                                            std::size_t gold_min_chars);

/// Local HTTP server standing in for a model backend. Each path has a JSON
/// handler; requests are counted per path.
class FakeBackend {
  public:
    using Handler = std::function<std::pair<int, nlohmann::json>(const nlohmann::json& body)>;

    FakeBackend();
    ~FakeBackend();

    void on(const std::string& path, Handler handler);
    std::string base_url() const;
    std::size_t count(const std::string& path) const;
    std::vector<nlohmann::json> bodies(const std::string& path) const;
    int max_concurrent() const noexcept { return max_concurrent_.load(); }
    void set_delay(std::chrono::milliseconds d) { delay_ = d; }

  private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    std::map<std::string, Handler> handlers_;
    std::map<std::string, std::vector<nlohmann::json>> bodies_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_concurrent_{0};
    std::chrono::milliseconds delay_{0};
};

/// Engine config for offline runs with the hashed embedder, the extractive
/// generator and the lexical reranker.
EngineConfig stub_config(const std::filesystem::path& data_dir, std::size_t embed_dim = 1024);

struct StubEngine {
    HashedTokenEmbedder* embedder = nullptr;
    ScriptedGenerator* generator = nullptr;
    LexicalReranker* reranker = nullptr;
    std::unique_ptr<Engine> engine;
};

/// Engine over a scripted generator whose fallback behaves like the
/// extractive generator; the raw pointers stay owned by the engine.
StubEngine make_stub_engine(const EngineConfig& config);

/// Three short policy documents with disjoint vocabularies.
std::vector<std::pair<std::string, std::string>> policy_documents();

/// Generator responses paired with whether they are refusals under the
/// default sentinel: three positive, three negative.
std::vector<std::pair<std::string, bool>> refusal_fixtures();

}  // namespace groundqa::testing

/// Asserts that `stmt` throws groundqa::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                              \
    do {                                                                                    \
        try {                                                                               \
            stmt;                                                                           \
            ADD_FAILURE() << #stmt " did not throw";                                        \
        } catch (const ::groundqa::Error& e) {                                              \
            EXPECT_EQ(e.code(), expected_code) << #stmt ": " << e.what();                   \
        }                                                                                   \
    } while (0)
