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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundqa/config.hpp"
#include "groundqa/gateway.hpp"
#include "groundqa/generation.hpp"
#include "groundqa/ingest.hpp"
#include "groundqa/retrieval.hpp"
#include "groundqa/store.hpp"

namespace groundqa {

struct Health {
    std::string status;  ///< "ok" or "degraded"
    bool embed_up = false;
    bool generate_up = false;
    bool rerank_up = false;
    std::size_t index_size = 0;
};

/// Wires the store, model backends, ingestion, retrieval and answering
/// together from one EngineConfig.
class Engine {
  public:
    /// Backends are built from the config's mode keys.
    explicit Engine(EngineConfig config);

    /// Injected backends, used by tests and the evaluation harness.
    Engine(EngineConfig config, std::unique_ptr<Embedder> embedder, std::unique_ptr<Generator> generator,
           std::unique_ptr<Reranker> reranker);

    ~Engine();

    /// Format is sniffed from the bytes when not given.
    IngestResult ingest(std::string_view bytes, std::string_view file_name,
                        std::optional<SourceFormat> format = std::nullopt);
    std::vector<DocumentRecord> documents() const;
    void delete_document(std::string_view document_id);

    std::string create_conversation();
    std::vector<ConversationTurn> history(std::string_view conversation_id) const;

    Answer query(std::string_view conversation_id, std::string_view question,
                 const std::optional<std::string>& document_id = std::nullopt);

    Health health();

    const EngineConfig& config() const noexcept { return config_; }
    Store& store() noexcept { return *store_; }
    Embedder& embedder() noexcept { return *embedder_; }
    Generator& generator() noexcept { return *generator_; }
    Reranker& reranker() noexcept { return *reranker_; }
    const RetrievalPipeline& pipeline() const noexcept { return *pipeline_; }

  private:
    EngineConfig config_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<Generator> generator_;
    std::unique_ptr<Reranker> reranker_;
    std::unique_ptr<Store> store_;
    std::unique_ptr<Ingestor> ingestor_;
    std::unique_ptr<RetrievalPipeline> pipeline_;
    std::unique_ptr<AnswerEngine> answers_;
};

std::unique_ptr<Embedder> make_embedder(const EngineConfig& config);
std::unique_ptr<Generator> make_generator(const EngineConfig& config);
std::unique_ptr<Reranker> make_reranker(const EngineConfig& config);

}  // namespace groundqa
