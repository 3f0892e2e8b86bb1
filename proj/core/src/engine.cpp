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


#include "groundqa/engine.hpp"

#include "groundqa/error.hpp"

namespace groundqa {

std::unique_ptr<Embedder> make_embedder(const EngineConfig& config) {
    if (config.embed_mode == "http") return std::make_unique<HttpEmbedder>(config.embed);
    return std::make_unique<HashedTokenEmbedder>(config.embed_dim);
}

std::unique_ptr<Generator> make_generator(const EngineConfig& config) {
    if (config.generate_mode == "http") return std::make_unique<HttpGenerator>(config.generate);
    return std::make_unique<ExtractiveGenerator>(config.generation.sentinel);
}

std::unique_ptr<Reranker> make_reranker(const EngineConfig& config) {
    if (config.rerank_mode == "http") return std::make_unique<HttpReranker>(config.rerank, config.rerank_logistic);
    return std::make_unique<LexicalReranker>();
}

Engine::Engine(EngineConfig config)
    : Engine(config, make_embedder(config), make_generator(config), make_reranker(config)) {}

Engine::Engine(EngineConfig config, std::unique_ptr<Embedder> embedder, std::unique_ptr<Generator> generator,
               std::unique_ptr<Reranker> reranker)
    : config_(std::move(config)),
      embedder_(std::move(embedder)),
      generator_(std::move(generator)),
      reranker_(std::move(reranker)) {
    config_.validate();
    store_ = std::make_unique<Store>(config_.data_dir, config_.index);
    ingestor_ = std::make_unique<Ingestor>(*store_, *embedder_, *generator_, IngestConfig{config_.chunker, config_.summary});
    pipeline_ = std::make_unique<RetrievalPipeline>(*store_, *embedder_, *generator_, *reranker_, config_.retrieval);
    answers_ = std::make_unique<AnswerEngine>(*store_, *pipeline_, *generator_, config_.generation);
}

Engine::~Engine() = default;

IngestResult Engine::ingest(std::string_view bytes, std::string_view file_name, std::optional<SourceFormat> format) {
    return ingestor_->ingest(bytes, file_name, format.value_or(detect_format(bytes)));
}

std::vector<DocumentRecord> Engine::documents() const { return store_->list_documents(); }

void Engine::delete_document(std::string_view document_id) { store_->delete_document(document_id); }

std::string Engine::create_conversation() { return store_->create_conversation(); }

std::vector<ConversationTurn> Engine::history(std::string_view conversation_id) const {
    return store_->get_history(conversation_id);
}

Answer Engine::query(std::string_view conversation_id, std::string_view question,
                     const std::optional<std::string>& document_id) {
    return answers_->answer_query(conversation_id, question, document_id);
}

Health Engine::health() {
    Health h;
    h.embed_up = embedder_->available();
    h.generate_up = generator_->available();
    h.rerank_up = reranker_->available();
    h.index_size = store_->index_size();
    h.status = h.embed_up && h.generate_up && h.rerank_up ? "ok" : "degraded";
    return h;
}

}  // namespace groundqa
