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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundqa/gateway.hpp"
#include "groundqa/ingest.hpp"
#include "groundqa/vector_index.hpp"

namespace groundqa {

struct ChunkRecord {
    std::string chunk_id;
    std::string document_id;
    int page_number = 1;
    std::string text;
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    std::size_t chunk_index = 0;
    std::size_t embedding_row = 0;

    bool operator==(const ChunkRecord&) const = default;
};

struct ConversationTurn {
    std::size_t turn_index = 0;
    std::string question;
    std::string answer;
    bool insufficient_context = false;
    std::vector<std::string> citation_chunk_ids;
    std::string created_at;

    bool operator==(const ConversationTurn&) const = default;
};

void to_json(nlohmann::json& j, const DocumentRecord& r);
void from_json(const nlohmann::json& j, DocumentRecord& r);
void to_json(nlohmann::json& j, const ChunkRecord& r);
void from_json(const nlohmann::json& j, ChunkRecord& r);
void to_json(nlohmann::json& j, const ConversationTurn& t);
void from_json(const nlohmann::json& j, ConversationTurn& t);

/// Durable store rooted at one data directory:
///
///   documents.jsonl      one DocumentRecord per line; a line is the commit
///                        marker for its document
///   chunks.jsonl         ChunkRecords
///   embeddings.f32       row-major little-endian float32 matrix
///   embeddings.meta.json {dim, count, model}
///   index.hnsw           HNSW graph over all live chunks
///   conversations.jsonl  conversation headers and turns
///
/// A document commit appends embeddings, then chunks, then rewrites the meta
/// file, then appends the document line. Reopening after a crash truncates
/// torn tails, drops chunks whose document line never landed, and rebuilds
/// the index when it does not match the chunk set.
///
/// Readers take a shared lock; writers are exclusive.
class Store {
  public:
    explicit Store(std::filesystem::path dir, HnswParams index_params = {});
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& dir() const noexcept { return dir_; }

    // Documents and chunks ------------------------------------------------

    /// Commits a document with its chunks (embedding_row is assigned here)
    /// and one embedding per chunk. Returns false without writing when the
    /// document id is already present. Throws DimensionMismatch if the
    /// embeddings disagree with the stored dimension.
    bool put_document(const DocumentRecord& record, std::vector<ChunkRecord> chunks, std::span<const Vector> embeddings,
                      std::string_view embed_model);

    /// Removes the document and its chunks, then rebuilds the index.
    /// Throws NotFound.
    void delete_document(std::string_view document_id);

    std::optional<DocumentRecord> find_document(std::string_view document_id) const;
    DocumentRecord get_document(std::string_view document_id) const;
    std::vector<DocumentRecord> list_documents() const;  ///< commit order

    ChunkRecord get_chunk(std::string_view chunk_id) const;
    std::vector<ChunkRecord> chunks_by_document(std::string_view document_id) const;
    Vector embedding(std::size_t row) const;
    std::size_t chunk_count() const;

    // Index ---------------------------------------------------------------

    /// Throws EmptyIndex when no chunk is stored.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;
    std::size_t index_size() const;
    std::size_t embedding_dimension() const;
    std::string embedding_model() const;

    // Conversations -------------------------------------------------------

    std::string create_conversation();
    bool has_conversation(std::string_view conversation_id) const;

    /// Assigns turn_index and created_at. Throws NotFound.
    ConversationTurn append_turn(std::string_view conversation_id, ConversationTurn turn);

    /// The most recent last_n turns (all when nullopt) in chronological
    /// order. Throws NotFound.
    std::vector<ConversationTurn> get_history(std::string_view conversation_id,
                                              std::optional<std::size_t> last_n = std::nullopt) const;

  private:
    void recover();
    void load_documents();
    void load_chunks();
    void load_embeddings();
    void load_conversations();
    void open_index();
    void rebuild_index();
    void save_meta() const;
    void rewrite_chunks() const;
    void rewrite_documents() const;

    std::filesystem::path dir_;
    HnswParams index_params_;
    mutable WriterPriorityMutex mutex_;

    std::vector<DocumentRecord> documents_;
    std::unordered_map<std::string, std::size_t> document_pos_;
    std::vector<ChunkRecord> chunks_;
    std::unordered_map<std::string, std::size_t> chunk_pos_;

    std::size_t dim_ = 0;
    std::size_t rows_ = 0;
    std::string model_;
    std::vector<float> embeddings_;

    std::unique_ptr<HnswIndex> index_;

    std::map<std::string, std::vector<ConversationTurn>, std::less<>> conversations_;
};

}  // namespace groundqa
