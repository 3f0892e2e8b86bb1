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


#include "groundqa/store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>
#include <nlohmann/json.hpp>

#include "fileio.hpp"
#include "groundqa/error.hpp"
#include "groundqa/hash.hpp"

namespace groundqa {

static_assert(std::endian::native == std::endian::little, "embedding files are little-endian float32");

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const DocumentRecord& r) {
    j = json{{"document_id", r.document_id}, {"file_name", r.file_name},       {"page_count", r.page_count},
             {"chunk_count", r.chunk_count}, {"summary", r.summary},           {"summary_fallback", r.summary_fallback},
             {"ingested_at", r.ingested_at}};
}

void from_json(const json& j, DocumentRecord& r) {
    j.at("document_id").get_to(r.document_id);
    j.at("file_name").get_to(r.file_name);
    j.at("page_count").get_to(r.page_count);
    j.at("chunk_count").get_to(r.chunk_count);
    j.at("summary").get_to(r.summary);
    r.summary_fallback = j.value("summary_fallback", false);
    j.at("ingested_at").get_to(r.ingested_at);
}

void to_json(json& j, const ChunkRecord& r) {
    j = json{{"chunk_id", r.chunk_id},         {"document_id", r.document_id}, {"page_number", r.page_number},
             {"text", r.text},                 {"start_offset", r.start_offset}, {"end_offset", r.end_offset},
             {"chunk_index", r.chunk_index},   {"embedding_row", r.embedding_row}};
}

void from_json(const json& j, ChunkRecord& r) {
    j.at("chunk_id").get_to(r.chunk_id);
    j.at("document_id").get_to(r.document_id);
    j.at("page_number").get_to(r.page_number);
    j.at("text").get_to(r.text);
    j.at("start_offset").get_to(r.start_offset);
    j.at("end_offset").get_to(r.end_offset);
    j.at("chunk_index").get_to(r.chunk_index);
    j.at("embedding_row").get_to(r.embedding_row);
}

void to_json(json& j, const ConversationTurn& t) {
    j = json{{"turn_index", t.turn_index},
             {"question", t.question},
             {"answer", t.answer},
             {"insufficient_context", t.insufficient_context},
             {"citation_chunk_ids", t.citation_chunk_ids},
             {"created_at", t.created_at}};
}

void from_json(const json& j, ConversationTurn& t) {
    j.at("turn_index").get_to(t.turn_index);
    j.at("question").get_to(t.question);
    j.at("answer").get_to(t.answer);
    j.at("insufficient_context").get_to(t.insufficient_context);
    j.at("citation_chunk_ids").get_to(t.citation_chunk_ids);
    j.at("created_at").get_to(t.created_at);
}

namespace {

constexpr const char* kDocuments = "documents.jsonl";
constexpr const char* kChunks = "chunks.jsonl";
constexpr const char* kEmbeddings = "embeddings.f32";
constexpr const char* kMeta = "embeddings.meta.json";
constexpr const char* kIndex = "index.hnsw";
constexpr const char* kConversations = "conversations.jsonl";

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n"; }

/// Parses a JSON-lines file. A torn final line (no newline or unparseable)
/// is cut off; damage anywhere else is CorruptFile.
std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> out;
    if (!fs::exists(path)) return out;
    const std::string data = fileio::read_file(path);
    std::size_t pos = 0;
    std::size_t good_end = 0;
    while (pos < data.size()) {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) break;
        const std::string_view line(data.data() + pos, nl - pos);
        if (!line.empty()) {
            try {
                out.push_back(json::parse(line));
            } catch (const json::parse_error&) {
                if (nl + 1 < data.size()) {
                    raise(ErrorCode::kCorruptFile, fmt::format("{}: malformed record at byte {}", path.string(), pos));
                }
                break;
            }
        }
        pos = nl + 1;
        good_end = pos;
    }
    if (good_end < data.size()) fileio::truncate_file(path, good_end);
    return out;
}

std::size_t file_size_or_zero(const fs::path& path) {
    std::error_code ec;
    const auto n = fs::file_size(path, ec);
    return ec ? 0 : static_cast<std::size_t>(n);
}

}  // namespace

Store::Store(fs::path dir, HnswParams index_params) : dir_(std::move(dir)), index_params_(index_params) {
    index_params_.validate();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) raise(ErrorCode::kIoError, fmt::format("cannot create data directory {}: {}", dir_.string(), ec.message()));
    recover();
}

Store::~Store() = default;

void Store::recover() {
    std::unique_lock lock(mutex_);
    load_documents();
    load_embeddings();
    load_chunks();
    load_conversations();
    open_index();
}

void Store::load_documents() {
    documents_.clear();
    document_pos_.clear();
    for (const auto& j : read_jsonl(dir_ / kDocuments)) {
        auto rec = j.get<DocumentRecord>();
        if (document_pos_.count(rec.document_id)) continue;
        document_pos_[rec.document_id] = documents_.size();
        documents_.push_back(std::move(rec));
    }
}

void Store::load_embeddings() {
    dim_ = 0;
    rows_ = 0;
    model_.clear();
    embeddings_.clear();
    const fs::path meta_path = dir_ / kMeta;
    if (fs::exists(meta_path)) {
        try {
            const auto meta = json::parse(fileio::read_file(meta_path));
            meta.at("dim").get_to(dim_);
            meta.at("count").get_to(rows_);
            model_ = meta.value("model", "");
        } catch (const json::exception& e) {
            raise(ErrorCode::kCorruptFile, fmt::format("{}: {}", meta_path.string(), e.what()));
        }
    }
    const fs::path path = dir_ / kEmbeddings;
    const std::size_t expected = rows_ * dim_ * sizeof(float);
    const std::size_t actual = file_size_or_zero(path);
    if (actual < expected) {
        raise(ErrorCode::kCorruptFile, fmt::format("{} holds {} bytes, meta expects {}", path.string(), actual, expected));
    }
    if (actual > expected) fileio::truncate_file(path, expected);
    if (expected == 0) return;
    const std::string data = fileio::read_file(path);
    embeddings_.resize(rows_ * dim_);
    std::memcpy(embeddings_.data(), data.data(), expected);
}

void Store::load_chunks() {
    chunks_.clear();
    chunk_pos_.clear();
    bool dropped = false;
    for (const auto& j : read_jsonl(dir_ / kChunks)) {
        auto rec = j.get<ChunkRecord>();
        if (!document_pos_.count(rec.document_id) || rec.embedding_row >= rows_ || chunk_pos_.count(rec.chunk_id)) {
            dropped = true;
            continue;
        }
        chunk_pos_[rec.chunk_id] = chunks_.size();
        chunks_.push_back(std::move(rec));
    }
    // Chunks of a document whose commit never landed must not resurface if
    // the same document is ingested again.
    if (dropped) rewrite_chunks();
}

void Store::load_conversations() {
    conversations_.clear();
    for (const auto& j : read_jsonl(dir_ / kConversations)) {
        const auto id = j.at("conversation_id").get<std::string>();
        if (j.value("type", "") == "conversation") {
            conversations_.try_emplace(id);
        } else {
            auto it = conversations_.find(id);
            if (it == conversations_.end()) continue;
            it->second.push_back(j.get<ConversationTurn>());
        }
    }
}

void Store::open_index() {
    const fs::path path = dir_ / kIndex;
    if (fs::exists(path)) {
        try {
            auto loaded = HnswIndex::load(path);
            const auto& p = loaded->params();
            bool usable = loaded->size() == chunks_.size() && p.M == index_params_.M &&
                          p.ef_construction == index_params_.ef_construction && p.seed == index_params_.seed;
            for (std::size_t i = 0; usable && i < chunks_.size(); ++i) usable = loaded->contains(chunks_[i].chunk_id);
            if (usable) {
                loaded->set_ef_search(index_params_.ef_search);
                index_ = std::move(loaded);
                return;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kCorruptFile && e.code() != ErrorCode::kFormatVersionMismatch) throw;
        }
    }
    rebuild_index();
    if (index_->size() > 0) {
        index_->save(path);
    } else {
        std::error_code ec;
        fs::remove(path, ec);
    }
}

void Store::rebuild_index() {
    auto fresh = std::make_unique<HnswIndex>(index_params_);
    for (const auto& c : chunks_) {
        fresh->insert(c.chunk_id, std::span<const float>(embeddings_.data() + c.embedding_row * dim_, dim_));
    }
    index_ = std::move(fresh);
}

void Store::save_meta() const {
    const json meta{{"dim", dim_}, {"count", rows_}, {"model", model_}};
    fileio::write_atomic(dir_ / kMeta, meta.dump(2) + "\n");
}

void Store::rewrite_chunks() const {
    std::string data;
    for (const auto& c : chunks_) data += dump_line(json(c));
    fileio::write_atomic(dir_ / kChunks, data);
}

void Store::rewrite_documents() const {
    std::string data;
    for (const auto& d : documents_) data += dump_line(json(d));
    fileio::write_atomic(dir_ / kDocuments, data);
}

bool Store::put_document(const DocumentRecord& record, std::vector<ChunkRecord> chunks,
                         std::span<const Vector> embeddings, std::string_view embed_model) {
    if (chunks.size() != embeddings.size()) {
        raise(ErrorCode::kInvalidArgument,
              fmt::format("{} chunks but {} embeddings", chunks.size(), embeddings.size()));
    }
    std::unique_lock lock(mutex_);
    if (document_pos_.count(record.document_id)) return false;

    std::size_t dim = dim_;
    for (const auto& e : embeddings) {
        if (dim == 0) dim = e.size();
        if (e.size() != dim || dim == 0) {
            raise(ErrorCode::kDimensionMismatch, fmt::format("embedding dimension {} does not match store dimension {}",
                                                             e.size(), dim));
        }
    }
    if (rows_ > 0 && !model_.empty() && model_ != embed_model) {
        raise(ErrorCode::kInvalidArgument,
              fmt::format("store holds embeddings from model '{}', refusing '{}'", model_, embed_model));
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (chunks[i].document_id != record.document_id) {
            raise(ErrorCode::kInvalidArgument, "chunk belongs to a different document");
        }
        if (chunk_pos_.count(chunks[i].chunk_id)) raise(ErrorCode::kDuplicateId, "chunk id already stored");
        chunks[i].embedding_row = rows_ + i;
    }

    const fs::path emb_path = dir_ / kEmbeddings;
    const fs::path chunk_path = dir_ / kChunks;
    const std::size_t emb_size = file_size_or_zero(emb_path);
    const std::size_t chunk_size = file_size_or_zero(chunk_path);
    const std::size_t old_dim = dim_, old_rows = rows_;
    const std::string old_model = model_;
    try {
        std::string blob;
        blob.reserve(embeddings.size() * dim * sizeof(float));
        for (const auto& e : embeddings) blob.append(reinterpret_cast<const char*>(e.data()), e.size() * sizeof(float));
        fileio::append_durable(emb_path, blob);

        std::string lines;
        for (const auto& c : chunks) lines += dump_line(json(c));
        fileio::append_durable(chunk_path, lines);

        dim_ = dim;
        rows_ += chunks.size();
        model_ = std::string(embed_model);
        save_meta();

        fileio::append_durable(dir_ / kDocuments, dump_line(json(record)));
    } catch (...) {
        dim_ = old_dim;
        rows_ = old_rows;
        model_ = old_model;
        try {
            if (fs::exists(emb_path)) fileio::truncate_file(emb_path, emb_size);
            if (fs::exists(chunk_path)) fileio::truncate_file(chunk_path, chunk_size);
            save_meta();
        } catch (const Error&) {
            // Recovery on the next open discards whatever is left behind.
        }
        throw;
    }

    for (const auto& e : embeddings) embeddings_.insert(embeddings_.end(), e.begin(), e.end());
    document_pos_[record.document_id] = documents_.size();
    documents_.push_back(record);
    for (auto& c : chunks) {
        index_->insert(c.chunk_id, std::span<const float>(embeddings_.data() + c.embedding_row * dim_, dim_));
        chunk_pos_[c.chunk_id] = chunks_.size();
        chunks_.push_back(std::move(c));
    }
    try {
        index_->save(dir_ / kIndex);
    } catch (const Error&) {
        // The document is committed; a stale index file is rebuilt on reopen.
    }
    return true;
}

void Store::delete_document(std::string_view document_id) {
    std::unique_lock lock(mutex_);
    auto it = document_pos_.find(std::string(document_id));
    if (it == document_pos_.end()) raise(ErrorCode::kNotFound, fmt::format("document {} not found", document_id));
    documents_.erase(documents_.begin() + static_cast<std::ptrdiff_t>(it->second));
    std::erase_if(chunks_, [&](const ChunkRecord& c) { return c.document_id == document_id; });
    document_pos_.clear();
    for (std::size_t i = 0; i < documents_.size(); ++i) document_pos_[documents_[i].document_id] = i;
    chunk_pos_.clear();
    for (std::size_t i = 0; i < chunks_.size(); ++i) chunk_pos_[chunks_[i].chunk_id] = i;

    // Documents first: a crash between the two renames leaves orphan chunks,
    // which recovery drops.
    rewrite_documents();
    rewrite_chunks();
    // TODO: compact embeddings.f32; deleted rows stay as unreferenced padding.
    rebuild_index();
    const fs::path path = dir_ / kIndex;
    if (index_->size() > 0) {
        index_->save(path);
    } else {
        std::error_code ec;
        fs::remove(path, ec);
    }
}

std::optional<DocumentRecord> Store::find_document(std::string_view document_id) const {
    std::shared_lock lock(mutex_);
    auto it = document_pos_.find(std::string(document_id));
    if (it == document_pos_.end()) return std::nullopt;
    return documents_[it->second];
}

DocumentRecord Store::get_document(std::string_view document_id) const {
    auto rec = find_document(document_id);
    if (!rec) raise(ErrorCode::kNotFound, fmt::format("document {} not found", document_id));
    return *rec;
}

std::vector<DocumentRecord> Store::list_documents() const {
    std::shared_lock lock(mutex_);
    return documents_;
}

ChunkRecord Store::get_chunk(std::string_view chunk_id) const {
    std::shared_lock lock(mutex_);
    auto it = chunk_pos_.find(std::string(chunk_id));
    if (it == chunk_pos_.end()) raise(ErrorCode::kNotFound, fmt::format("chunk {} not found", chunk_id));
    return chunks_[it->second];
}

std::vector<ChunkRecord> Store::chunks_by_document(std::string_view document_id) const {
    std::shared_lock lock(mutex_);
    if (!document_pos_.count(std::string(document_id))) {
        raise(ErrorCode::kNotFound, fmt::format("document {} not found", document_id));
    }
    std::vector<ChunkRecord> out;
    for (const auto& c : chunks_) {
        if (c.document_id == document_id) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.chunk_index < b.chunk_index; });
    return out;
}

Vector Store::embedding(std::size_t row) const {
    std::shared_lock lock(mutex_);
    if (row >= rows_) raise(ErrorCode::kNotFound, fmt::format("embedding row {} not found", row));
    return Vector(embeddings_.begin() + static_cast<std::ptrdiff_t>(row * dim_),
                  embeddings_.begin() + static_cast<std::ptrdiff_t>((row + 1) * dim_));
}

std::size_t Store::chunk_count() const {
    std::shared_lock lock(mutex_);
    return chunks_.size();
}

std::vector<SearchHit> Store::search(std::span<const float> query, std::size_t k) const {
    std::shared_lock lock(mutex_);
    return index_->search_knn(query, k);
}

std::size_t Store::index_size() const {
    std::shared_lock lock(mutex_);
    return index_->size();
}

std::size_t Store::embedding_dimension() const {
    std::shared_lock lock(mutex_);
    return dim_;
}

std::string Store::embedding_model() const {
    std::shared_lock lock(mutex_);
    return model_;
}

std::string Store::create_conversation() {
    std::unique_lock lock(mutex_);
    std::string id = random_id128();
    const json line{{"type", "conversation"}, {"conversation_id", id}, {"created_at", utc_timestamp()}};
    fileio::append_durable(dir_ / kConversations, dump_line(line));
    conversations_.try_emplace(id);
    return id;
}

bool Store::has_conversation(std::string_view conversation_id) const {
    std::shared_lock lock(mutex_);
    return conversations_.find(conversation_id) != conversations_.end();
}

ConversationTurn Store::append_turn(std::string_view conversation_id, ConversationTurn turn) {
    std::unique_lock lock(mutex_);
    auto it = conversations_.find(conversation_id);
    if (it == conversations_.end()) {
        raise(ErrorCode::kNotFound, fmt::format("conversation {} not found", conversation_id));
    }
    turn.turn_index = it->second.size();
    turn.created_at = utc_timestamp();
    json line = turn;
    line["type"] = "turn";
    line["conversation_id"] = std::string(conversation_id);
    fileio::append_durable(dir_ / kConversations, dump_line(line));
    it->second.push_back(turn);
    return turn;
}

std::vector<ConversationTurn> Store::get_history(std::string_view conversation_id,
                                                 std::optional<std::size_t> last_n) const {
    std::shared_lock lock(mutex_);
    auto it = conversations_.find(conversation_id);
    if (it == conversations_.end()) {
        raise(ErrorCode::kNotFound, fmt::format("conversation {} not found", conversation_id));
    }
    const auto& turns = it->second;
    const std::size_t n = last_n ? std::min(*last_n, turns.size()) : turns.size();
    return {turns.end() - static_cast<std::ptrdiff_t>(n), turns.end()};
}

}  // namespace groundqa
