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


#include <gtest/gtest.h>

#include <csignal>
#include <fstream>
#include <random>
#include <set>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "groundqa/error.hpp"
#include "groundqa/hash.hpp"
#include "groundqa/store.hpp"
#include "test_support.hpp"

namespace groundqa {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

constexpr std::size_t kDim = 8;

struct DocFixture {
    DocumentRecord record;
    std::vector<ChunkRecord> chunks;
    std::vector<Vector> embeddings;
};

DocFixture make_doc(const std::string& name, std::size_t n_chunks, std::uint64_t seed) {
    DocFixture f;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0, 1);
    const std::string content = fmt::format("{} content {}", name, seed);
    f.record.document_id = make_document_id(name, content);
    f.record.file_name = name;
    f.record.page_count = 1;
    f.record.chunk_count = n_chunks;
    f.record.summary = "summary of " + name;
    f.record.ingested_at = "2026-01-01T00:00:00Z";
    // Stored in reverse so ordering by chunk_index is observable.
    for (std::size_t i = n_chunks; i-- > 0;) {
        ChunkRecord c;
        c.document_id = f.record.document_id;
        c.chunk_index = i;
        c.text = fmt::format("{} chunk {}", name, i);
        c.chunk_id = make_chunk_id(c.document_id, i, c.text);
        c.start_offset = i * 100;
        c.end_offset = i * 100 + 50;
        f.chunks.push_back(c);
        Vector v(kDim);
        for (auto& x : v) x = normal(rng);
        f.embeddings.push_back(std::move(v));
    }
    return f;
}

bool put(Store& store, const DocFixture& f, const std::string& model = "m") {
    return store.put_document(f.record, f.chunks, f.embeddings, model);
}

TEST(Store, PutThenGetReturnsEqualRecords) {
    TempDir dir;
    Store store(dir.path());
    const auto f = make_doc("a.txt", 3, 1);
    EXPECT_TRUE(put(store, f));
    EXPECT_EQ(store.get_document(f.record.document_id), f.record);
    for (const auto& c : f.chunks) {
        const auto got = store.get_chunk(c.chunk_id);
        EXPECT_EQ(got.text, c.text);
        EXPECT_EQ(got.chunk_index, c.chunk_index);
        EXPECT_EQ(store.embedding(got.embedding_row), f.embeddings[3 - 1 - c.chunk_index]);
    }
    EXPECT_EQ(store.chunk_count(), 3u);
    EXPECT_EQ(store.index_size(), 3u);
    EXPECT_EQ(store.embedding_dimension(), kDim);
    EXPECT_EQ(store.embedding_model(), "m");
}

TEST(Store, UnknownIdsAreNotFound) {
    TempDir dir;
    Store store(dir.path());
    EXPECT_ERROR_CODE(store.get_document("0123"), ErrorCode::kNotFound);
    EXPECT_ERROR_CODE(store.get_chunk("0123"), ErrorCode::kNotFound);
    EXPECT_ERROR_CODE(store.chunks_by_document("0123"), ErrorCode::kNotFound);
    EXPECT_ERROR_CODE(store.delete_document("0123"), ErrorCode::kNotFound);
    EXPECT_ERROR_CODE(store.embedding(0), ErrorCode::kNotFound);
    EXPECT_FALSE(store.find_document("0123").has_value());
}

TEST(Store, ChunksByDocumentAreOrderedByIndex) {
    TempDir dir;
    Store store(dir.path());
    const auto f = make_doc("a.txt", 5, 2);
    put(store, f);
    const auto chunks = store.chunks_by_document(f.record.document_id);
    ASSERT_EQ(chunks.size(), 5u);
    for (std::size_t i = 0; i < chunks.size(); ++i) EXPECT_EQ(chunks[i].chunk_index, i);
}

TEST(Store, DuplicateDocumentIsNotWrittenTwice) {
    TempDir dir;
    Store store(dir.path());
    const auto f = make_doc("a.txt", 2, 3);
    EXPECT_TRUE(put(store, f));
    const auto size = fs::file_size(dir / "chunks.jsonl");
    EXPECT_FALSE(put(store, f));
    EXPECT_EQ(fs::file_size(dir / "chunks.jsonl"), size);
    EXPECT_EQ(store.list_documents().size(), 1u);
}

TEST(Store, RejectsMismatchedInputs) {
    TempDir dir;
    Store store(dir.path());
    auto f = make_doc("a.txt", 2, 4);
    EXPECT_ERROR_CODE(store.put_document(f.record, f.chunks, std::span(f.embeddings).first(1), "m"),
                      ErrorCode::kInvalidArgument);
    put(store, f);

    auto wrong_dim = make_doc("b.txt", 2, 5);
    wrong_dim.embeddings[1].push_back(0.5f);
    EXPECT_ERROR_CODE(put(store, wrong_dim), ErrorCode::kDimensionMismatch);

    EXPECT_ERROR_CODE(put(store, make_doc("c.txt", 2, 6), "other-model"), ErrorCode::kInvalidArgument);
    EXPECT_EQ(store.list_documents().size(), 1u);
    EXPECT_EQ(store.chunk_count(), 2u);
}

TEST(Store, ListDocumentsKeepsCommitOrder) {
    TempDir dir;
    Store store(dir.path());
    std::vector<std::string> expected;
    for (int i = 0; i < 4; ++i) {
        const auto f = make_doc(fmt::format("d{}.txt", 3 - i), 1, 10 + i);
        put(store, f);
        expected.push_back(f.record.document_id);
    }
    std::vector<std::string> got;
    for (const auto& d : store.list_documents()) got.push_back(d.document_id);
    EXPECT_EQ(got, expected);
}

TEST(Store, SearchFindsStoredEmbedding) {
    TempDir dir;
    Store store(dir.path());
    EXPECT_ERROR_CODE(store.search(Vector(kDim, 1.0f), 3), ErrorCode::kEmptyIndex);
    const auto a = make_doc("a.txt", 4, 20);
    const auto b = make_doc("b.txt", 4, 21);
    put(store, a);
    put(store, b);
    const auto hits = store.search(b.embeddings[2], 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].chunk_id, b.chunks[2].chunk_id);
}

TEST(Store, ReopenRestoresEverything) {
    TempDir dir;
    const auto a = make_doc("a.txt", 3, 30);
    const auto b = make_doc("b.txt", 2, 31);
    std::string conv;
    {
        Store store(dir.path());
        put(store, a);
        put(store, b);
        conv = store.create_conversation();
        ConversationTurn t;
        t.question = "q";
        t.answer = "a";
        t.citation_chunk_ids = {a.chunks[0].chunk_id};
        store.append_turn(conv, t);
    }
    Store store(dir.path());
    ASSERT_EQ(store.list_documents().size(), 2u);
    EXPECT_EQ(store.get_document(a.record.document_id), a.record);
    EXPECT_EQ(store.chunk_count(), 5u);
    EXPECT_EQ(store.index_size(), 5u);
    for (std::size_t i = 0; i < b.chunks.size(); ++i) {
        EXPECT_EQ(store.embedding(store.get_chunk(b.chunks[i].chunk_id).embedding_row), b.embeddings[i]);
    }
    const auto history = store.get_history(conv);
    ASSERT_EQ(history.size(), 1u);
    EXPECT_EQ(history[0].question, "q");
    for (const auto& id : history[0].citation_chunk_ids) EXPECT_NO_THROW(store.get_chunk(id));
}

TEST(Store, ReopenReusesMatchingIndexFile) {
    TempDir dir;
    {
        Store store(dir.path());
        put(store, make_doc("a.txt", 6, 40));
    }
    const auto before = fs::last_write_time(dir / "index.hnsw");
    Store store(dir.path());
    EXPECT_EQ(fs::last_write_time(dir / "index.hnsw"), before);
    EXPECT_EQ(store.index_size(), 6u);
}

TEST(Store, DamagedIndexFileIsRebuilt) {
    TempDir dir;
    const auto a = make_doc("a.txt", 6, 41);
    {
        Store store(dir.path());
        put(store, a);
    }
    {
        std::fstream f(dir / "index.hnsw", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(40);
        f.put('\x7f');
    }
    Store store(dir.path());
    EXPECT_EQ(store.index_size(), 6u);
    EXPECT_EQ(store.search(a.embeddings[0], 1).at(0).chunk_id, a.chunks[0].chunk_id);
}

TEST(Store, TornTailsAreDiscardedOnReopen) {
    TempDir dir;
    const auto a = make_doc("a.txt", 2, 50);
    const auto orphan = make_doc("b.txt", 3, 51);
    {
        Store store(dir.path());
        put(store, a);
    }
    // A second commit that died after its chunk lines but before its
    // document line, plus half-written trailing records.
    {
        std::ofstream chunks(dir / "chunks.jsonl", std::ios::app);
        for (auto c : orphan.chunks) {
            c.embedding_row = 0;
            chunks << nlohmann::json(c).dump() << "\n";
        }
        chunks << "{\"chunk_id\": \"trunc";
        std::ofstream docs(dir / "documents.jsonl", std::ios::app);
        docs << "{\"document_id\": \"" << orphan.record.document_id;
        std::ofstream emb(dir / "embeddings.f32", std::ios::app | std::ios::binary);
        emb << "abcdefg";
    }
    {
        Store store(dir.path());
        EXPECT_EQ(store.list_documents().size(), 1u);
        EXPECT_EQ(store.chunk_count(), 2u);
        EXPECT_EQ(store.index_size(), 2u);
        EXPECT_FALSE(store.find_document(orphan.record.document_id).has_value());
        EXPECT_EQ(fs::file_size(dir / "embeddings.f32"), 2 * kDim * sizeof(float));
        // The orphaned document can be committed afresh.
        EXPECT_TRUE(put(store, orphan));
        EXPECT_EQ(store.chunk_count(), 5u);
    }
    Store store(dir.path());
    EXPECT_EQ(store.chunks_by_document(orphan.record.document_id).size(), 3u);
}

TEST(Store, DamageBeforeTheTailIsCorruptFile) {
    TempDir dir;
    {
        Store store(dir.path());
        put(store, make_doc("a.txt", 1, 60));
        put(store, make_doc("b.txt", 1, 61));
    }
    std::string docs;
    {
        std::ifstream in(dir / "documents.jsonl");
        docs.assign(std::istreambuf_iterator<char>(in), {});
    }
    docs[0] = '#';
    std::ofstream(dir / "documents.jsonl", std::ios::trunc) << docs;
    EXPECT_ERROR_CODE(Store{dir.path()}, ErrorCode::kCorruptFile);
}

TEST(Store, DeleteRemovesDocumentAndChunks) {
    TempDir dir;
    const auto a = make_doc("a.txt", 3, 70);
    const auto b = make_doc("b.txt", 2, 71);
    {
        Store store(dir.path());
        put(store, a);
        put(store, b);
        store.delete_document(a.record.document_id);
        EXPECT_FALSE(store.find_document(a.record.document_id).has_value());
        EXPECT_ERROR_CODE(store.get_chunk(a.chunks[0].chunk_id), ErrorCode::kNotFound);
        EXPECT_EQ(store.index_size(), 2u);
        for (const auto& h : store.search(a.embeddings[0], 5)) {
            EXPECT_EQ(store.get_chunk(h.chunk_id).document_id, b.record.document_id);
        }
    }
    Store store(dir.path());
    EXPECT_EQ(store.list_documents().size(), 1u);
    EXPECT_EQ(store.chunk_count(), 2u);
    EXPECT_EQ(store.embedding(store.get_chunk(b.chunks[1].chunk_id).embedding_row), b.embeddings[1]);
    store.delete_document(b.record.document_id);
    EXPECT_EQ(store.index_size(), 0u);
    EXPECT_ERROR_CODE(store.search(b.embeddings[0], 1), ErrorCode::kEmptyIndex);
}

TEST(Store, HistoryReturnsLastTurnsInOrder) {
    TempDir dir;
    Store store(dir.path());
    const auto conv = store.create_conversation();
    EXPECT_TRUE(store.has_conversation(conv));
    EXPECT_TRUE(store.get_history(conv).empty());
    for (int i = 0; i < 3; ++i) {
        ConversationTurn t;
        t.question = fmt::format("q{}", i);
        const auto stored = store.append_turn(conv, t);
        EXPECT_EQ(stored.turn_index, static_cast<std::size_t>(i));
        EXPECT_FALSE(stored.created_at.empty());
    }
    const auto last2 = store.get_history(conv, 2);
    ASSERT_EQ(last2.size(), 2u);
    EXPECT_EQ(last2[0].turn_index, 1u);
    EXPECT_EQ(last2[1].turn_index, 2u);
    EXPECT_EQ(store.get_history(conv, 10).size(), 3u);
    EXPECT_TRUE(store.get_history(conv, 0).empty());
}

TEST(Store, ConversationsAreIndependent) {
    TempDir dir;
    Store store(dir.path());
    const auto c1 = store.create_conversation();
    const auto c2 = store.create_conversation();
    EXPECT_NE(c1, c2);
    EXPECT_EQ(c1.size(), 32u);
    store.append_turn(c1, {});
    store.append_turn(c1, {});
    EXPECT_EQ(store.append_turn(c2, {}).turn_index, 0u);
    EXPECT_ERROR_CODE(store.append_turn("missing", {}), ErrorCode::kNotFound);
    EXPECT_ERROR_CODE(store.get_history("missing"), ErrorCode::kNotFound);
    EXPECT_FALSE(store.has_conversation("missing"));
}

TEST(Store, TurnIndexContinuesAfterReopen) {
    TempDir dir;
    std::string conv;
    {
        Store store(dir.path());
        conv = store.create_conversation();
        store.append_turn(conv, {});
        store.append_turn(conv, {});
    }
    Store store(dir.path());
    EXPECT_EQ(store.append_turn(conv, {}).turn_index, 2u);
}

TEST(Store, KilledWriterLeavesCommittedDocumentsIntact) {
    TempDir dir;
    int fds[2];
    ASSERT_EQ(pipe(fds), 0);
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        close(fds[0]);
        try {
            Store store(dir.path());
            for (int i = 0; i < 10000; ++i) {
                put(store, make_doc(fmt::format("doc{}.txt", i), 40, 1000 + i));
                const char c = 'x';
                if (write(fds[1], &c, 1) != 1) _exit(2);
            }
        } catch (...) {
            _exit(3);
        }
        _exit(0);
    }
    close(fds[1]);
    char buf[3];
    std::size_t got = 0;
    while (got < 3) {
        const auto n = read(fds[0], buf + got, 3 - got);
        ASSERT_GT(n, 0);
        got += static_cast<std::size_t>(n);
    }
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    close(fds[0]);
    ASSERT_TRUE(WIFSIGNALED(status));

    Store store(dir.path());
    const auto docs = store.list_documents();
    ASSERT_GE(docs.size(), 3u);
    std::size_t chunks = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto expected = make_doc(fmt::format("doc{}.txt", i), 40, 1000 + i);
        EXPECT_EQ(docs[i].document_id, expected.record.document_id);
        const auto stored = store.chunks_by_document(docs[i].document_id);
        ASSERT_EQ(stored.size(), 40u);
        for (const auto& c : stored) {
            EXPECT_EQ(store.embedding(c.embedding_row), expected.embeddings[40 - 1 - c.chunk_index]);
        }
        chunks += stored.size();
    }
    EXPECT_EQ(store.chunk_count(), chunks);
    EXPECT_EQ(store.index_size(), chunks);
}

}  // namespace
}  // namespace groundqa
