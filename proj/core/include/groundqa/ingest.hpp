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
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundqa/chunking.hpp"
#include "groundqa/gateway.hpp"

namespace groundqa {

class Store;

enum class SourceFormat { kPdf, kPlainText };

/// "%PDF-" magic within the first 1024 bytes selects PDF, anything else is
/// treated as plain text.
SourceFormat detect_format(std::string_view bytes) noexcept;

struct DocumentPage {
    std::string document_id;
    std::string file_name;
    int page_number = 1;
    std::string text;  ///< stripped; empty for blank pages
};

struct DocumentRecord {
    std::string document_id;
    std::string file_name;
    int page_count = 0;
    std::size_t chunk_count = 0;
    std::string summary;
    bool summary_fallback = false;
    std::string ingested_at;  ///< ISO-8601 UTC

    bool operator==(const DocumentRecord&) const = default;
};

/// One page per physical PDF page (one for plain text), stripped of
/// surrounding whitespace, blank pages kept. Throws MalformedDocument and
/// EmptyDocument.
std::vector<DocumentPage> extract_pages(std::string_view bytes, std::string_view file_name, SourceFormat format);

struct SummaryConfig {
    std::string model;
    std::size_t batch_chars = 8000;
    std::size_t max_chars = 2000;
    double temperature = 0.1;
    int context_window = 32000;
};

struct Summary {
    std::string text;
    bool fallback = false;
    std::size_t generator_calls = 0;
};

/// Map-reduce summary: pages are packed into batches of at most batch_chars
/// characters of page text, each batch is summarized, then the joined batch
/// summaries are summarized once more. A document that fits one batch takes
/// a single call. When the generator is unavailable the result is the first
/// max_chars characters of the concatenated text, flagged as fallback.
Summary summarize_document(std::span<const DocumentPage> pages, Generator& generator, const SummaryConfig& config);

struct IngestConfig {
    ChunkerConfig chunker = SemanticChunkConfig{};
    SummaryConfig summary;
};

struct IngestResult {
    DocumentRecord record;
    bool created = false;  ///< false when the document was already present
};

/// Extract, summarize, chunk, embed and commit one document. Re-ingesting
/// byte-identical content under the same file name returns the stored record
/// untouched. Nothing is persisted unless every stage succeeds.
class Ingestor {
  public:
    Ingestor(Store& store, Embedder& embedder, Generator& generator, IngestConfig config);

    IngestResult ingest(std::string_view bytes, std::string_view file_name, SourceFormat format);

    const IngestConfig& config() const noexcept { return config_; }

  private:
    Store& store_;
    Embedder& embedder_;
    Generator& generator_;
    IngestConfig config_;
    std::mutex mutex_;
};

}  // namespace groundqa
