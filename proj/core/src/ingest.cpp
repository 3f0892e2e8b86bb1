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


#include "groundqa/ingest.hpp"

#include <fmt/format.h>

#include "groundqa/error.hpp"
#include "groundqa/hash.hpp"
#include "groundqa/pdf.hpp"
#include "groundqa/store.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

namespace {

std::string summary_system_prompt(std::size_t max_chars, bool reduce) {
    if (reduce) {
        return fmt::format(
            "Summarize the following partial summaries of one document into a single summary of at most {} "
            "characters. Keep the main topics, obligations and defined terms.",
            max_chars);
    }
    return fmt::format(
        "Summarize the following document text in at most {} characters. Keep the main topics, obligations and "
        "defined terms.",
        max_chars);
}

std::vector<std::string> pack_batches(std::span<const DocumentPage> pages, std::size_t batch_chars) {
    std::vector<std::string> batches;
    std::string current;
    std::size_t current_len = 0;
    auto flush = [&] {
        if (!current.empty()) batches.push_back(std::move(current));
        current.clear();
        current_len = 0;
    };
    for (const auto& page : pages) {
        std::string_view rest = page.text;
        if (rest.empty()) continue;
        if (current_len + rest.size() > batch_chars) flush();
        // A page longer than one batch is sliced on its own.
        while (rest.size() > batch_chars) {
            const auto head = text::utf8_prefix(rest, batch_chars);
            batches.emplace_back(head);
            rest.remove_prefix(head.size());
        }
        if (rest.empty()) continue;
        if (!current.empty()) current += "\n\n";
        current += rest;
        current_len += rest.size();
    }
    flush();
    return batches;
}

std::string summarize_once(Generator& generator, const SummaryConfig& config, std::string prompt, bool reduce) {
    GenerationRequest req;
    req.model = config.model;
    req.system = summary_system_prompt(config.max_chars, reduce);
    req.prompt = std::move(prompt);
    req.temperature = config.temperature;
    req.context_window = config.context_window;
    return std::string(text::strip(generator.generate(req)));
}

}  // namespace

SourceFormat detect_format(std::string_view bytes) noexcept {
    return bytes.substr(0, 1024).find("%PDF-") != std::string_view::npos ? SourceFormat::kPdf
                                                                         : SourceFormat::kPlainText;
}

std::vector<DocumentPage> extract_pages(std::string_view bytes, std::string_view file_name, SourceFormat format) {
    if (text::count_non_space(bytes) == 0) raise(ErrorCode::kEmptyDocument, "document is empty");
    const std::string document_id = make_document_id(file_name, bytes);
    std::vector<std::string> raw;
    if (format == SourceFormat::kPdf) {
        raw = pdf::extract_page_texts(bytes);
        if (raw.empty()) raise(ErrorCode::kMalformedDocument, "PDF has no pages");
    } else {
        raw.emplace_back(bytes);
    }
    std::vector<DocumentPage> pages;
    pages.reserve(raw.size());
    std::size_t visible = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        DocumentPage page;
        page.document_id = document_id;
        page.file_name = std::string(file_name);
        page.page_number = static_cast<int>(i + 1);
        page.text = std::string(text::strip(raw[i]));
        visible += text::count_non_space(page.text);
        pages.push_back(std::move(page));
    }
    if (visible == 0) raise(ErrorCode::kEmptyDocument, "no extractable text in document");
    return pages;
}

Summary summarize_document(std::span<const DocumentPage> pages, Generator& generator, const SummaryConfig& config) {
    if (pages.empty()) raise(ErrorCode::kInvalidArgument, "summarize_document needs at least one page");
    if (config.batch_chars == 0 || config.max_chars == 0) {
        raise(ErrorCode::kInvalidArgument, "summary batch_chars and max_chars must be positive");
    }
    Summary out;
    const auto batches = pack_batches(pages, config.batch_chars);
    auto fallback = [&] {
        std::string joined;
        for (const auto& page : pages) {
            if (page.text.empty()) continue;
            if (!joined.empty()) joined += "\n\n";
            joined += page.text;
            if (joined.size() >= config.max_chars) break;
        }
        out.text = std::string(text::utf8_prefix(joined, config.max_chars));
        out.fallback = true;
        return out;
    };
    if (batches.empty()) return fallback();

    try {
        std::string result;
        if (batches.size() == 1) {
            ++out.generator_calls;
            result = summarize_once(generator, config, batches.front(), false);
        } else {
            std::string joined;
            for (const auto& batch : batches) {
                ++out.generator_calls;
                const auto part = summarize_once(generator, config, batch, false);
                if (!joined.empty()) joined += "\n\n";
                joined += part;
            }
            ++out.generator_calls;
            result = summarize_once(generator, config, std::move(joined), true);
        }
        if (text::count_non_space(result) == 0) return fallback();
        out.text = std::string(text::utf8_prefix(result, config.max_chars));
        return out;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kBackendUnavailable && e.code() != ErrorCode::kContextOverflow) throw;
        return fallback();
    }
}

Ingestor::Ingestor(Store& store, Embedder& embedder, Generator& generator, IngestConfig config)
    : store_(store), embedder_(embedder), generator_(generator), config_(std::move(config)) {
    std::visit([](const auto& c) { c.validate(); }, config_.chunker);
}

IngestResult Ingestor::ingest(std::string_view bytes, std::string_view file_name, SourceFormat format) {
    if (file_name.empty()) raise(ErrorCode::kInvalidArgument, "file name must be non-empty");
    const auto pages = extract_pages(bytes, file_name, format);
    const std::string& document_id = pages.front().document_id;

    std::lock_guard lock(mutex_);
    if (auto existing = store_.find_document(document_id)) return {*existing, false};

    const Summary summary = summarize_document(pages, generator_, config_.summary);

    std::vector<ChunkRecord> chunks;
    std::vector<std::string> texts;
    for (const auto& page : pages) {
        if (page.text.empty()) continue;
        for (auto& c : chunk_text(page.text, config_.chunker, embedder_)) {
            ChunkRecord rec;
            rec.chunk_index = chunks.size();
            rec.document_id = document_id;
            rec.page_number = page.page_number;
            rec.chunk_id = make_chunk_id(document_id, rec.chunk_index, c.text);
            rec.start_offset = c.start_offset;
            rec.end_offset = c.end_offset;
            texts.push_back(c.text);
            rec.text = std::move(c.text);
            chunks.push_back(std::move(rec));
        }
    }
    if (chunks.empty()) raise(ErrorCode::kEmptyDocument, "document produced no chunks");
    const auto embeddings = embedder_.embed_batch(texts);

    DocumentRecord record;
    record.document_id = document_id;
    record.file_name = std::string(file_name);
    record.page_count = static_cast<int>(pages.size());
    record.chunk_count = chunks.size();
    record.summary = summary.text;
    record.summary_fallback = summary.fallback;
    record.ingested_at = utc_timestamp();

    if (!store_.put_document(record, std::move(chunks), embeddings, embedder_.model())) {
        return {store_.get_document(document_id), false};
    }
    return {record, true};
}

}  // namespace groundqa
