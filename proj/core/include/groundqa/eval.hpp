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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundqa/chunking.hpp"
#include "groundqa/gateway.hpp"
#include "groundqa/generation.hpp"
#include "groundqa/vector_index.hpp"

namespace groundqa {

class Engine;

// ---------------------------------------------------------------------------
// Metrics

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall) noexcept;

/// Precision uses k as denominator even when fewer than k ids were
/// retrieved. Throws InvalidArgument for k == 0 or an empty relevant set.
PrfScore precision_recall_f1_at_k(std::span<const std::string> retrieved, const std::set<std::string>& relevant,
                                  std::size_t k);

/// Lowercased tokens with punctuation removed (shared with the lexical
/// reranker).
std::vector<std::string> metric_tokens(std::string_view s);

/// Token-level LCS precision, recall and F1; all zero when either side is
/// empty.
PrfScore rouge_l(std::string_view candidate, std::string_view reference);

/// Geometric mean of clipped n-gram precisions for n = 1..max_n times the
/// brevity penalty. A zero match count (or an empty n-gram set) contributes
/// 1e-9 instead of 0.
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);

/// Fraction of answers flagged insufficient_context. Throws InvalidArgument
/// on an empty list.
double refusal_rate(std::span<const Answer> answers);
double refusal_rate(std::span<const bool> refused);

// ---------------------------------------------------------------------------
// Reports

struct DepthMetrics {
    std::size_t k = 0;
    PrfScore mean;  ///< macro average over evaluated queries
    std::size_t num_queries = 0;
};

struct QueryMetrics {
    std::string query_id;
    std::vector<PrfScore> per_k;  ///< aligned with MetricReport::per_k
};

struct MetricReport {
    std::string config;  ///< fingerprint of the evaluated configuration
    std::vector<DepthMetrics> per_k;
    std::vector<QueryMetrics> per_query;
    std::size_t excluded_queries = 0;  ///< queries without relevance judgments
    std::size_t corpus_units = 0;      ///< documents or chunks indexed

    static constexpr std::string_view kCsvHeader = "config,k,precision,recall,f1,num_queries";

    /// One CSV line per k, without the header.
    std::string csv_rows() const;
    nlohmann::json to_json() const;
};

/// Macro-averages per-query scores into a report. k_values must be sorted
/// ascending and every per_query entry aligned with them.
MetricReport aggregate(std::string config, std::span<const std::size_t> k_values, std::vector<QueryMetrics> per_query);

// ---------------------------------------------------------------------------
// WikiQA chunking benchmark

struct WikiQaRow {
    std::string question_id;
    std::string question;
    std::string document_title;
    std::string sentence;
    int label = 0;
};

/// Accepts the five-column layout (question_id, question, document_title,
/// sentence, label) or the original seven-column WikiQA release with its
/// header row. Throws FormatError or MissingLabel.
std::vector<WikiQaRow> parse_wikiqa_tsv(std::string_view tsv);
std::vector<WikiQaRow> load_wikiqa_tsv(const std::filesystem::path& path);

struct QrelQuery {
    std::string id;
    std::string text;
};

struct QrelSet {
    std::vector<QrelQuery> queries;
    std::map<std::string, std::set<std::string>> judgments;  ///< query id -> relevant ids or gold sentences
    std::size_t excluded = 0;                                ///< queries dropped for lack of positives
};

struct WikiQaCorpus {
    std::vector<std::string> titles;     ///< first-appearance order
    std::vector<std::string> documents;  ///< "title\nsentence sentence ..."
    std::string stream;                  ///< documents joined by blank lines
    QrelSet qrels;                       ///< gold sentences, verbatim
};

/// Groups rows by title in first-appearance order, keeps each distinct
/// sentence once in the order given, and maps every question to its
/// positively labeled sentences. Questions without a positive label are
/// excluded and counted.
WikiQaCorpus build_wikiqa_corpus(std::span<const WikiQaRow> rows);

/// True iff the whitespace-normalized chunk contains the whitespace-normalized
/// gold sentence as a contiguous substring.
bool is_relevant_containment(std::string_view chunk_text, std::string_view gold_sentence);

/// Containment scoring of one ranked chunk list: precision counts chunks
/// containing any gold sentence over k, recall counts gold sentences covered
/// by the top k over the number of gold sentences.
PrfScore containment_prf_at_k(std::span<const std::string> ranked_chunk_texts, const std::set<std::string>& gold,
                              std::size_t k);

/// chunk -> embed -> fresh index -> search every question at max(k) ->
/// containment relevance -> macro P/R/F1 per k.
MetricReport run_chunking_benchmark(const WikiQaCorpus& corpus, const ChunkerConfig& chunker,
                                    std::span<const std::size_t> k_values, Embedder& embedder,
                                    const HnswParams& params = {});

// ---------------------------------------------------------------------------
// BEIR retrieval benchmark

struct BeirDocument {
    std::string id;
    std::string title;
    std::string text;
};

std::vector<BeirDocument> parse_beir_corpus(std::string_view jsonl);
std::vector<QrelQuery> parse_beir_queries(std::string_view jsonl);
/// "query-id\tcorpus-id\tscore" with an optional header; score > 0 marks a
/// relevant document.
std::map<std::string, std::set<std::string>> parse_beir_qrels(std::string_view tsv);

/// Documents are embedded as "title text"; relevance is by document id.
MetricReport run_retrieval_benchmark(std::span<const BeirDocument> corpus, std::span<const QrelQuery> queries,
                                     const std::map<std::string, std::set<std::string>>& qrels,
                                     std::span<const std::size_t> k_values, Embedder& embedder,
                                     const HnswParams& params = {});

MetricReport run_retrieval_benchmark(const std::filesystem::path& corpus, const std::filesystem::path& queries,
                                     const std::filesystem::path& qrels, std::span<const std::size_t> k_values,
                                     Embedder& embedder, const HnswParams& params = {});

// ---------------------------------------------------------------------------
// Generation evaluation

struct GenerationExample {
    std::string id;
    std::string question;
    std::string reference;
};

/// JSON lines {"_id","question","reference"}. Throws FormatError.
std::vector<GenerationExample> parse_generation_dataset(std::string_view jsonl);

struct GenerationResult {
    std::string id;
    std::string answer;
    bool insufficient_context = false;
    PrfScore rouge;
    double bleu = 0.0;
};

struct GenerationReport {
    std::vector<GenerationResult> results;
    PrfScore mean_rouge;
    double mean_bleu = 0.0;
    double refusal_rate = 0.0;

    static constexpr std::string_view kCsvHeader =
        "id,rouge_l_precision,rouge_l_recall,rouge_l_f1,bleu,insufficient_context";

    std::string csv_rows() const;
    nlohmann::json to_json() const;
};

/// Asks every question in a fresh conversation of the engine.
GenerationReport run_generation_eval(Engine& engine, std::span<const GenerationExample> examples);

}  // namespace groundqa
