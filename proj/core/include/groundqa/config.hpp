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
#include <string>
#include <string_view>
#include <vector>

#include "groundqa/chunking.hpp"
#include "groundqa/gateway.hpp"
#include "groundqa/generation.hpp"
#include "groundqa/ingest.hpp"
#include "groundqa/retrieval.hpp"
#include "groundqa/vector_index.hpp"

namespace groundqa {

struct EvalSettings {
    std::vector<std::size_t> k_values{1, 3, 5, 10, 20};
    std::filesystem::path wikiqa_tsv;
    std::vector<ChunkerConfig> chunkers;  ///< chunking benchmark sweep
    std::filesystem::path corpus;         ///< BEIR corpus.jsonl
    std::filesystem::path queries;        ///< BEIR queries.jsonl
    std::filesystem::path qrels;          ///< BEIR qrels TSV
    std::filesystem::path generation_dataset;
    std::vector<std::filesystem::path> generation_documents;
};

/// Everything the engine reads from its INI file. Section and key names
/// follow the dotted names, e.g. [embed] base_url = ... is embed.base_url.
struct EngineConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path static_dir;  ///< served at "/" when set
    std::string cors_origin = "*";
    std::filesystem::path data_dir = "data";

    std::string embed_mode = "hashed";  ///< hashed | http
    HttpBackendOptions embed;
    std::size_t embed_dim = 256;  ///< hashed mode only

    std::string generate_mode = "extractive";  ///< extractive | http
    HttpBackendOptions generate;

    std::string rerank_mode = "lexical";  ///< lexical | http
    HttpBackendOptions rerank;
    bool rerank_logistic = false;

    ChunkerConfig chunker = SemanticChunkConfig{};
    SummaryConfig summary;
    HnswParams index;
    RetrievalConfig retrieval;
    GenerationConfig generation;
    EvalSettings eval;

    /// Parses INI text. Unknown keys are ignored; malformed values throw
    /// InvalidArgument.
    static EngineConfig from_ini(std::string_view ini);
    static EngineConfig load(const std::filesystem::path& path);

    /// ENGINE_DATA_DIR and ENGINE_PORT.
    void apply_env_overrides();

    void validate() const;
};

/// "semantic:<method>:<amount>[:<buffer_size>]" or
/// "recursive:<chunk_size>:<overlap>".
ChunkerConfig parse_chunker_spec(std::string_view spec);

}  // namespace groundqa
