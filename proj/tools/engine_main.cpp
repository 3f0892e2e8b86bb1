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


#include <fmt/format.h>
#include <pthread.h>

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <thread>

#include "groundqa/config.hpp"
#include "groundqa/engine.hpp"
#include "groundqa/error.hpp"
#include "groundqa/eval.hpp"
#include "groundqa/service.hpp"

namespace fs = std::filesystem;
using namespace groundqa;

namespace {

EngineConfig load_config(const std::string& path_flag) {
    std::string path = path_flag;
    if (path.empty()) {
        if (const char* env = std::getenv("ENGINE_CONFIG"); env && *env) path = env;
    }
    EngineConfig config = path.empty() ? EngineConfig{} : EngineConfig::load(path);
    config.apply_env_overrides();
    return config;
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::kIoError, fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) raise(ErrorCode::kIoError, fmt::format("cannot write {}", path.string()));
    fmt::print(stderr, "wrote {}\n", path.string());
}

int serve(EngineConfig config, const std::optional<std::string>& data_dir, const std::optional<int>& port) {
    if (data_dir) config.data_dir = *data_dir;
    if (port) config.port = *port;
    config.validate();

    // Block termination signals before any thread starts so that only the
    // waiter thread below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Engine engine(config);
    Service service(engine, ServiceOptions{config.host, config.port, config.static_dir, config.cors_origin});
    const int bound = service.bind();
    fmt::print("listening on http://{}:{}\n", config.host, bound);
    std::fflush(stdout);

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    service.run();
    // run() can also return on its own; wake the waiter if so.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

int ingest(EngineConfig config, const fs::path& file) {
    Engine engine(std::move(config));
    const auto result = engine.ingest(read_all(file), file.filename().string());
    const auto& r = result.record;
    fmt::print("{} {} pages={} chunks={}\n", result.created ? "ingested" : "already present", r.document_id,
               r.page_count, r.chunk_count);
    return 0;
}

int eval_chunking(const EngineConfig& config, const fs::path& out) {
    if (config.eval.wikiqa_tsv.empty()) raise(ErrorCode::kInvalidArgument, "eval.wikiqa_tsv is required");
    auto chunkers = config.eval.chunkers;
    if (chunkers.empty()) chunkers.push_back(config.chunker);
    const auto corpus = build_wikiqa_corpus(load_wikiqa_tsv(config.eval.wikiqa_tsv));
    auto embedder = make_embedder(config);
    std::string csv = std::string(MetricReport::kCsvHeader) + "\n";
    auto reports = nlohmann::json::array();
    for (const auto& chunker : chunkers) {
        fmt::print(stderr, "chunking benchmark: {}\n", describe(chunker));
        const auto report = run_chunking_benchmark(corpus, chunker, config.eval.k_values, *embedder, config.index);
        csv += report.csv_rows();
        reports.push_back(report.to_json());
    }
    write_text(out / "chunking.csv", csv);
    write_text(out / "chunking.json", reports.dump(2) + "\n");
    return 0;
}

int eval_retrieval(const EngineConfig& config, const fs::path& out) {
    if (config.eval.corpus.empty() || config.eval.queries.empty() || config.eval.qrels.empty()) {
        raise(ErrorCode::kInvalidArgument, "eval.corpus, eval.queries and eval.qrels are required");
    }
    auto embedder = make_embedder(config);
    const auto report = run_retrieval_benchmark(config.eval.corpus, config.eval.queries, config.eval.qrels,
                                                config.eval.k_values, *embedder, config.index);
    write_text(out / "retrieval.csv", std::string(MetricReport::kCsvHeader) + "\n" + report.csv_rows());
    write_text(out / "retrieval.json", report.to_json().dump(2) + "\n");
    return 0;
}

int eval_generation(const EngineConfig& config, const fs::path& out) {
    if (config.eval.generation_dataset.empty()) {
        raise(ErrorCode::kInvalidArgument, "eval.generation_dataset is required");
    }
    const auto examples = parse_generation_dataset(read_all(config.eval.generation_dataset));
    Engine engine(config);
    for (const auto& doc : config.eval.generation_documents) {
        engine.ingest(read_all(doc), doc.filename().string());
    }
    const auto report = run_generation_eval(engine, examples);
    write_text(out / "generation.csv", std::string(GenerationReport::kCsvHeader) + "\n" + report.csv_rows());
    write_text(out / "generation.json", report.to_json().dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"groundqa engine: grounded question answering over local documents"};
    app.require_subcommand(1);
    std::string config_path;

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", config_path, "INI config file (default: $ENGINE_CONFIG)");
    std::optional<std::string> data_dir;
    std::optional<int> port;
    serve_cmd->add_option("--data-dir", data_dir, "Data directory");
    serve_cmd->add_option("--port", port, "Listen port, 0 for any free port")->check(CLI::Range(0, 65535));

    auto* ingest_cmd = app.add_subcommand("ingest", "Ingest one PDF or text file");
    std::string file;
    ingest_cmd->add_option("file", file, "Document to ingest")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--config", config_path, "INI config file (default: $ENGINE_CONFIG)");

    auto* eval_cmd = app.add_subcommand("eval", "Run an offline benchmark");
    std::string suite;
    std::string out_dir = ".";
    eval_cmd->add_option("suite", suite, "retrieval, chunking or generation")
        ->required()
        ->check(CLI::IsMember({"retrieval", "chunking", "generation"}));
    eval_cmd->add_option("--config", config_path, "INI config file (default: $ENGINE_CONFIG)");
    eval_cmd->add_option("--out", out_dir, "Output directory for CSV and JSON reports");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = load_config(config_path);
        if (serve_cmd->parsed()) return serve(std::move(config), data_dir, port);
        if (ingest_cmd->parsed()) return ingest(std::move(config), file);
        fs::create_directories(out_dir);
        if (suite == "chunking") return eval_chunking(config, out_dir);
        if (suite == "retrieval") return eval_retrieval(config, out_dir);
        return eval_generation(config, out_dir);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
