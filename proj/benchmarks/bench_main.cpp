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


#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "groundqa/chunking.hpp"
#include "groundqa/gateway.hpp"
#include "groundqa/retrieval.hpp"
#include "groundqa/vector_index.hpp"

namespace {

using groundqa::Vector;

std::vector<Vector> random_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<Vector> out(n, Vector(dim));
    for (auto& v : out) {
        for (auto& x : v) x = normal(rng);
    }
    return out;
}

void BM_HnswInsert(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto data = random_vectors(n, 64, 1);
    for (auto _ : state) {
        groundqa::HnswIndex index;
        for (std::size_t i = 0; i < n; ++i) index.insert(std::to_string(i), data[i]);
        benchmark::DoNotOptimize(index.size());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_HnswInsert)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_HnswSearch(benchmark::State& state) {
    const auto data = random_vectors(5000, 64, 2);
    const auto queries = random_vectors(100, 64, 3);
    groundqa::HnswIndex index;
    for (std::size_t i = 0; i < data.size(); ++i) index.insert(std::to_string(i), data[i]);
    const auto ef = static_cast<std::size_t>(state.range(0));
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.search_knn(queries[q++ % queries.size()], 10, ef));
    }
}
BENCHMARK(BM_HnswSearch)->Arg(10)->Arg(100)->Arg(400);

void BM_BruteForce(benchmark::State& state) {
    const auto data = random_vectors(5000, 64, 2);
    const auto queries = random_vectors(100, 64, 3);
    groundqa::HnswIndex index;
    for (std::size_t i = 0; i < data.size(); ++i) index.insert(std::to_string(i), data[i]);
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.brute_force_knn(queries[q++ % queries.size()], 10));
    }
}
BENCHMARK(BM_BruteForce);

void BM_RrfFuse(benchmark::State& state) {
    std::vector<groundqa::RankedList> lists(6);
    std::mt19937_64 rng(4);
    for (std::size_t l = 0; l < lists.size(); ++l) {
        lists[l].origin = "list" + std::to_string(l);
        for (std::size_t r = 1; r <= 10; ++r) {
            lists[l].hits.push_back({"c" + std::to_string(rng() % 40), 0.5, r});
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(groundqa::rrf_fuse(lists, 60.0));
}
BENCHMARK(BM_RrfFuse);

std::string synthetic_text(std::size_t sentences) {
    std::string text;
    for (std::size_t i = 0; i < sentences; ++i) {
        text += "Sentence " + std::to_string(i) + " talks about topic" + std::to_string(i / 10) +
                " with several filler words here. ";
    }
    return text;
}

void BM_SemanticChunk(benchmark::State& state) {
    const auto text = synthetic_text(static_cast<std::size_t>(state.range(0)));
    groundqa::HashedTokenEmbedder embedder(256);
    for (auto _ : state) {
        benchmark::DoNotOptimize(groundqa::semantic_chunk(text, groundqa::SemanticChunkConfig{}, embedder));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_SemanticChunk)->Arg(200);

void BM_RecursiveChunk(benchmark::State& state) {
    const auto text = synthetic_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(groundqa::recursive_chunk(text, groundqa::RecursiveChunkConfig{750, 200}));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_RecursiveChunk)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
