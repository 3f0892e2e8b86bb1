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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace groundqa {

/// Reader-writer lock in which a waiting writer stops new readers from
/// entering, so inserts are not starved by a steady stream of searches.
/// Meets the SharedMutex requirements used by std::shared_lock.
class WriterPriorityMutex {
  public:
    void lock() {
        turnstile_.lock();
        rw_.lock();
    }
    void unlock() {
        rw_.unlock();
        turnstile_.unlock();
    }
    void lock_shared() {
        std::lock_guard gate(turnstile_);
        rw_.lock_shared();
    }
    void unlock_shared() { rw_.unlock_shared(); }

  private:
    std::mutex turnstile_;
    std::shared_mutex rw_;
};

/// dot(a,b) / (|a||b|). Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct HnswParams {
    std::size_t M = 16;                 ///< max links per node on layers > 0
    std::size_t ef_construction = 200;  ///< beam width while inserting
    std::size_t ef_search = 100;        ///< default beam width while searching
    std::uint64_t seed = 42;

    std::size_t M0() const noexcept { return 2 * M; }  ///< layer-0 cap
    double mL() const noexcept;                         ///< 1 / ln(M)

    /// Throws InvalidArgument unless M >= 2, ef_construction >= M, ef_search >= 1.
    void validate() const;
};

struct SearchHit {
    std::string chunk_id;
    double similarity = 0.0;
    std::size_t rank = 0;  ///< 1-based

    bool operator==(const SearchHit&) const = default;
};

/// Hierarchical navigable small world graph over unit vectors with cosine
/// similarity, plus the exhaustive scan used as its oracle.
///
/// Neighbor selection keeps the nearest candidates (no diversity heuristic).
/// Levels are drawn as floor(-ln(u) * mL) from a seeded mt19937_64 whose state
/// is persisted, so a loaded index keeps inserting exactly as the original
/// would have.
///
/// Thread safety: any number of concurrent searches, or one insert.
class HnswIndex {
  public:
    static constexpr std::uint32_t kFormatVersion = 1;

    explicit HnswIndex(HnswParams params = {});

    HnswIndex(const HnswIndex&) = delete;
    HnswIndex& operator=(const HnswIndex&) = delete;

    /// The vector is L2-normalized before storage. The first insert fixes the
    /// dimension. Throws DimensionMismatch, DuplicateId, ZeroVector.
    void insert(std::string chunk_id, std::span<const float> vector);

    /// Up to k hits, similarity descending, ties by chunk_id ascending.
    /// ef defaults to params().ef_search and is raised to k when smaller.
    std::vector<SearchHit> search_knn(std::span<const float> query, std::size_t k,
                                      std::optional<std::size_t> ef = std::nullopt) const;

    /// Exhaustive scan with the same ordering contract as search_knn.
    std::vector<SearchHit> brute_force_knn(std::span<const float> query, std::size_t k) const;

    /// Writes the binary index file atomically.
    void save(const std::filesystem::path& path) const;

    /// Throws FormatVersionMismatch, CorruptFile or IoError.
    static std::unique_ptr<HnswIndex> load(const std::filesystem::path& path);

    std::size_t size() const;
    std::size_t dimension() const;
    const HnswParams& params() const noexcept { return params_; }
    void set_ef_search(std::size_t ef);
    bool contains(std::string_view chunk_id) const;

    // Introspection for graph checks.
    std::optional<std::size_t> entry_point() const;
    int max_level() const;
    int node_level(std::size_t node) const;
    std::string node_id(std::size_t node) const;
    std::vector<std::uint32_t> neighbors(std::size_t node, int layer) const;
    std::vector<float> node_vector(std::size_t node) const;

    /// One level draw: floor(-ln(u) * mL), u uniform on (0,1).
    static int draw_level(std::mt19937_64& rng, double mL);

  private:
    struct Candidate {
        float distance;
        std::uint32_t node;
        bool operator<(const Candidate& o) const noexcept {
            return distance < o.distance || (distance == o.distance && node < o.node);
        }
        bool operator>(const Candidate& o) const noexcept { return o < *this; }
    };

    float distance(std::span<const float> q, std::uint32_t node) const noexcept;
    std::span<const float> vec(std::uint32_t node) const noexcept;
    std::vector<Candidate> search_layer(std::span<const float> q, const std::vector<Candidate>& entry, std::size_t ef,
                                        int layer) const;
    std::uint32_t greedy_descend(std::span<const float> q, int from_layer, int to_layer) const;
    void prune(std::uint32_t node, int layer);
    std::vector<SearchHit> to_hits(std::vector<Candidate> found, std::size_t k) const;
    std::vector<float> normalized(std::span<const float> v) const;

    HnswParams params_;
    std::size_t dim_ = 0;
    std::vector<float> data_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][layer] -> neighbors
    std::int64_t entry_ = -1;
    int max_level_ = -1;
    std::mt19937_64 rng_;
    mutable WriterPriorityMutex mutex_;
};

}  // namespace groundqa
