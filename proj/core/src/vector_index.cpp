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

#include "groundqa/vector_index.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <queue>
#include <sstream>

#include "fileio.hpp"
#include "groundqa/error.hpp"

namespace groundqa {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        raise(ErrorCode::kDimensionMismatch, fmt::format("cosine of {}-d and {}-d vectors", a.size(), b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) raise(ErrorCode::kZeroVector, "cosine similarity of a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double HnswParams::mL() const noexcept { return 1.0 / std::log(static_cast<double>(M)); }

void HnswParams::validate() const {
    if (M < 2) raise(ErrorCode::kInvalidArgument, "HNSW M must be >= 2");
    if (ef_construction < M) raise(ErrorCode::kInvalidArgument, "HNSW ef_construction must be >= M");
    if (ef_search < 1) raise(ErrorCode::kInvalidArgument, "HNSW ef_search must be >= 1");
}

HnswIndex::HnswIndex(HnswParams params) : params_(params), rng_(params.seed) { params_.validate(); }

int HnswIndex::draw_level(std::mt19937_64& rng, double mL) {
    // 53 random mantissa bits, centred in their cell so u is never 0 or 1.
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return static_cast<int>(std::floor(-std::log(u) * mL));
}

std::span<const float> HnswIndex::vec(std::uint32_t node) const noexcept {
    return {data_.data() + static_cast<std::size_t>(node) * dim_, dim_};
}

float HnswIndex::distance(std::span<const float> q, std::uint32_t node) const noexcept {
    const float* v = data_.data() + static_cast<std::size_t>(node) * dim_;
    float dot = 0.0f;
    for (std::size_t i = 0; i < dim_; ++i) dot += q[i] * v[i];
    return 1.0f - dot;
}

std::vector<float> HnswIndex::normalized(std::span<const float> v) const {
    if (v.size() != dim_) {
        raise(ErrorCode::kDimensionMismatch, fmt::format("index dimension is {}, got {}", dim_, v.size()));
    }
    std::vector<float> out(v.begin(), v.end());
    double sq = 0.0;
    for (float x : out) sq += static_cast<double>(x) * x;
    if (!(sq > 0.0)) raise(ErrorCode::kZeroVector, "zero vector");
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : out) x = static_cast<float>(x * inv);
    return out;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> q, const std::vector<Candidate>& entry,
                                                          std::size_t ef, int layer) const {
    std::vector<char> visited(ids_.size(), 0);
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
    std::priority_queue<Candidate> best;  // max-heap: worst of the current best on top
    for (const auto& c : entry) {
        if (visited[c.node]) continue;
        visited[c.node] = 1;
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
    }
    while (!frontier.empty()) {
        const Candidate c = frontier.top();
        if (best.size() >= ef && best.top() < c) break;
        frontier.pop();
        for (std::uint32_t nb : links_[c.node][static_cast<std::size_t>(layer)]) {
            if (visited[nb]) continue;
            visited[nb] = 1;
            const Candidate cand{distance(q, nb), nb};
            if (best.size() < ef || cand < best.top()) {
                frontier.push(cand);
                best.push(cand);
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::uint32_t HnswIndex::greedy_descend(std::span<const float> q, int from_layer, int to_layer) const {
    auto ep = static_cast<std::uint32_t>(entry_);
    for (int layer = from_layer; layer > to_layer; --layer) {
        ep = search_layer(q, {{distance(q, ep), ep}}, 1, layer).front().node;
    }
    return ep;
}

void HnswIndex::prune(std::uint32_t node, int layer) {
    auto& list = links_[node][static_cast<std::size_t>(layer)];
    const std::size_t cap = layer == 0 ? params_.M0() : params_.M;
    if (list.size() <= cap) return;
    std::vector<Candidate> scored;
    scored.reserve(list.size());
    const auto base = vec(node);
    for (std::uint32_t nb : list) scored.push_back({distance(base, nb), nb});
    std::sort(scored.begin(), scored.end());
    list.clear();
    for (std::size_t i = 0; i < cap; ++i) list.push_back(scored[i].node);
}

void HnswIndex::insert(std::string chunk_id, std::span<const float> vector) {
    std::unique_lock lock(mutex_);
    if (by_id_.count(chunk_id)) raise(ErrorCode::kDuplicateId, "chunk already indexed: " + chunk_id);
    if (ids_.empty() && dim_ == 0) {
        if (vector.empty()) raise(ErrorCode::kDimensionMismatch, "cannot index an empty vector");
        dim_ = vector.size();
    }
    const std::vector<float> q = normalized(vector);
    const int level = draw_level(rng_, params_.mL());

    const auto node = static_cast<std::uint32_t>(ids_.size());
    data_.insert(data_.end(), q.begin(), q.end());
    ids_.push_back(chunk_id);
    levels_.push_back(level);
    links_.emplace_back(static_cast<std::size_t>(level) + 1);

    if (entry_ < 0) {
        entry_ = node;
        max_level_ = level;
        by_id_.emplace(std::move(chunk_id), node);
        return;
    }

    const std::uint32_t ep = greedy_descend(q, max_level_, level);
    std::vector<Candidate> entry{{distance(q, ep), ep}};
    for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
        auto found = search_layer(q, entry, params_.ef_construction, layer);
        const std::size_t cap = layer == 0 ? params_.M0() : params_.M;
        auto& mine = links_[node][static_cast<std::size_t>(layer)];
        for (std::size_t i = 0; i < std::min(cap, found.size()); ++i) {
            const std::uint32_t nb = found[i].node;
            mine.push_back(nb);
            links_[nb][static_cast<std::size_t>(layer)].push_back(node);
            prune(nb, layer);
        }
        entry = std::move(found);
    }
    if (level > max_level_) {
        max_level_ = level;
        entry_ = node;
    }
    by_id_.emplace(std::move(chunk_id), node);
}

std::vector<SearchHit> HnswIndex::to_hits(std::vector<Candidate> found, std::size_t k) const {
    std::vector<SearchHit> hits;
    hits.reserve(found.size());
    for (const auto& c : found) hits.push_back({ids_[c.node], static_cast<double>(1.0f - c.distance), 0});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.similarity > b.similarity || (a.similarity == b.similarity && a.chunk_id < b.chunk_id);
    });
    if (hits.size() > k) hits.resize(k);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

std::vector<SearchHit> HnswIndex::search_knn(std::span<const float> query, std::size_t k,
                                             std::optional<std::size_t> ef) const {
    std::shared_lock lock(mutex_);
    if (ids_.empty()) raise(ErrorCode::kEmptyIndex, "search on an empty index");
    if (k == 0) raise(ErrorCode::kInvalidArgument, "k must be >= 1");
    const std::vector<float> q = normalized(query);
    const std::size_t width = std::max(ef.value_or(params_.ef_search), k);
    const std::uint32_t ep = greedy_descend(q, max_level_, 0);
    return to_hits(search_layer(q, {{distance(q, ep), ep}}, width, 0), k);
}

std::vector<SearchHit> HnswIndex::brute_force_knn(std::span<const float> query, std::size_t k) const {
    std::shared_lock lock(mutex_);
    if (ids_.empty()) raise(ErrorCode::kEmptyIndex, "search on an empty index");
    if (k == 0) raise(ErrorCode::kInvalidArgument, "k must be >= 1");
    const std::vector<float> q = normalized(query);
    std::vector<Candidate> all;
    all.reserve(ids_.size());
    for (std::uint32_t n = 0; n < ids_.size(); ++n) all.push_back({distance(q, n), n});
    return to_hits(std::move(all), k);
}

std::size_t HnswIndex::size() const {
    std::shared_lock lock(mutex_);
    return ids_.size();
}

std::size_t HnswIndex::dimension() const {
    std::shared_lock lock(mutex_);
    return dim_;
}

void HnswIndex::set_ef_search(std::size_t ef) {
    std::unique_lock lock(mutex_);
    if (ef < 1) raise(ErrorCode::kInvalidArgument, "ef_search must be >= 1");
    params_.ef_search = ef;
}

bool HnswIndex::contains(std::string_view chunk_id) const {
    std::shared_lock lock(mutex_);
    return by_id_.count(std::string(chunk_id)) > 0;
}

std::optional<std::size_t> HnswIndex::entry_point() const {
    std::shared_lock lock(mutex_);
    if (entry_ < 0) return std::nullopt;
    return static_cast<std::size_t>(entry_);
}

int HnswIndex::max_level() const {
    std::shared_lock lock(mutex_);
    return max_level_;
}

int HnswIndex::node_level(std::size_t node) const {
    std::shared_lock lock(mutex_);
    return levels_.at(node);
}

std::string HnswIndex::node_id(std::size_t node) const {
    std::shared_lock lock(mutex_);
    return ids_.at(node);
}

std::vector<std::uint32_t> HnswIndex::neighbors(std::size_t node, int layer) const {
    std::shared_lock lock(mutex_);
    const auto& per_layer = links_.at(node);
    if (layer < 0 || static_cast<std::size_t>(layer) >= per_layer.size()) return {};
    return per_layer[static_cast<std::size_t>(layer)];
}

std::vector<float> HnswIndex::node_vector(std::size_t node) const {
    std::shared_lock lock(mutex_);
    if (node >= ids_.size()) raise(ErrorCode::kNotFound, "no such node");
    auto v = vec(static_cast<std::uint32_t>(node));
    return {v.begin(), v.end()};
}

// ---------------------------------------------------------------------------
// Binary format (all integers little-endian):
//   "HNSW" | u32 version | u32 dim | u64 count | u32 M | u32 M0 | u64 seed
//   u32 ef_construction | u32 ef_search | i64 entry | i32 max_level
//   u32 rng_len | rng state text
//   f32[count * dim] vectors
//   count x (u32 len | id bytes)
//   i32[count] levels
//   per layer 0..max_level, per node with level >= layer: u32 n | u32[n]
//   u32 crc32 of everything above

namespace {

class Writer {
  public:
    void bytes(std::string_view s) { buf_.append(s); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    std::string& buffer() { return buf_; }

  private:
    std::string buf_;
};

class Reader {
  public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::string_view bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str() { return std::string(bytes(u32())); }
    bool done() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) raise(ErrorCode::kCorruptFile, "index file is truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in pieces.
    std::size_t pos = 0;
    while (pos < data.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1U << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + pos), n);
        pos += n;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

void HnswIndex::save(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    Writer w;
    w.bytes("HNSW");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u64(ids_.size());
    w.u32(static_cast<std::uint32_t>(params_.M));
    w.u32(static_cast<std::uint32_t>(params_.M0()));
    w.u64(params_.seed);
    w.u32(static_cast<std::uint32_t>(params_.ef_construction));
    w.u32(static_cast<std::uint32_t>(params_.ef_search));
    w.u64(static_cast<std::uint64_t>(entry_));
    w.u32(static_cast<std::uint32_t>(max_level_));
    std::ostringstream rng_state;
    rng_state << rng_;
    w.str(rng_state.str());
    for (float f : data_) w.f32(f);
    for (const auto& id : ids_) w.str(id);
    for (int l : levels_) w.u32(static_cast<std::uint32_t>(l));
    for (int layer = 0; layer <= max_level_; ++layer) {
        for (std::size_t n = 0; n < ids_.size(); ++n) {
            if (levels_[n] < layer) continue;
            const auto& nbs = links_[n][static_cast<std::size_t>(layer)];
            w.u32(static_cast<std::uint32_t>(nbs.size()));
            for (std::uint32_t nb : nbs) w.u32(nb);
        }
    }
    const std::uint32_t crc = crc_of(w.buffer());
    w.u32(crc);
    fileio::write_atomic(path, w.buffer());
}

std::unique_ptr<HnswIndex> HnswIndex::load(const std::filesystem::path& path) {
    const std::string data = fileio::read_file(path);
    if (data.size() < 12 || data.compare(0, 4, "HNSW") != 0) raise(ErrorCode::kCorruptFile, "not an HNSW index file");
    Reader r(data);
    r.bytes(4);
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        raise(ErrorCode::kFormatVersionMismatch,
              fmt::format("index file version {} is not supported (expected {})", version, kFormatVersion));
    }
    const std::string_view body(data.data(), data.size() - 4);
    Reader tail(std::string_view(data).substr(data.size() - 4));
    if (crc_of(body) != tail.u32()) raise(ErrorCode::kCorruptFile, "index checksum mismatch");

    Reader in(body);
    in.bytes(8);
    HnswParams params;
    const std::size_t dim = in.u32();
    const std::uint64_t count = in.u64();
    params.M = in.u32();
    const std::uint32_t m0 = in.u32();
    params.seed = in.u64();
    params.ef_construction = in.u32();
    params.ef_search = in.u32();
    if (m0 != params.M0()) raise(ErrorCode::kCorruptFile, "inconsistent M0");
    try {
        params.validate();
    } catch (const Error&) {
        raise(ErrorCode::kCorruptFile, "invalid HNSW parameters in index file");
    }
    auto index = std::make_unique<HnswIndex>(params);
    index->dim_ = dim;
    index->entry_ = static_cast<std::int64_t>(in.u64());
    index->max_level_ = static_cast<std::int32_t>(in.u32());
    std::istringstream rng_state(in.str());
    rng_state >> index->rng_;
    if (!rng_state) raise(ErrorCode::kCorruptFile, "bad RNG state");
    if (count > body.size() || (dim > 0 && count * dim > body.size() / 4)) {
        raise(ErrorCode::kCorruptFile, "implausible node count");
    }
    index->data_.resize(count * dim);
    for (auto& f : index->data_) f = in.f32();
    index->ids_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        index->ids_.push_back(in.str());
        if (!index->by_id_.emplace(index->ids_.back(), static_cast<std::uint32_t>(i)).second) {
            raise(ErrorCode::kCorruptFile, "duplicate id in index file");
        }
    }
    index->levels_.resize(count);
    for (auto& l : index->levels_) {
        l = static_cast<std::int32_t>(in.u32());
        if (l < 0 || l > index->max_level_) raise(ErrorCode::kCorruptFile, "node level out of range");
    }
    index->links_.resize(count);
    for (std::uint64_t n = 0; n < count; ++n) index->links_[n].resize(static_cast<std::size_t>(index->levels_[n]) + 1);
    for (int layer = 0; layer <= index->max_level_; ++layer) {
        for (std::uint64_t n = 0; n < count; ++n) {
            if (index->levels_[n] < layer) continue;
            const std::uint32_t len = in.u32();
            auto& nbs = index->links_[n][static_cast<std::size_t>(layer)];
            nbs.resize(len);
            for (auto& nb : nbs) {
                nb = in.u32();
                if (nb >= count || index->levels_[nb] < layer) raise(ErrorCode::kCorruptFile, "dangling link");
            }
        }
    }
    if (!in.done()) raise(ErrorCode::kCorruptFile, "trailing bytes in index file");
    if ((count == 0) != (index->entry_ < 0) || index->entry_ >= static_cast<std::int64_t>(count)) {
        raise(ErrorCode::kCorruptFile, "bad entry point");
    }
    return index;
}

}  // namespace groundqa
