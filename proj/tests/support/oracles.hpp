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

// Reference implementations written independently of the library: plain
// loops, double precision, no shared helpers. Tests compare library output
// against these.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace groundqa::oracle {

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * double(b[i]);
        na += double(a[i]) * double(a[i]);
        nb += double(b[i]) * double(b[i]);
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Ids of the k most similar vectors, similarity descending, id ascending on ties.
inline std::vector<std::string> knn(const std::vector<std::pair<std::string, std::vector<float>>>& data,
                                    const std::vector<float>& q, std::size_t k) {
    std::vector<std::pair<double, std::string>> all;
    for (const auto& [id, v] : data) all.emplace_back(-cosine(v, q), id);
    std::sort(all.begin(), all.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
    return out;
}

struct Prf {
    double p, r, f;
};

inline Prf prf_at_k(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t k) {
    std::set<std::string> seen;
    double hits = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        if (relevant.count(ranked[i]) && seen.insert(ranked[i]).second) hits += 1;
    }
    const double p = hits / double(k);
    const double r = hits / double(relevant.size());
    return {p, r, p + r == 0 ? 0.0 : 2 * p * r / (p + r)};
}

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += char(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// LCS length by exhaustive recursion with memoization over (i, j).
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size() || j == b.size()) return 0;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t best = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

inline Prf rouge_l(const std::string& cand, const std::string& ref) {
    const auto c = words(cand), r = words(ref);
    if (c.empty() || r.empty()) return {0, 0, 0};
    const double l = double(lcs(c, r));
    const double p = l / double(c.size()), rec = l / double(r.size());
    return {p, rec, p + rec == 0 ? 0.0 : 2 * p * rec / (p + rec)};
}

/// Sentence BLEU-4 with uniform weights, clipped counts, a 1e-9 floor on zero
/// n-gram matches and the brevity penalty.
inline double bleu(const std::string& cand, const std::string& ref) {
    const auto c = words(cand), r = words(ref);
    if (c.empty()) return 0.0;
    double log_sum = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::map<std::vector<std::string>, int> cc, rc;
        for (std::size_t i = 0; i + n <= c.size(); ++i) cc[{c.begin() + i, c.begin() + i + n}]++;
        for (std::size_t i = 0; i + n <= r.size(); ++i) rc[{r.begin() + i, r.begin() + i + n}]++;
        double match = 0, total = 0;
        for (const auto& [g, cnt] : cc) {
            total += cnt;
            match += std::min(cnt, rc.count(g) ? rc[g] : 0);
        }
        const double pn = (match > 0 ? match : 1e-9) / (total > 0 ? total : 1);
        log_sum += std::log(pn) / 4.0;
    }
    const double bp = c.size() < r.size() ? std::exp(1.0 - double(r.size()) / double(c.size())) : 1.0;
    return bp * std::exp(log_sum);
}

/// Σ 1/(k + rank) per id across 1-based ranked lists.
inline std::map<std::string, double> rrf(const std::vector<std::vector<std::string>>& lists, double k) {
    std::map<std::string, double> out;
    for (const auto& l : lists) {
        for (std::size_t i = 0; i < l.size(); ++i) out[l[i]] += 1.0 / (k + double(i + 1));
    }
    return out;
}

}  // namespace groundqa::oracle
