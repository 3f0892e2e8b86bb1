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

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "groundqa/error.hpp"
#include "groundqa/eval.hpp"
#include "groundqa/text.hpp"

namespace groundqa {

namespace {

constexpr double kBleuEpsilon = 1e-9;

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

nlohmann::json prf_json(const PrfScore& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

double f1_score(double precision, double recall) noexcept {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrfScore precision_recall_f1_at_k(std::span<const std::string> retrieved, const std::set<std::string>& relevant,
                                  std::size_t k) {
    if (k == 0) raise(ErrorCode::kInvalidArgument, "k must be >= 1");
    if (relevant.empty()) raise(ErrorCode::kInvalidArgument, "relevant set must be non-empty");
    std::set<std::string> seen;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i) {
        if (seen.insert(retrieved[i]).second && relevant.count(retrieved[i])) ++hits;
    }
    PrfScore s;
    s.precision = static_cast<double>(hits) / static_cast<double>(k);
    s.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

std::vector<std::string> metric_tokens(std::string_view s) { return text::tokenize(s); }

PrfScore rouge_l(std::string_view candidate, std::string_view reference) {
    const auto c = metric_tokens(candidate);
    const auto r = metric_tokens(reference);
    if (c.empty() || r.empty()) return {};
    std::vector<std::size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
    for (std::size_t i = 1; i <= c.size(); ++i) {
        for (std::size_t j = 1; j <= r.size(); ++j) {
            cur[j] = c[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const auto lcs = static_cast<double>(prev[r.size()]);
    PrfScore s;
    s.precision = lcs / static_cast<double>(c.size());
    s.recall = lcs / static_cast<double>(r.size());
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
    if (max_n < 1) raise(ErrorCode::kInvalidArgument, "bleu max_n must be >= 1");
    const auto c = metric_tokens(candidate);
    const auto r = metric_tokens(reference);
    if (c.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto cand = ngram_counts(c, static_cast<std::size_t>(n));
        const auto ref = ngram_counts(r, static_cast<std::size_t>(n));
        std::size_t total = 0, matched = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min(count, it->second);
        }
        const double num = matched > 0 ? static_cast<double>(matched) : kBleuEpsilon;
        const double den = total > 0 ? static_cast<double>(total) : 1.0;
        log_sum += std::log(num / den);
    }
    const double bp = c.size() < r.size() ? std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(c.size()))
                                          : 1.0;
    return bp * std::exp(log_sum / max_n);
}

double refusal_rate(std::span<const bool> refused) {
    if (refused.empty()) raise(ErrorCode::kInvalidArgument, "refusal_rate needs at least one answer");
    const auto n = std::count(refused.begin(), refused.end(), true);
    return static_cast<double>(n) / static_cast<double>(refused.size());
}

double refusal_rate(std::span<const Answer> answers) {
    if (answers.empty()) raise(ErrorCode::kInvalidArgument, "refusal_rate needs at least one answer");
    std::size_t n = 0;
    for (const auto& a : answers) n += a.insufficient_context ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(answers.size());
}

MetricReport aggregate(std::string config, std::span<const std::size_t> k_values, std::vector<QueryMetrics> per_query) {
    if (!std::is_sorted(k_values.begin(), k_values.end())) raise(ErrorCode::kInvalidArgument, "k values must be ascending");
    MetricReport report;
    report.config = std::move(config);
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        DepthMetrics d;
        d.k = k_values[i];
        d.num_queries = per_query.size();
        for (const auto& q : per_query) {
            d.mean.precision += q.per_k.at(i).precision;
            d.mean.recall += q.per_k.at(i).recall;
            d.mean.f1 += q.per_k.at(i).f1;
        }
        if (!per_query.empty()) {
            const auto n = static_cast<double>(per_query.size());
            d.mean.precision /= n;
            d.mean.recall /= n;
            d.mean.f1 /= n;
        }
        report.per_k.push_back(d);
    }
    report.per_query = std::move(per_query);
    return report;
}

std::string MetricReport::csv_rows() const {
    std::string out;
    for (const auto& d : per_k) {
        out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", config, d.k, d.mean.precision, d.mean.recall, d.mean.f1,
                           d.num_queries);
    }
    return out;
}

nlohmann::json MetricReport::to_json() const {
    using nlohmann::json;
    json depths = json::array();
    for (const auto& d : per_k) {
        auto j = prf_json(d.mean);
        j["k"] = d.k;
        j["num_queries"] = d.num_queries;
        depths.push_back(std::move(j));
    }
    json queries = json::array();
    for (const auto& q : per_query) {
        json ks = json::array();
        for (const auto& s : q.per_k) ks.push_back(prf_json(s));
        queries.push_back({{"query_id", q.query_id}, {"per_k", std::move(ks)}});
    }
    return json{{"config", config},
                {"averaging", "macro over queries; precision denominator is k"},
                {"excluded_queries", excluded_queries},
                {"corpus_units", corpus_units},
                {"per_k", std::move(depths)},
                {"per_query", std::move(queries)},
                {"meteor", nullptr},
                {"bert_score", nullptr}};
}

}  // namespace groundqa
